/**
 * Command-line entry point: render one SVG chart from a series.csv.
 *
 * Usage: plots <series.csv> --kind <generation|utilization|carbon|watts-per-core> -o out.svg
 *
 * Exit codes: 0 on success, 2 on bad arguments, unreadable input, schema
 * mismatch, or an empty series file.
 */
import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { PLOT_KINDS, PlotKind, renderPlot } from "./plots.js";
import { EmptySeries, SchemaMismatch, parseSeries } from "./series.js";

class UsageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "UsageError";
  }
}

interface CliArgs {
  series: string;
  kind: PlotKind;
  out: string;
}

async function parseArgs(argv: string[]): Promise<CliArgs> {
  const parsed = await yargs(argv)
    .scriptName("plots")
    .command("$0 <series>", "render one chart from a simulator series.csv", (y) =>
      y.positional("series", {
        type: "string",
        describe: "series.csv emitted by the simulator",
        demandOption: true,
      }),
    )
    .option("kind", {
      choices: PLOT_KINDS,
      describe: "which chart to draw",
      demandOption: true,
    })
    .option("out", {
      alias: "o",
      type: "string",
      describe: "output SVG path",
      demandOption: true,
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new UsageError(msg);
    })
    .parseAsync();
  return {
    series: parsed.series as string,
    kind: parsed.kind as PlotKind,
    out: parsed.out as string,
  };
}

/** Run the tool; returns the process exit code instead of exiting. */
export async function main(argv: string[]): Promise<number> {
  let args: CliArgs;
  try {
    args = await parseArgs(argv);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }

  let text: string;
  try {
    text = readFileSync(args.series, "utf8");
  } catch (err) {
    process.stderr.write(`error: cannot read ${args.series}: ${(err as Error).message}\n`);
    return 2;
  }

  try {
    const rows = parseSeries(text);
    writeFileSync(args.out, renderPlot(rows, args.kind), "utf8");
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof EmptySeries) {
      process.stderr.write(`error: ${err.name}: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
  process.stdout.write(`wrote ${args.out}\n`);
  return 0;
}

const entry = process.argv[1];
if (entry && import.meta.url === pathToFileURL(realpathSync(entry)).href) {
  process.exit(await main(hideBin(process.argv)));
}
