"""oppsim: trace-driven simulation of compute riding on surplus renewable power."""

__version__ = "0.1.0"
