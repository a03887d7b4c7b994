"""Parameter synthesis for parametric timed automata with only invariants."""

__version__ = "0.1.0"
