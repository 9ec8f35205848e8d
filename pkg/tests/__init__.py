"""kdlab test suite."""
