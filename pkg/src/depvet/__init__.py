"""depvet: dependency smell linting and vulnerability responsiveness analysis."""

__version__ = "0.1.0"
