"""One-shot and second-order private communication rates for cq wiretap channels."""

__version__ = "0.1.0"
