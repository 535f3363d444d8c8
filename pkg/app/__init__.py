"""SpinBrayton: quantum Brayton and Otto cycles of one or two spin-1/2s."""

__version__ = "0.1.0"
