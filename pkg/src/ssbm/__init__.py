"""Structured saliency benchmarking for speech: bubble-noise importance maps, an energy baseline, and the SSBM score."""

__version__ = "0.1.0"
