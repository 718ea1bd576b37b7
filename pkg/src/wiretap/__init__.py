"""Secrecy measured as eavesdropper distortion over wiretap channels."""
__version__ = "0.1.0"
