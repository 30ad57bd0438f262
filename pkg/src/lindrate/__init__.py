"""Correlation functions and transition rates of Markovian open quantum systems."""

__version__ = "0.1.0"
