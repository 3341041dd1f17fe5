"""Exact credences, Monte Carlo frequencies and Dutch books for awakening protocols."""

from .protocol import ExperimentProtocol, builtin, parse, render, validate
from .measure import centered, condition, decompose, naive_indifference, objective, overlap_report

__version__ = "0.1.0"
