"""Satisfiability-preserving mutational fuzzing of SMT solvers."""

__version__ = "0.1.0"
