"""Proof kernel and cut elimination for a nominal sequent calculus."""

__version__ = "0.1.0"
