"""Converse lower bounds on the error probability of two-user multiple access channels."""

__version__ = "0.1.0"
