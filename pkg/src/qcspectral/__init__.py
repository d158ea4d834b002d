"""Dirichlet spectra of divergence-form operators and quasiconformal stability bounds."""

__version__ = "0.1.0"
