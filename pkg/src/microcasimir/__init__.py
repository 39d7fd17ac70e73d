"""Microscopic many-body Casimir and Casimir-Polder energies of nanoparticle assemblies."""

__version__ = "0.1.0"
