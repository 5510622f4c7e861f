"""Whispering-gallery-mode OPO modelling: dispersion, phase matching, tuning and photon correlations."""
__version__ = "0.1.0"
