# EI-GN Bayesian Optimization Package
__version__ = "0.1.0"
