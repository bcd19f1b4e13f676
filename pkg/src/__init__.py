"""PSNL: proximal symmetric nonnegative latent-factor analysis"""

__version__ = "0.1.0"
