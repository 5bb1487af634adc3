"""
bridgeflow

Semi-supervised cross-domain alignment: fused inter-space costs, entropic
optimal transport solvers (linear, GW, FGW, unbalanced), true/global/local
alignment strategies and conditional flow matching between latent spaces.

Exposed both as a library and as the ``bridgeflow`` command line tool.
"""

__version__ = "0.1.0"
