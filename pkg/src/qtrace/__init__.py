"""Numerical U_q(sl2) trace functions and identity verification."""

from .qnum import QContext, qpow, pair2, qint, qfact, qbinom, weyl_denominator, \
    gaussian_weight, theta_gamma, character, qdim
from .tracefn import TraceFunctionParams, F_closed, Q_closed_inv, Psi_tilde, \
    F_findim, pole_list

__all__ = [
    "QContext", "qpow", "pair2", "qint", "qfact", "qbinom", "weyl_denominator",
    "gaussian_weight", "theta_gamma", "character", "qdim",
    "TraceFunctionParams", "F_closed", "Q_closed_inv", "Psi_tilde",
    "F_findim", "pole_list",
]

__version__ = "0.1.0"
