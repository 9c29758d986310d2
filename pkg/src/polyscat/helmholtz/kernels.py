"""Outgoing 2D Helmholtz fundamental solution and its derivatives.

``Phi(x, y) = (i/4) H0(k|x - y|)`` with ``H0`` the Hankel function of the
first kind.  Far-field constants follow the normalization
``u_s(x) = exp(ik|x|) / sqrt(|x|) * (u_inf(x/|x|) + O(1/|x|))``.
"""
import numpy as np
from scipy import special

EULER_GAMMA = 0.5772156649015329


def hankel0(z):
    """``H0(z)`` for real ``z > 0``; the real Bessel routines are much faster
    than the complex-argument Hankel routine and agree to rounding."""
    return special.j0(z) + 1j * special.y0(z)


def hankel1(z):
    return special.j1(z) + 1j * special.y1(z)


def far_field_constant(k):
    """Far-field amplitude of ``Phi(., y)``: ``exp(i pi/4) / sqrt(8 pi k)``."""
    return np.exp(1j * np.pi / 4) / np.sqrt(8 * np.pi * k)


def _diff(x, y):
    D = x[:, None, :] - y[None, :, :]
    r = np.hypot(D[..., 0], D[..., 1])
    return D, r


def single_layer(k, x, y):
    _, r = _diff(x, y)
    return 0.25j * hankel0(k * r)


def single_layer_grad_x(k, x, y):
    D, r = _diff(x, y)
    return (-0.25j * k * hankel1(k * r) / r)[..., None] * D


def double_layer(k, x, y, ny):
    """``d Phi(x, y) / d nu(y)``."""
    D, r = _diff(x, y)
    return 0.25j * k * hankel1(k * r) * np.einsum("nmj,mj->nm", D, ny) / r


def double_layer_grad_x(k, x, y, ny):
    D, r = _diff(x, y)
    kr = k * r
    H0, H1 = hankel0(kr), hankel1(kr)
    proj = np.einsum("nmj,mj->nm", D, ny)
    g = H1 / r
    gp = k * H0 / r - 2 * H1 / r ** 2
    return 0.25j * k * (g[..., None] * ny[None, :, :] + (gp * proj / r)[..., None] * D)
