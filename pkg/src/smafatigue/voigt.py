"""Symmetric second-order tensor algebra on length-6 component arrays.

Tensors are stored in Mandel form, component order
``(xx, yy, zz, xy, yz, zx)`` with the three shear components scaled by
sqrt(2).  In this basis the double contraction ``a : b`` is the plain dot
product of the component vectors and fourth-order (minor-symmetric)
tensors act as ordinary 6x6 matrices, which keeps all the constitutive
algebra free of bookkeeping weights.  Every function below accepts
batched input of shape ``(..., 6)``.

Conversions to/from the engineering 2-D Voigt convention used by the
finite elements (strain ``(e_xx, e_yy, gamma_xy)``, stress
``(s_xx, s_yy, s_xy)``, plane strain) live at the bottom of the module.
"""

from __future__ import annotations

import numpy as np

SQRT2 = np.sqrt(2.0)

#: second-order identity tensor
IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

#: fourth-order symmetric identity (unit matrix in Mandel form)
I6 = np.eye(6)

#: deviatoric projector
P_DEV = I6 - np.outer(IDENTITY, IDENTITY) / 3.0


def from_components(xx, yy, zz, xy, yz, zx):
    """Build a Mandel vector from true (tensor) components."""
    return np.stack(
        np.broadcast_arrays(
            xx, yy, zz, SQRT2 * np.asarray(xy), SQRT2 * np.asarray(yz),
            SQRT2 * np.asarray(zx),
        ),
        axis=-1,
    ).astype(float)


def to_components(a):
    """Return true tensor components ``(xx, yy, zz, xy, yz, zx)``."""
    a = np.asarray(a, dtype=float)
    out = a.copy()
    out[..., 3:] /= SQRT2
    return out


def trace(a):
    return np.asarray(a)[..., :3].sum(axis=-1)


def deviator(a):
    a = np.asarray(a, dtype=float)
    dev = a.copy()
    dev[..., :3] -= trace(a)[..., None] / 3.0
    return dev


def ddot(a, b):
    """Double contraction ``a : b`` (plain dot product in this basis)."""
    return (np.asarray(a) * np.asarray(b)).sum(axis=-1)


def norm(a):
    """Tensor norm ``sqrt(a : a)``."""
    return np.sqrt(ddot(a, a))


def von_mises(sigma):
    """Equivalent stress ``sqrt(3/2 s' : s')``."""
    return np.sqrt(1.5) * norm(deviator(sigma))


def elastic_matrix(e_mod, nu):
    """Isotropic stiffness as a 6x6 Mandel matrix, batched over moduli.

    ``e_mod`` and ``nu`` broadcast; the result has shape ``(..., 6, 6)``.
    """
    e_mod = np.asarray(e_mod, dtype=float)
    nu = np.asarray(nu, dtype=float)
    lam = e_mod * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = e_mod / (2.0 * (1.0 + nu))
    eye = np.outer(IDENTITY, IDENTITY)
    return lam[..., None, None] * eye + 2.0 * mu[..., None, None] * I6


def elastic_matrix_derivative(e_a, e_m, nu_a, nu_m, xi):
    """d(elastic matrix)/d(xi) for rule-of-mixtures moduli."""
    xi = np.asarray(xi, dtype=float)
    e_mod = e_a + xi * (e_m - e_a)
    nu = nu_a + xi * (nu_m - nu_a)
    de = e_m - e_a
    dnu = nu_m - nu_a
    denom = (1.0 + nu) * (1.0 - 2.0 * nu)
    lam = e_mod * nu / denom
    dlam = (de * nu + e_mod * dnu) / denom - lam * dnu * (
        (1.0 - 2.0 * nu) - 2.0 * (1.0 + nu)
    ) / denom
    dmu = de / (2.0 * (1.0 + nu)) - e_mod * dnu / (2.0 * (1.0 + nu) ** 2)
    eye = np.outer(IDENTITY, IDENTITY)
    return dlam[..., None, None] * eye + 2.0 * dmu[..., None, None] * I6


def apply_matrix(c, a):
    """Contract a (...,6,6) matrix with a (...,6) tensor."""
    return np.einsum("...ij,...j->...i", c, a)


# ---------------------------------------------------------------------------
# Engineering 2-D Voigt (plane strain) conversions
# ---------------------------------------------------------------------------

def strain_from_eng2d(eps_eng):
    """Plane-strain engineering strain ``(e_xx, e_yy, gamma_xy)`` -> Mandel."""
    eps_eng = np.asarray(eps_eng, dtype=float)
    out = np.zeros(eps_eng.shape[:-1] + (6,))
    out[..., 0] = eps_eng[..., 0]
    out[..., 1] = eps_eng[..., 1]
    # e_zz = 0 in plane strain; xy Mandel component is sqrt(2)*e_xy = gamma/sqrt(2)
    out[..., 3] = eps_eng[..., 2] / SQRT2
    return out


def stress_to_eng2d(sigma):
    """Mandel stress -> in-plane engineering components ``(s_xx, s_yy, s_xy)``."""
    sigma = np.asarray(sigma, dtype=float)
    out = np.empty(sigma.shape[:-1] + (3,))
    out[..., 0] = sigma[..., 0]
    out[..., 1] = sigma[..., 1]
    out[..., 2] = sigma[..., 3] / SQRT2
    return out


def tangent_to_eng2d(c6):
    """Condense a (...,6,6) Mandel tangent to the plane-strain 3x3 form.

    Rows map stresses (plain components), columns map engineering strains
    (gamma = 2 e_xy), so the xy row/column pick up 1/sqrt(2) factors.
    """
    c6 = np.asarray(c6, dtype=float)
    idx = [0, 1, 3]
    c = c6[..., idx, :][..., :, idx].copy()
    c[..., 2, :] /= SQRT2
    c[..., :, 2] /= SQRT2
    return c
