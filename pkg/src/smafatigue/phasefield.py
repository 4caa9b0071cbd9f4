"""Crack-density functions, degradation, fatigue bookkeeping and the
history field for the AT1 and AT2 damage variants.

Scalar, side-effect-free functions; everything broadcasts over numpy
arrays.  The fatigue threshold is always recomputed from the toughness
and the length scale, never cached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VARIANTS = ("AT1", "AT2")


@dataclass(frozen=True)
class PhaseFieldConfig:
    variant: str = "AT2"
    gc: float = 22.5       # toughness, N/mm (== kJ/m^2)
    ell: float = 0.145     # regularisation length, mm
    kappa: float = 1e-7    # residual stiffness

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown phase-field variant {self.variant!r}")
        if self.gc <= 0.0 or self.ell <= 0.0:
            raise ValueError("gc and ell must be positive")
        if not 0.0 < self.kappa < 1e-2:
            raise ValueError("kappa must be a small positive constant")

    @property
    def c_w(self):
        """Crack-density normalisation: 2/3 for AT1, 1/2 for AT2."""
        return 2.0 / 3.0 if self.variant == "AT1" else 0.5

    @property
    def alpha_t(self):
        """Fatigue threshold gc / (12 ell), recomputed on access."""
        return self.gc / (12.0 * self.ell)

    @property
    def at1_floor(self):
        """History-field floor 3 gc / (16 ell) keeping AT1 damage at zero
        below the elastic limit."""
        return 3.0 * self.gc / (16.0 * self.ell)


def crack_density(variant, phi):
    """Return ``(w, w', w'')`` of the geometric crack function.

    AT1: w = phi (linear, finite damage threshold).  AT2: w = phi**2.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < -1e-12) or np.any(phi > 1.0 + 1e-12):
        raise ValueError("phase field outside [0, 1]")
    if variant == "AT1":
        return phi, np.ones_like(phi), np.zeros_like(phi)
    if variant == "AT2":
        return phi**2, 2.0 * phi, np.full_like(phi, 2.0)
    raise ValueError(f"unknown phase-field variant {variant!r}")


def degradation(phi, kappa):
    """Stiffness degradation (1 - phi)^2 + kappa."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < -1e-12) or np.any(phi > 1.0 + 1e-12):
        raise ValueError("phase field outside [0, 1]")
    return (1.0 - phi) ** 2 + kappa


def critical_stress_strain(variant, e_mod, cfg):
    """Closed-form homogeneous strength and critical strain.

    AT1: sigma_c = sqrt(3 E Gc / 8 ell),   eps_c = sqrt(3 Gc / 8 ell E)
    AT2: sigma_c = sqrt(27 E Gc / 256 ell), eps_c = sqrt(Gc / 3 ell E)
    """
    if e_mod <= 0.0:
        raise ValueError("Young's modulus must be positive")
    gc, ell = cfg.gc, cfg.ell
    if variant == "AT1":
        return (np.sqrt(3.0 * e_mod * gc / (8.0 * ell)),
                np.sqrt(3.0 * gc / (8.0 * ell * e_mod)))
    if variant == "AT2":
        return (np.sqrt(27.0 * e_mod * gc / (256.0 * ell)),
                np.sqrt(gc / (3.0 * ell * e_mod)))
    raise ValueError(f"unknown phase-field variant {variant!r}")


def fatigue_degradation(abar, alpha_t):
    """Asymptotic toughness knock-down: 1 below the threshold, then
    (2 a_T / (abar + a_T))^2."""
    abar = np.asarray(abar, dtype=float)
    below = abar <= alpha_t
    safe = np.where(below, 1.0, abar + alpha_t)
    return np.where(below, 1.0, (2.0 * alpha_t / safe) ** 2)


def accumulate_fatigue(abar_n, alpha_n, alpha_new):
    """Advance the cumulative fatigue variable by the rising part of the
    driving variable (Heaviside-gated path integral, discretised)."""
    return abar_n + np.maximum(np.asarray(alpha_new) - np.asarray(alpha_n),
                               0.0)


def update_history(hist_n, psi, variant, cfg):
    """Irreversible history field max(H, psi), with the AT1 floor."""
    hist = np.maximum(hist_n, psi)
    if variant == "AT1":
        hist = np.maximum(hist, cfg.at1_floor)
    return hist
