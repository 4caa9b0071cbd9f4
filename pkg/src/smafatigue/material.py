"""Superelastic shape-memory-alloy point model.

Rule-of-mixtures elasticity between the austenite and martensite phases,
pressure-sensitive (Drucker-Prager) transformation surfaces and a
strain-driven return mapping with linear kinetics: the transformation
surface value maps linearly onto the martensite fraction across the
[start, end] threshold band, separately for the forward (loading) and
reverse (unloading) branches.  Stresses are effective (undamaged);
damage degradation is applied outside, at the element level.

Units: MPa for stress and moduli, mm/mJ for lengths/energy densities,
Kelvin for temperature.  All tensors use the Mandel convention of
:mod:`smafatigue.voigt`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import voigt


class ConstitutiveError(RuntimeError):
    """Local return mapping failed to converge at a material point."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class MaterialParams:
    """Phase moduli, transformation thresholds and kinetic constants."""

    e_a: float          # austenite Young's modulus (MPa)
    e_m: float          # martensite Young's modulus (MPa)
    nu_a: float
    nu_m: float
    eps_l: float        # maximum equivalent transformation strain
    sig_ls: float       # start of transformation stress, loading (MPa)
    sig_lf: float       # end of transformation stress, loading (MPa)
    sig_us: float       # start of transformation stress, unloading (MPa)
    sig_uf: float       # end of transformation stress, unloading (MPa)
    m_s: float = 237.0  # martensite start/end, austenite start/end (K)
    m_f: float = 218.0
    a_s: float = 254.0
    a_f: float = 282.0
    t_ref: float = 320.0
    c_m: float = 5.5    # stress-temperature slope, loading (MPa/K)
    c_a: float = 5.5    # stress-temperature slope, unloading (MPa/K)
    phi_angle: float = 0.0   # flow-potential angle (rad)
    beta_angle: float = 0.0  # transformation-surface angle (rad)

    def __post_init__(self):
        if self.e_a <= 0.0 or self.e_m <= 0.0:
            raise ValueError("Young's moduli must be positive")
        for nu in (self.nu_a, self.nu_m):
            if not 0.0 < nu < 0.5:
                raise ValueError("Poisson's ratios must lie in (0, 0.5)")
        if self.eps_l <= 0.0:
            raise ValueError("maximum transformation strain must be positive")
        if not self.sig_lf > self.sig_ls > self.sig_us > self.sig_uf > 0.0:
            raise ValueError(
                "transformation thresholds must satisfy the superelastic "
                "ordering sig_lf > sig_ls > sig_us > sig_uf > 0"
            )


#: Reference nitinol calibration (C1).  C2 shrinks the hysteresis loop by
#: shifting the four thresholds (explicit values, not recomputed); C3 is the
#: reference material evaluated at 293 K.
REFERENCE_PARAMS = MaterialParams(
    e_a=41000.0, e_m=22000.0, nu_a=0.33, nu_m=0.33, eps_l=0.0335,
    sig_ls=456.5, sig_lf=563.8, sig_us=363.0, sig_uf=209.0,
)

_C2_PARAMS = replace(
    REFERENCE_PARAMS, sig_ls=410.85, sig_lf=507.38, sig_us=399.3, sig_uf=229.9,
)

#: name -> (parameters, test temperature in K)
MATERIAL_CASES = {
    "C1": (REFERENCE_PARAMS, 320.0),
    "C2": (_C2_PARAMS, 320.0),
    "C3": (REFERENCE_PARAMS, 293.0),
}


def material_case(name):
    """Return ``(MaterialParams, temperature)`` for preset C1, C2 or C3."""
    try:
        return MATERIAL_CASES[name]
    except KeyError:
        raise ValueError(f"unknown material case {name!r}") from None


def mixture_elastic(xi, params):
    """Rule-of-mixtures Young's modulus and Poisson's ratio at fraction xi."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < -1e-12) or np.any(xi > 1.0 + 1e-12):
        raise ValueError("martensite fraction outside [0, 1]")
    e_mod = params.e_a + xi * (params.e_m - params.e_a)
    nu = params.nu_a + xi * (params.nu_m - params.nu_a)
    return e_mod, nu


def thresholds_at_temperature(params, temperature):
    """Clausius-Clapeyron shift of the four thresholds to ``temperature``.

    Loading thresholds move with slope ``c_m``, unloading with ``c_a``;
    all are clamped below at 1 MPa.
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    dt = temperature - params.t_ref
    shift_l = params.c_m * dt
    shift_u = params.c_a * dt
    return (
        max(params.sig_ls + shift_l, 1.0),
        max(params.sig_lf + shift_l, 1.0),
        max(params.sig_us + shift_u, 1.0),
        max(params.sig_uf + shift_u, 1.0),
    )


def dp_value(sigma, angle):
    """Drucker-Prager surface value sqrt(3/2 s':s') + tr(s) tan(angle)/3."""
    return voigt.von_mises(sigma) + voigt.trace(sigma) * np.tan(angle) / 3.0


def flow_direction(sigma, phi_angle):
    """Transformation flow direction, the stress gradient of the potential.

    Returns sqrt(3/2) s'/|s'| + tan(phi)/3 I.  For a degenerate deviator
    (|s'| below 1e-10 of the stress scale) only the volumetric part is
    returned, so the direction never involves 0/0.
    """
    sigma = np.asarray(sigma, dtype=float)
    dev = voigt.deviator(sigma)
    dev_norm = voigt.norm(dev)
    scale = np.maximum(1.0, np.abs(voigt.trace(sigma)))
    ok = dev_norm > 1e-10 * scale
    safe = np.where(ok, dev_norm, 1.0)
    direction = np.sqrt(1.5) * dev / safe[..., None]
    direction = np.where(ok[..., None], direction, 0.0)
    return direction + (np.tan(phi_angle) / 3.0) * voigt.IDENTITY


def equivalent_transformation_strain(eps_t):
    """Equivalent transformation strain sqrt(2/3 e':e')."""
    return np.sqrt(2.0 / 3.0) * voigt.norm(voigt.deviator(eps_t))


@dataclass
class PointState:
    """History carried by one quadrature point between committed increments."""

    eps: np.ndarray = field(default_factory=lambda: np.zeros(6))
    eps_t: np.ndarray = field(default_factory=lambda: np.zeros(6))
    xi: float = 0.0
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(6))
    psi_e: float = 0.0
    psi_t: float = 0.0
    hist: float = 0.0
    abar: float = 0.0
    alpha: float = 0.0

    def copy(self):
        return PointState(
            eps=self.eps.copy(), eps_t=self.eps_t.copy(), xi=self.xi,
            sigma=self.sigma.copy(), psi_e=self.psi_e, psi_t=self.psi_t,
            hist=self.hist, abar=self.abar, alpha=self.alpha,
        )


class StateBatch:
    """Struct-of-arrays state over ``n`` quadrature points."""

    ARRAY6 = ("eps", "eps_t", "sigma")
    SCALARS = ("xi", "psi_e", "psi_t", "hist", "abar", "alpha")

    def __init__(self, n):
        self.n = n
        for name in self.ARRAY6:
            setattr(self, name, np.zeros((n, 6)))
        for name in self.SCALARS:
            setattr(self, name, np.zeros(n))

    def copy(self):
        out = StateBatch(self.n)
        for name in self.ARRAY6 + self.SCALARS:
            setattr(out, name, getattr(self, name).copy())
        return out

    def point(self, i):
        """Materialise a single-point view as a :class:`PointState`."""
        return PointState(
            eps=self.eps[i].copy(), eps_t=self.eps_t[i].copy(),
            xi=float(self.xi[i]), sigma=self.sigma[i].copy(),
            psi_e=float(self.psi_e[i]), psi_t=float(self.psi_t[i]),
            hist=float(self.hist[i]), abar=float(self.abar[i]),
            alpha=float(self.alpha[i]),
        )

    def set_point(self, i, state):
        self.eps[i] = state.eps
        self.eps_t[i] = state.eps_t
        self.xi[i] = state.xi
        self.sigma[i] = state.sigma
        self.psi_e[i] = state.psi_e
        self.psi_t[i] = state.psi_t
        self.hist[i] = state.hist
        self.abar[i] = state.abar
        self.alpha[i] = state.alpha

    @classmethod
    def from_points(cls, points):
        out = cls(len(points))
        for i, p in enumerate(points):
            out.set_point(i, p)
        return out


# activation slack above a converged consistency residual, in MPa
_ACTIVATION_TOL = 1.0e-6


def _flow_tangent(sigma):
    """d(flow direction)/d(sigma) for the deviatoric part (Mandel 6x6)."""
    dev = voigt.deviator(sigma)
    dev_norm = voigt.norm(dev)
    safe = np.maximum(dev_norm, 1e-30)
    outer = np.einsum("...i,...j->...ij", dev, dev)
    return np.sqrt(1.5) * (
        voigt.P_DEV / safe[..., None, None]
        - outer / safe[..., None, None] ** 3
    )


def update_state_batch(state, eps_new, temperature, params,
                       tol=1e-9, max_iters=50):
    """Strain-driven constitutive update over a batch of points.

    Parameters
    ----------
    state : StateBatch
        Committed states; not modified.
    eps_new : (n, 6) array
        Total strain at the end of the increment (Mandel).
    temperature : float
    params : MaterialParams

    Returns
    -------
    trial : dict
        Arrays ``eps, eps_t, xi, sigma, psi_e, psi_t`` for the new state
        plus the consistent tangent ``c6`` of shape (n, 6, 6).

    Notes
    -----
    Elastic predictor with mixture moduli; if the Drucker-Prager surface
    value leaves the active threshold band the martensite fraction is
    return-mapped so the surface value sits on the linear-kinetics line
    between the start and end thresholds.  Forward flow follows the
    stress gradient of the flow potential scaled by ``eps_l``; reverse
    flow recovers the stored transformation strain proportionally to
    ``xi`` (identical on proportional paths, and it keeps the equivalent
    transformation strain consistent with ``xi`` on any path).
    """
    eps_new = np.asarray(eps_new, dtype=float)
    n_pts = eps_new.shape[0]
    sig_ls, sig_lf, sig_us, sig_uf = thresholds_at_temperature(
        params, temperature)
    k_fwd = sig_lf - sig_ls
    k_rev = sig_us - sig_uf
    if k_fwd < 1e-9 or k_rev < 1e-9:
        raise ConstitutiveError("degenerate transformation threshold band")

    xi0 = state.xi
    epst0 = state.eps_t

    def stiffness(xi):
        e_mod, nu = mixture_elastic(xi, params)
        return voigt.elastic_matrix(e_mod, nu)

    # elastic predictor
    c_el = stiffness(xi0)
    sigma = voigt.apply_matrix(c_el, eps_new - epst0)
    f_trial = dp_value(sigma, params.beta_angle)

    fwd = (f_trial > sig_ls + k_fwd * xi0 + _ACTIVATION_TOL) & (xi0 < 1.0)
    dev_norm = voigt.norm(voigt.deviator(sigma))
    degenerate = dev_norm <= 1e-10 * np.maximum(
        1.0, np.abs(voigt.trace(sigma)))
    fwd &= ~degenerate
    rev = (f_trial < sig_uf + k_rev * xi0 - _ACTIVATION_TOL) & (xi0 > 0.0)

    dxi = np.zeros(n_pts)
    xi = xi0.copy()
    eps_t = epst0.copy()
    c_tan = c_el

    active = np.flatnonzero(fwd | rev)
    if active.size:
        dxi_a, eps_t_a, sigma_a, c_a, xi_a = _return_map(
            eps_new[active], epst0[active], xi0[active], fwd[active],
            params, (sig_ls, k_fwd, sig_uf, k_rev), tol, max_iters, state,
            active,
        )
        dxi[active] = dxi_a
        xi = xi0 + dxi
        eps_t = epst0.copy()
        eps_t[active] = eps_t_a
        sigma = sigma.copy()
        sigma[active] = sigma_a
        c_tan = np.array(c_el)
        c_tan[active] = c_a

    eps_e = eps_new - eps_t
    psi_e = 0.5 * voigt.ddot(sigma, eps_e)
    psi_t = state.psi_t + voigt.ddot(sigma, eps_t - epst0)

    return {
        "eps": eps_new, "eps_t": eps_t, "xi": xi, "sigma": sigma,
        "psi_e": psi_e, "psi_t": psi_t, "c6": c_tan,
    }


def _return_map(eps, epst0, xi0, is_fwd, params, bands, tol, max_iters,
                state, active_idx):
    """Safeguarded Newton on the scalar consistency condition per point."""
    sig_ls, k_fwd, sig_uf, k_rev = bands
    n_act = eps.shape[0]
    eps_l = params.eps_l
    tan_phi = np.tan(params.phi_angle)

    # threshold line tau(xi) = base + slope*xi, per point
    base = np.where(is_fwd, sig_ls, sig_uf)
    slope = np.where(is_fwd, k_fwd, k_rev)

    # reverse flow direction: proportional recovery of the stored strain
    n_rev = np.zeros((n_act, 6))
    has_xi = xi0 > 0.0
    n_rev[has_xi] = epst0[has_xi] / (xi0[has_xi, None] * eps_l)

    def stiffness(xi):
        e_mod, nu = mixture_elastic(np.clip(xi, 0.0, 1.0), params)
        return voigt.elastic_matrix(e_mod, nu)

    def dstiffness(xi):
        return voigt.elastic_matrix_derivative(
            params.e_a, params.e_m, params.nu_a, params.nu_m,
            np.clip(xi, 0.0, 1.0))

    def evaluate(dxi, n_dir):
        xi = xi0 + dxi
        c_el = stiffness(xi)
        eps_t = np.where(
            is_fwd[:, None], epst0 + (dxi * eps_l)[:, None] * n_dir,
            epst0 + dxi[:, None] * eps_l * n_rev,
        )
        sigma = voigt.apply_matrix(c_el, eps - eps_t)
        f_val = dp_value(sigma, params.beta_angle)
        res = f_val - (base + slope * xi)
        return sigma, eps_t, res, c_el

    # brackets: forward dxi in [0, 1-xi0], reverse in [-xi0, 0]
    lim = np.where(is_fwd, 1.0 - xi0, -xi0)
    sigma_tr = voigt.apply_matrix(stiffness(xi0), eps - epst0)
    n_dir = flow_direction(sigma_tr, params.phi_angle)

    # Saturation vs fold detection at the band end.  The surface value is
    # sign-blind, so an elastic overshoot into the opposite stress quadrant
    # also raises it; genuine saturation requires the deviator to stay
    # aligned with the flow direction.
    sigma_lim, _, res_lim, _ = evaluate(lim, n_dir)
    aligned = voigt.ddot(voigt.deviator(sigma_lim),
                         voigt.deviator(sigma_tr)) > 0.0
    saturated = np.where(is_fwd, (res_lim >= 0.0) & aligned,
                         res_lim <= 0.0)

    # bracket [lo, hi] with res(lo) > 0 > res(hi); res decreases across it
    lo = np.where(is_fwd, 0.0, lim)
    hi = np.where(is_fwd, lim, 0.0)
    # forward folded case: walk hi down until the residual goes negative,
    # which isolates the first (physical) crossing
    need_scan = is_fwd & ~saturated & (res_lim >= 0.0)
    for _ in range(80):
        if not need_scan.any():
            break
        hi = np.where(need_scan, 0.5 * hi, hi)
        _, _, res_hi, _ = evaluate(np.where(need_scan, hi, lo), n_dir)
        need_scan &= res_hi >= 0.0
    if need_scan.any():
        first = int(active_idx[np.flatnonzero(need_scan)[0]])
        raise ConstitutiveError(
            f"could not bracket the consistency root at point {first}",
            state=state.point(first))

    # start at the committed fraction: the root of a small increment is
    # nearby and the path from here stays on the physical branch
    dxi = np.zeros(n_act)
    converged = saturated.copy()
    dxi[saturated] = lim[saturated]

    for _ in range(max_iters):
        if converged.all():
            break
        sigma, eps_t, res, c_el = evaluate(dxi, n_dir)
        scale = np.maximum(1.0, np.abs(base + slope * (xi0 + dxi)))
        newly = ~converged & (np.abs(res) <= tol * scale)
        converged |= newly
        work = ~converged
        if not work.any():
            break

        # Newton derivative dres/ddxi via the linearised update
        m_dir = flow_direction(sigma, params.beta_angle)
        eps_e = eps - eps_t
        c_prime = dstiffness(xi0 + dxi)
        rhs = voigt.apply_matrix(c_prime, eps_e) - eps_l * np.where(
            is_fwd[:, None],
            voigt.apply_matrix(c_el, n_dir),
            voigt.apply_matrix(c_el, n_rev),
        )
        d_flow = _flow_tangent(sigma)
        a_mat = voigt.I6 + (dxi * eps_l)[:, None, None] * np.where(
            is_fwd[:, None, None],
            np.einsum("...ij,...jk->...ik", c_el, d_flow),
            0.0,
        )
        dsig = np.linalg.solve(a_mat, rhs[..., None])[..., 0]
        dres = voigt.ddot(m_dir, dsig) - slope

        # bracket update from the residual sign
        lo = np.where(work & (res > 0.0), dxi, lo)
        hi = np.where(work & (res <= 0.0), dxi, hi)

        step = np.where(np.abs(dres) > 1e-30, -res / dres, 0.0)
        cand = dxi + step
        low = np.minimum(lo, hi)
        high = np.maximum(lo, hi)
        bad = (cand < low) | (cand > high) | ~np.isfinite(cand)
        cand = np.where(bad, 0.5 * (low + high), cand)
        dxi = np.where(work, cand, dxi)
        # refresh the lagged flow direction only from stresses that are
        # still deviator-aligned with the trial state; folded iterates
        # would flip the direction and derail the iteration
        aligned_iter = voigt.ddot(voigt.deviator(sigma),
                                  voigt.deviator(sigma_tr)) > 0.0
        refresh = ~converged & aligned_iter
        n_dir = np.where(refresh[:, None],
                         flow_direction(sigma, params.phi_angle), n_dir)

    if not converged.all():
        first = int(active_idx[np.flatnonzero(~converged)[0]])
        raise ConstitutiveError(
            f"return mapping did not converge at point {first}",
            state=state.point(first),
        )

    sigma, eps_t, res, c_el = evaluate(dxi, n_dir)
    xi_new = np.clip(xi0 + dxi, 0.0, 1.0)
    # snap exact endpoints
    full_rev = ~is_fwd & (np.abs(xi_new) < 1e-14)
    eps_t[full_rev] = 0.0

    c_tan = _consistent_tangent(
        eps - eps_t, sigma, c_el, dstiffness(xi0 + dxi), n_dir, n_rev,
        is_fwd, slope, dxi, eps_l, params, saturated)
    return dxi, eps_t, sigma, c_tan, xi_new


def _consistent_tangent(eps_e, sigma, c_el, c_prime, n_dir, n_rev, is_fwd,
                        slope, dxi, eps_l, params, saturated):
    """Algorithmically consistent tangent for actively transforming points."""
    m_dir = flow_direction(sigma, params.beta_angle)
    n_eff = np.where(is_fwd[:, None], n_dir, n_rev)
    rhs = voigt.apply_matrix(c_prime, eps_e) - eps_l * voigt.apply_matrix(
        c_el, n_eff)
    d_flow = _flow_tangent(sigma)
    a_mat = voigt.I6 + (dxi * eps_l)[:, None, None] * np.where(
        is_fwd[:, None, None],
        np.einsum("...ij,...jk->...ik", c_el, d_flow), 0.0)
    a_inv_c = np.linalg.solve(a_mat, c_el)
    a_inv_rhs = np.linalg.solve(a_mat, rhs[..., None])[..., 0]
    denom = slope - voigt.ddot(m_dir, a_inv_rhs)
    row = np.einsum("...i,...ij->...j", m_dir, a_inv_c)
    c_tan = a_inv_c + np.einsum(
        "...i,...j->...ij", a_inv_rhs, row) / denom[..., None, None]
    # saturated points carry the elastic stiffness of the end phase
    if saturated.any():
        c_tan[saturated] = c_el[saturated]
    return c_tan


def update_state(state, deps, temperature, params, tol=1e-9, max_iters=50):
    """Single-point strain-driven update.

    Returns ``(new_state, sigma, c6)`` where ``new_state`` carries the
    updated strain, transformation strain, fraction, stress and energy
    densities; the history/fatigue fields are copied unchanged (they are
    advanced at commit time by the phase-field bookkeeping).
    """
    batch = StateBatch.from_points([state])
    eps_new = (state.eps + np.asarray(deps, dtype=float))[None, :]
    trial = update_state_batch(batch, eps_new, temperature, params,
                               tol=tol, max_iters=max_iters)
    new = PointState(
        eps=trial["eps"][0], eps_t=trial["eps_t"][0],
        xi=float(trial["xi"][0]), sigma=trial["sigma"][0],
        psi_e=float(trial["psi_e"][0]), psi_t=float(trial["psi_t"][0]),
        hist=state.hist, abar=state.abar, alpha=state.alpha,
    )
    return new, trial["sigma"][0], trial["c6"][0]


# ---------------------------------------------------------------------------
# Stress-controlled lateral relaxation drivers (test/scenario oracles)
# ---------------------------------------------------------------------------

def uniaxial_stress_response(params, temperature, eps_axial,
                             lateral_tol=1e-9, max_iters=60):
    """Strain-driven uniaxial-stress loop: axial strain prescribed,
    lateral strains relaxed so the lateral stress vanishes.

    Returns a dict of per-step arrays: ``stress`` (axial), ``xi``,
    ``eps_t_axial``, ``psi_e``, ``psi_t``, ``lateral``.
    """
    state = PointState()
    lat = 0.0
    out = {k: [] for k in
           ("stress", "xi", "eps_t_axial", "psi_e", "psi_t", "lateral")}
    for eps11 in np.asarray(eps_axial, dtype=float):
        for _ in range(max_iters):
            eps6 = voigt.from_components(eps11, lat, lat, 0.0, 0.0, 0.0)
            new, sigma, c6 = update_state(
                state, eps6 - state.eps, temperature, params)
            s_lat = sigma[1]
            if abs(s_lat) <= lateral_tol * max(1.0, abs(sigma[0])):
                break
            dlat = c6[1, 1] + c6[1, 2]
            lat -= s_lat / dlat
        else:
            raise ConstitutiveError("lateral relaxation did not converge",
                                    state=state)
        state = new
        out["stress"].append(sigma[0])
        out["xi"].append(new.xi)
        out["eps_t_axial"].append(new.eps_t[0])
        out["psi_e"].append(new.psi_e)
        out["psi_t"].append(new.psi_t)
        out["lateral"].append(lat)
    return {k: np.asarray(v) for k, v in out.items()}


def plane_strain_response(params, temperature, eps_yy,
                          lateral_tol=1e-9, max_iters=60):
    """Plane-strain column with a traction-free lateral face.

    The vertical strain is prescribed, ``eps_zz = 0`` and ``eps_xx`` is
    relaxed so ``sigma_xx = 0`` -- exactly the state of the single-element
    scenario.  Returns per-step arrays including the full Mandel stress.
    """
    state = PointState()
    lat = 0.0
    out = {k: [] for k in ("sigma", "xi", "psi_e", "psi_t", "lateral")}
    states = []
    for eyy in np.asarray(eps_yy, dtype=float):
        for _ in range(max_iters):
            eps6 = voigt.from_components(lat, eyy, 0.0, 0.0, 0.0, 0.0)
            new, sigma, c6 = update_state(
                state, eps6 - state.eps, temperature, params)
            if abs(sigma[0]) <= lateral_tol * max(1.0, abs(sigma[1])):
                break
            lat -= sigma[0] / c6[0, 0]
        else:
            raise ConstitutiveError("lateral relaxation did not converge",
                                    state=state)
        state = new
        out["sigma"].append(sigma.copy())
        out["xi"].append(new.xi)
        out["psi_e"].append(new.psi_e)
        out["psi_t"].append(new.psi_t)
        out["lateral"].append(lat)
        states.append(new)
    result = {k: np.asarray(v) for k, v in out.items()}
    result["states"] = states
    return result
