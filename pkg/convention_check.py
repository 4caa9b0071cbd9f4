"""Throwaway: decide the loading-range convention for the single-element
fatigue scenario by reproducing the headline N_f values with a reduced
model (plane-strain point + homogeneous AT2 phase field), which is exactly
what the single-element FEM computes."""
import sys
import numpy as np
from smafatigue import material as M
from smafatigue import phasefield as P
from smafatigue import voigt as V

cfg = P.PhaseFieldConfig(variant="AT2", gc=22.5, ell=0.145)
eps_c = P.critical_stress_strain("AT2", 22000.0, cfg)[1]
G_over_l = cfg.gc / cfg.ell
print("eps_c =", eps_c, "alpha_T =", cfg.alpha_t)


def run(case, delta, R=0.1, ipc=20, max_cycles=40000, phi_fail=0.95):
    params, T = M.material_case(case)
    state = M.PointState()
    lat = 0.0
    H = 0.0
    abar = 0.0
    alpha_prev = 0.0
    phi = 0.0
    mean = delta / 2.0 + R * delta / (1.0 - R)
    n_steps = max_cycles * ipc
    for k in range(1, n_steps + 1):
        t = k / ipc  # f = 1
        eyy = mean + 0.5 * delta * np.sin(2 * np.pi * t)
        # plane-strain lateral relaxation (sigma_xx = 0)
        for _ in range(40):
            eps6 = V.from_components(lat, eyy, 0.0, 0.0, 0.0, 0.0)
            new, sigma, c6 = M.update_state(state, eps6 - state.eps, T, params)
            if abs(sigma[0]) <= 1e-9 * max(1.0, abs(sigma[1])):
                break
            lat -= sigma[0] / c6[0, 0]
        state = new
        psi = state.psi_e + state.psi_t
        # monolithic phi solve with frozen H, f  (AT2 homogeneous)
        f = P.fatigue_degradation(abar, cfg.alpha_t)
        phi = 2.0 * H / (f * G_over_l + 2.0 * H) if H > 0 else 0.0
        phi = min(max(phi, 0.0), 1.0)
        # commit
        H = max(H, psi)
        alpha = (1.0 - phi) ** 2 * psi
        abar += max(alpha - alpha_prev, 0.0)
        alpha_prev = alpha
        if phi >= phi_fail:
            return (k + ipc - 1) // ipc
    return None  # runout


ratio = 0.4
for conv, fac in (("literal", 1.0), ("half", 0.5)):
    print(f"--- convention {conv}: delta = {ratio}*eps_c*{fac}")
    for case in ("C1", "C2", "C3"):
        delta = ratio * eps_c * fac
        nf = run(case, delta, max_cycles=40000 if case == "C1" else 20000)
        print(f"  {case}: N_f = {nf}")
        sys.stdout.flush()
