"""1-D input-state optimizations: inclination at fixed twisting, and twisting
at a fixed rotation rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import OptimizerError
from .mzi_core import ScriptQuantities
from .sensitivity import uncertainty_oat
from .spin_states import OatParams, initial_inclination, optimal_twisting

INCLINATION_BOUNDS = (-0.2, 0.2)
PARAM_TOL = 1e-7
VALUE_TOL = 1e-12
_PRESCAN = 21
_DENSE_PRESCAN = 201


@dataclass(frozen=True)
class OptResult:
    """Outcome of a bounded scalar minimization."""

    parameter: float
    n_dphi2: float
    iterations: int
    bracket: tuple
    converged: bool
    degraded: bool = False


def _minimize(fun, bounds, xatol, prefer):
    """Bounded minimization with a coarse unimodality check and dense fallback.

    ``prefer`` breaks plateau ties toward the design point (0 for inclination,
    chi_0 for twisting).
    """
    res = minimize_scalar(fun, bounds=bounds, method="bounded",
                          options={"xatol": xatol})
    if not res.success:
        raise OptimizerError(f"bounded minimization failed: {res.message}")
    x_best, f_best, nit = float(res.x), float(res.fun), int(res.nfev)
    degraded = False

    grid = np.linspace(bounds[0], bounds[1], _PRESCAN)
    vals = np.array([fun(x) for x in grid])
    if vals.min() < f_best - VALUE_TOL * max(1.0, abs(f_best)):
        # optimizer missed a better basin: dense pre-scan, then local refine
        degraded = True
        grid = np.linspace(bounds[0], bounds[1], _DENSE_PRESCAN)
        vals = np.array([fun(x) for x in grid])
        k = int(np.argmin(vals))
        lo = grid[max(0, k - 1)]
        hi = grid[min(len(grid) - 1, k + 1)]
        res = minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                              options={"xatol": xatol})
        if not res.success:
            raise OptimizerError(f"refinement after dense scan failed: {res.message}")
        x_best, f_best = float(res.x), float(res.fun)
        nit += int(res.nfev) + _DENSE_PRESCAN

    # plateau tie-breaking: among near-optimal candidates pick the one
    # closest to the preferred design point
    cand_x = np.append(grid, x_best)
    cand_f = np.append(vals, f_best)
    near = cand_f <= f_best + VALUE_TOL * max(1.0, abs(f_best))
    if np.count_nonzero(near) > 1:
        sel = cand_x[near]
        x_best = float(sel[np.argmin(np.abs(sel - prefer))])
        f_best = float(fun(x_best))
    return x_best, f_best, nit, degraded


def optimize_inclination(scripts: ScriptQuantities, N: int,
                         chi: float | None = None) -> OptResult:
    """Minimize the OAT phase uncertainty over the final inclination.

    Twisting is held at chi (default: the ideal-MZI optimum chi_0(N)); the
    rotation alpha realizing each trial inclination is alpha = theta - alpha_0.
    """
    if chi is None:
        chi = optimal_twisting(N)
    a0 = initial_inclination(chi, N)

    def fun(theta_inc):
        r = uncertainty_oat(scripts, OatParams(chi, theta_inc - a0), N)
        return r.n_dphi2

    x, f, nit, degraded = _minimize(fun, INCLINATION_BOUNDS, PARAM_TOL, prefer=0.0)
    return OptResult(parameter=x, n_dphi2=f, iterations=nit,
                     bracket=INCLINATION_BOUNDS, converged=True, degraded=degraded)


def optimize_twisting(scripts: ScriptQuantities, N: int,
                      chi0: float | None = None) -> OptResult:
    """Minimize the OAT phase uncertainty over the twisting strength.

    The rotation is fixed at alpha = -alpha_0(chi_0), the value that levels
    the chi_0 state, so the trial inclination is alpha_0(chi) - alpha_0(chi_0).
    """
    if chi0 is None:
        chi0 = optimal_twisting(N)
    alpha = -initial_inclination(chi0, N)
    bounds = (chi0 * 1e-3, 4.0 * chi0)

    def fun(chi):
        r = uncertainty_oat(scripts, OatParams(chi, alpha), N)
        return r.n_dphi2

    x, f, nit, degraded = _minimize(fun, bounds, PARAM_TOL * chi0, prefer=chi0)
    return OptResult(parameter=x, n_dphi2=f, iterations=nit,
                     bracket=bounds, converged=True, degraded=degraded)
