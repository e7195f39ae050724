"""Independent checks of a constructed eigenvalue.

A shooting (Evans-type) matching function locates eigenvalues of a single
angular mode with an asymptotically periodic potential; root tracking under
small perturbations is compared with the first-order (Hellmann-Feynman)
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ConsistencyError, NumericError, RegimeError, TrackingError
from .floquet import EDGE_TOL, monodromy_entries
from .ode import Trajectory, chain_product, propagate, stage_grid, step_matrices
from .potentials import AsymptoticPotential, LocalizedPerturbation, make_mode_coefficient

Z_MATCH = 15.0
ROOT_XTOL = 1e-10


@dataclass(frozen=True)
class MatchingFunction:
    lambda_grid: np.ndarray
    iota_values: np.ndarray
    roots: list
    Z_match: float
    window: tuple

    def to_json(self) -> dict:
        return {"roots": list(self.roots), "window": list(self.window), "Z_match": self.Z_match}


def _tail_vectors(m, tail, lams, h):
    """Start vectors (value 1) of the -inf and +inf decaying tail solutions."""
    coeff = make_mode_coefficient(m, tail, 0.0)
    m00, m01, m10, m11 = monodromy_entries(coeff, lams, h=min(h, 1e-3 * tail.period))
    gamma = 0.5 * (m00 + m11)
    if np.any(np.abs(gamma) - 1.0 <= EDGE_TOL):
        bad = np.asarray(lams)[np.abs(gamma) - 1.0 <= EDGE_TOL]
        raise RegimeError(f"lambda={float(bad[0])!r} is not in a gap of mode {m} of the tail")
    root = np.sqrt(gamma * gamma - 1.0)
    rho_big = gamma + np.copysign(root, gamma)
    vecs = []
    for rho in (rho_big, 1.0 / rho_big):
        c1 = np.stack([m01, rho - m00])
        c2 = np.stack([rho - m11, m10])
        use1 = np.hypot(*c1) >= np.hypot(*c2)
        x = np.where(use1, c1, c2)
        norm = np.hypot(*x)
        scale = np.where(np.abs(x[0]) > 1e-12 * norm, x[0], norm)
        vecs.append(x / scale)
    return vecs[0], vecs[1]


class _Shooter:
    """Shooting data for one (potential, mode) pair, reusable across lambda."""

    def __init__(self, potential, tail, m, Z_match, h):
        self.potential, self.tail, self.m, self.h = potential, tail, int(m), h
        p = tail.period
        self.Z = p * max(1, math.floor(Z_match / p + 1e-9))
        coeff = make_mode_coefficient(m, potential, 0.0)
        self.coeff = coeff
        self.sides = []
        for z0 in (-self.Z, self.Z):
            s_stage, h_eff, sign, _ = stage_grid(z0, 0.0, h)
            self.sides.append((coeff.base(sign * s_stage), h_eff, sign))

    def _transfer(self, side, lams):
        base, h_eff, sign = self.sides[side]
        q = base - np.asarray(lams)[:, None, None]
        t00, t01, t10, t11 = chain_product(step_matrices(q, h_eff))
        if sign < 0:
            t01, t10 = -t01, -t10
        return t00, t01, t10, t11

    def states(self, lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        x_minus_inf, x_plus_inf = _tail_vectors(self.m, self.tail, lams, self.h)
        out = []
        for side, x in ((0, x_minus_inf), (1, x_plus_inf)):
            t = self._transfer(side, lams)
            out.append((t[0] * x[0] + t[1] * x[1], t[2] * x[0] + t[3] * x[1]))
        return out

    def iota(self, lams):
        (u, up), (w, wp) = self.states(lams)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w))):
            raise NumericError("shooting solution overflowed")
        return (u * wp - up * w) / (np.hypot(u, up) * np.hypot(w, wp))


def _refine(f, a, fa, b, xtol):
    for _ in range(200):
        if b - a < xtol:
            return 0.5 * (a + b)
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    raise NumericError("root bisection did not converge")


def matching_function(potential, tail, m: int, lambda_window, n: int = 101,
                      Z_match: float = Z_MATCH, h: float = 2e-3,
                      xtol: float = ROOT_XTOL) -> MatchingFunction:
    """Wronskian mismatch at z = 0 of the two decaying shooting solutions.

    The shooting start is snapped down to a whole number of tail periods so
    the tail Floquet eigenvectors give the exact start data.  The Wronskian
    is divided by the norms of both states at 0, which keeps it O(1) and
    free of poles.
    """
    a, b = lambda_window
    lams = np.linspace(a, b, n)
    shooter = _Shooter(potential, tail, m, Z_match, h)
    vals = shooter.iota(lams)
    scale = float(np.max(np.abs(vals)))

    def f(lam):
        return float(shooter.iota([lam])[0])

    roots = []
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0):
        if vals[i] == 0.0:
            r = float(lams[i])
        elif vals[i + 1] == 0.0:
            continue
        else:
            r = _refine(f, lams[i], vals[i], lams[i + 1], xtol)
        if abs(f(r)) <= 1e-8 * scale:
            roots.append(float(r))
    return MatchingFunction(lams, vals, roots, shooter.Z, (float(a), float(b)))


def glued_eigenfunction(potential, tail, m: int, lam: float, Z_match: float = Z_MATCH,
                        h: float = 2e-3) -> Trajectory:
    """Join the two shooting solutions at z = 0, scaled to agree in value
    there and normalised to sup |v| = 1."""
    shooter = _Shooter(potential, tail, m, Z_match, h)
    x_left, x_right = _tail_vectors(m, tail, np.array([lam]), h)
    coeff = make_mode_coefficient(m, potential, lam)
    left = propagate(coeff, -shooter.Z, 0.0, x_left[:, 0], h, cross_check=False)
    right = propagate(coeff, shooter.Z, 0.0, x_right[:, 0], h, cross_check=False)
    s = left.v[-1] / right.v[0]
    v = np.concatenate([left.v, s * right.v[1:]])
    vp = np.concatenate([left.v_prime, s * right.v_prime[1:]])
    # the slopes differ by the root tolerance; split the kink evenly
    vp[left.v.size - 1] = 0.5 * (left.v_prime[-1] + s * right.v_prime[0])
    k = 1.0 / np.max(np.abs(v))
    return Trajectory(
        np.concatenate([left.z_grid, right.z_grid[1:]]),
        k * v,
        k * vp,
        np.concatenate([left.q, right.q[1:]]),
        left.h,
    )


def construction_potential(base) -> AsymptoticPotential:
    return AsymptoticPotential(base.z_grid, base.A0, base.potential)


def track_eigenvalue(base, B, epsilons, half_width: float = 0.02, n: int = 21,
                     Z_match: float = Z_MATCH, h: float | None = None,
                     xtol: float = 1e-12):
    """Follow the eigenvalue of A0 + eps*B by continuation over ``epsilons``.

    Returns ``[(eps, lam_or_None)]``; None means no root in the search
    window (the eigenvalue disappeared).  A window reaching into a band of
    the tail raises :class:`TrackingError`.
    """
    h = base.h if h is None else h
    a0 = construction_potential(base)
    center = base.lambda0
    out = []
    for eps in epsilons:
        pot = a0.perturbed(eps, B) if eps else a0
        try:
            mf = matching_function(pot, base.potential, base.m,
                                   (center - half_width, center + half_width), n, Z_match, h, xtol)
        except RegimeError as exc:
            raise TrackingError(f"eps={eps}: eigenvalue search crossed a threshold ({exc})",
                                epsilon=eps) from exc
        if mf.roots:
            lam = min(mf.roots, key=lambda r: abs(r - center))
            out.append((eps, lam))
            center = lam
        else:
            out.append((eps, None))
    return out


@dataclass(frozen=True)
class PerturbationCheck:
    perturbation: LocalizedPerturbation
    derivative_formula: float
    derivative_tracked: float
    epsilon_used: float
    relative_discrepancy: float
    # the same integral under the opposite sign convention
    derivative_formula_negated: float
    sign_agrees: bool


def first_order_integral(base, B) -> float:
    """int 2 (m + A0) B v*^2 dz with v* normalised in L2 on the window."""
    z, v = base.z_grid, base.v_star
    norm = simpson(v * v, x=z)
    return float(simpson(2.0 * (base.m + base.A0) * B(z) * v * v, x=z) / norm)


def hellmann_feynman(base, B, epsilon: float = 1e-4, Z_match: float = Z_MATCH,
                     rtol: float = 1e-2) -> PerturbationCheck:
    formula = first_order_integral(base, B)
    # both signs searched from the same window so that equal potentials give equal roots
    (_, lam_m), (_, lam_p) = (
        track_eigenvalue(base, B, [eps], half_width=2e-3, n=9, Z_match=Z_match)[0]
        for eps in (-epsilon, epsilon)
    )
    if lam_m is None or lam_p is None:
        raise ConsistencyError("eigenvalue lost under an infinitesimal perturbation")
    tracked = (lam_p - lam_m) / (2 * epsilon)
    if tracked == 0.0 and formula == 0.0:
        disc = 0.0
    else:
        disc = abs(formula - tracked) / max(abs(tracked), abs(formula))
    check = PerturbationCheck(B, formula, tracked, epsilon, disc, -formula,
                              bool(np.sign(formula) == np.sign(tracked)))
    if disc > rtol:
        raise ConsistencyError(
            f"first-order formula {formula:.8g} vs tracked {tracked:.8g} (relative {disc:.3g})"
        )
    return check
