"""Monodromy matrix, discriminant, Floquet multipliers and decaying solutions."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, NoDecayingSolutionError, PositivityError
from .ode import Trajectory, propagate, transfer_matrix

DET_TOL = 1e-9
EDGE_TOL = 1e-8


class Regime(str, enum.Enum):
    BAND = "band"
    EDGE = "edge"
    GAP = "gap"


class Direction(str, enum.Enum):
    DECAYS_AT_PLUS_INF = "decays_at_plus_inf"
    DECAYS_AT_MINUS_INF = "decays_at_minus_inf"


@dataclass(frozen=True)
class Monodromy:
    phi1_p: float
    phi2_p: float
    phi1p_p: float
    phi2p_p: float
    period_used: float

    @property
    def det(self) -> float:
        return self.phi1_p * self.phi2p_p - self.phi2_p * self.phi1p_p

    @property
    def det_scale(self) -> float:
        """Magnitude of the products entering det; sets its rounding floor."""
        return max(1.0, abs(self.phi1_p * self.phi2p_p) + abs(self.phi2_p * self.phi1p_p))

    def det_ok(self, tol: float = None) -> bool:
        tol = DET_TOL if tol is None else tol
        return abs(self.det - 1.0) <= tol * self.det_scale

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.phi1_p, self.phi2_p], [self.phi1p_p, self.phi2p_p]])


@dataclass(frozen=True)
class FloquetData:
    gamma: float
    rho1: complex
    rho2: complex
    alpha1: complex
    alpha2: complex
    regime: Regime
    period: float


def default_step(period: float) -> float:
    return 1e-3 * period


def monodromy(coeff, period: float | None = None, h: float | None = None) -> Monodromy:
    """Fundamental matrix over one period, columns (phi1, phi1'), (phi2, phi2').

    A determinant off by more than ``DET_TOL`` triggers one retry at h/2.
    """
    period = coeff.period if period is None else float(period)
    h = default_step(period) if h is None else h
    for step in (h, h / 2):
        t = [float(x) for x in transfer_matrix(coeff, 0.0, period, step)]
        mono = Monodromy(t[0], t[1], t[2], t[3], period)
        if mono.det_ok():
            return mono
    raise AccuracyError(f"det M = {mono.det!r} deviates from 1 after retry", det=mono.det)


def monodromy_entries(coeff, lams, period: float | None = None, h: float | None = None,
                      chunk: int = 256):
    """Vectorized monodromy components (phi1, phi2, phi1', phi2') over ``lams``.

    Entries failing the determinant check are recomputed at h/2 once.
    """
    period = coeff.period if period is None else float(period)
    h = default_step(period) if h is None else h
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    out = [np.empty_like(lams) for _ in range(4)]
    for start in range(0, lams.size, chunk):
        sl = slice(start, start + chunk)
        t = [np.array(x) for x in transfer_matrix(coeff, 0.0, period, h, lam=lams[sl])]
        bad = ~_det_ok(t)
        if np.any(bad):
            t2 = transfer_matrix(coeff, 0.0, period, h / 2, lam=lams[sl][bad])
            ok2 = _det_ok(t2)
            if not np.all(ok2):
                worst = float((t2[0] * t2[3] - t2[1] * t2[2])[~ok2][0])
                raise AccuracyError(f"det M = {worst!r} deviates from 1 after retry", det=worst)
            for x, y in zip(t, t2):
                x[bad] = y
        for o, x in zip(out, t):
            o[sl] = x
    return tuple(out)


def discriminant(coeff, lams, period: float | None = None, h: float | None = None) -> np.ndarray:
    """Vectorized gamma(lambda) = trace(M)/2 with the same det check as ``monodromy``."""
    t = monodromy_entries(coeff, lams, period, h)
    return 0.5 * (t[0] + t[3])


def _det_ok(t):
    det = t[0] * t[3] - t[1] * t[2]
    scale = np.maximum(1.0, np.abs(t[0] * t[3]) + np.abs(t[1] * t[2]))
    return np.abs(det - 1.0) <= DET_TOL * scale


def classify(gamma, edge_tol: float = EDGE_TOL):
    excess = abs(gamma) - 1.0
    if abs(excess) <= edge_tol:
        return Regime.EDGE
    return Regime.GAP if excess > 0 else Regime.BAND


def floquet_data(mono: Monodromy, edge_tol: float = EDGE_TOL) -> FloquetData:
    """Discriminant, multipliers (rho1 the one with |rho1| >= 1) and exponents."""
    p = mono.period_used
    gamma = 0.5 * (mono.phi1_p + mono.phi2p_p)
    regime = classify(gamma, edge_tol)
    if regime is Regime.EDGE:
        rho1 = rho2 = complex(math.copysign(1.0, gamma))
    elif regime is Regime.GAP:
        root = math.sqrt(gamma * gamma - 1.0)
        rho1 = complex(gamma + math.copysign(root, gamma))
        rho2 = 1.0 / rho1
    else:
        root = math.sqrt(1.0 - gamma * gamma)
        rho1 = complex(gamma, root)
        rho2 = complex(gamma, -root)
    alpha1 = cmath.log(rho1) / p
    alpha2 = cmath.log(rho2) / p
    return FloquetData(gamma, rho1, rho2, alpha1, alpha2, regime, p)


@dataclass(frozen=True)
class FloquetSolution:
    """Floquet solution f with f(z + p) = rho f(z), normalised to f(0) = 1.

    ``base`` is an accurately integrated trajectory over one period (taken in
    the direction where f grows); values anywhere follow from the Floquet
    law, which keeps the decaying tail free of growing-mode contamination.
    ``trajectory`` samples f on the working window [-Z, Z].
    """

    alpha: float
    direction: Direction
    multiplier: float
    period: float
    base: Trajectory
    trajectory: Trajectory | None = None
    coeff: object = None

    def evaluate(self, z):
        """(f, f', f'') at z, f'' from the dense output."""
        z = np.asarray(z, dtype=float)
        a = self.base.z_grid[0]
        k = np.floor((z - a) / self.period)
        zr = np.clip(z - k * self.period, self.base.z_grid[0], self.base.z_grid[-1])
        scale = self.multiplier ** k
        v, vp, vpp = self.base.evaluate(zr)
        return scale * v, scale * vp, scale * vpp


def _window_trajectory(sol: FloquetSolution, coeff, Z: float, h: float) -> Trajectory:
    n = max(2, 2 * math.ceil(Z / h - 1e-9))
    z = np.linspace(-Z, Z, n + 1)
    v, vp, _ = sol.evaluate(z)
    return Trajectory(z, v, vp, coeff.q(z), 2 * Z / n)


def _eigenvector(mono: Monodromy, rho: float):
    m = mono.matrix
    cands = [np.array([m[0, 1], rho - m[0, 0]]), np.array([rho - m[1, 1], m[1, 0]])]
    x = max(cands, key=lambda c: np.hypot(*c))
    norm = np.hypot(*x)
    if norm == 0.0 or abs(x[0]) <= 1e-12 * norm:
        raise PositivityError("Floquet eigenvector has vanishing value component; f(0) = 0")
    return x / x[0]


def decaying_solutions(coeff, data: FloquetData, mono: Monodromy, Z: float, h: float):
    """Return ``(f_plus, f_minus)``.

    ``f_plus`` decays at -inf (grows like exp(alpha z)), ``f_minus`` decays at
    +inf.  Both are normalised to value 1 at z = 0 and must stay positive.
    """
    if data.regime is not Regime.GAP:
        raise NoDecayingSolutionError(
            f"lambda={coeff.lam!r} is in the {data.regime.value} regime (gamma={data.gamma!r}); "
            "no exponentially decaying Floquet solutions"
        )
    p = data.period
    rho_big = data.rho1.real
    rho_small = data.rho2.real
    alpha = abs(data.alpha1.real)
    if rho_big < 0:
        raise PositivityError(
            f"negative Floquet multipliers (gamma={data.gamma!r}); solutions change sign every period"
        )
    out = []
    for rho, direction, z_end in (
        (rho_big, Direction.DECAYS_AT_MINUS_INF, p),
        (rho_small, Direction.DECAYS_AT_PLUS_INF, -p),
    ):
        x = _eigenvector(mono, rho)
        base = propagate(coeff, 0.0, z_end, (x[0], x[1]), min(h, p / 10), cross_check=False)
        if np.any(base.v <= 0):
            zbad = float(base.z_grid[np.argmax(base.v <= 0)])
            raise PositivityError(f"Floquet solution ({direction.value}) changes sign near z={zbad!r}")
        sol = FloquetSolution(alpha, direction, rho, p, base, coeff=coeff)
        traj = _window_trajectory(sol, coeff, Z, h)
        out.append(FloquetSolution(alpha, direction, rho, p, base, traj, coeff))
    return out[0], out[1]
