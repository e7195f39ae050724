"""Fixed-step Dormand-Prince 5(4) propagation of v'' = Q(z) v.

The system u' = [[0, 1], [Q, 0]] u is linear, so every Runge-Kutta step is a
2x2 matrix that depends only on Q at the seven stage abscissae.  Step
matrices are built in one vectorized pass (also across many spectral
parameters at once); whole-interval transfer matrices come from a pairwise
tree product, trajectories from applying the steps in sequence.

Backward integration (z1 < z0) substitutes s = -z, w(s) = v(-s), which
turns the problem into a forward one with coefficient Q(-s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoefficientError, DomainError, GrowthError

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

GROWTH_LIMIT = 1e200


@dataclass(frozen=True)
class StateVector:
    v: float
    v_prime: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and math.isfinite(self.v_prime)):
            raise ValueError("state components must be finite")

    def as_array(self):
        return np.array([self.v, self.v_prime])


def _as_state(init):
    if isinstance(init, StateVector):
        return init.v, init.v_prime
    v, vp = (float(x) for x in init)
    return v, vp


def stage_grid(z0: float, z1: float, h: float):
    """Uniform steps from z0 towards z1 with spacing at most h.

    Returns ``(s_stage, h_eff, sign, n)``: ``s_stage`` (n, 7) holds the stage
    abscissae in the reflected variable ``s = sign * z`` so that the march is
    always forward.
    """
    length = abs(z1 - z0)
    n = max(1, math.ceil(length / h - 1e-9))
    h_eff = length / n
    sign = 1.0 if z1 >= z0 else -1.0
    s0 = sign * z0
    s_stage = s0 + (np.arange(n)[:, None] + C[None, :]) * h_eff
    return s_stage, h_eff, sign, n


def step_matrices(q, h: float, embedded: bool = False):
    """Dormand-Prince step matrices for stage coefficients ``q[..., 7]``.

    Returns the components ``(r00, r01, r10, r11)`` each shaped
    ``q.shape[:-1]``; with ``embedded`` also the components of the 5(4)
    error matrix.
    """
    q = np.asarray(q, dtype=float)
    ks = []
    for i in range(7):
        y00, y01, y10, y11 = 1.0, 0.0, 0.0, 1.0
        for a, k in zip(A[i], ks):
            if a:
                ha = h * a
                y00 = y00 + ha * k[0]
                y01 = y01 + ha * k[1]
                y10 = y10 + ha * k[2]
                y11 = y11 + ha * k[3]
        qi = q[..., i]
        ks.append((y10 + 0.0 * qi, y11 + 0.0 * qi, qi * y00, qi * y01))
    r = [1.0, 0.0, 0.0, 1.0]
    for b, k in zip(B5, ks):
        if b:
            for c in range(4):
                r[c] = r[c] + (h * b) * k[c]
    if not embedded:
        return tuple(r)
    e = [0.0, 0.0, 0.0, 0.0]
    for b5, b4, k in zip(B5, B4, ks):
        db = b5 - b4
        if db:
            for c in range(4):
                e[c] = e[c] + (h * db) * k[c]
    return tuple(r), tuple(e)


def chain_product(r):
    """Ordered product R[n-1] @ ... @ R[0] along the last axis, pairwise."""
    r00, r01, r10, r11 = (np.asarray(x, dtype=float) for x in r)
    while r00.shape[-1] > 1:
        if r00.shape[-1] % 2:
            pad = [(0, 0)] * (r00.ndim - 1) + [(0, 1)]
            r00 = np.pad(r00, pad, constant_values=1.0)
            r01 = np.pad(r01, pad, constant_values=0.0)
            r10 = np.pad(r10, pad, constant_values=0.0)
            r11 = np.pad(r11, pad, constant_values=1.0)
        a00, a01, a10, a11 = r00[..., 0::2], r01[..., 0::2], r10[..., 0::2], r11[..., 0::2]
        b00, b01, b10, b11 = r00[..., 1::2], r01[..., 1::2], r10[..., 1::2], r11[..., 1::2]
        r00 = b00 * a00 + b01 * a10
        r01 = b00 * a01 + b01 * a11
        r10 = b10 * a00 + b11 * a10
        r11 = b10 * a01 + b11 * a11
    return r00[..., 0], r01[..., 0], r10[..., 0], r11[..., 0]


def _check_q(q, z):
    bad = ~np.isfinite(q)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise CoefficientError(f"non-finite coefficient Q at z={float(z[tuple(idx)])!r}")


def transfer_matrix(coeff, z0: float, z1: float, h: float, lam=None):
    """Transfer matrix from z0 to z1 in (v, v') coordinates.

    ``lam`` may be an array; the result components then carry its shape.
    ``coeff`` must offer ``base(z)`` (the lambda-free part) and ``lam``.
    """
    s_stage, h_eff, sign, _ = stage_grid(z0, z1, h)
    z_stage = sign * s_stage
    base = coeff.base(z_stage)
    lam = coeff.lam if lam is None else np.asarray(lam, dtype=float)
    q = base - np.asarray(lam)[..., None, None]
    _check_q(q, np.broadcast_to(z_stage, q.shape))
    t00, t01, t10, t11 = chain_product(step_matrices(q, h_eff))
    if sign < 0:
        t01, t10 = -t01, -t10
    return t00, t01, t10, t11


# quintic Hermite on t in [0, 1] from (y0, h y0', h^2 y0'', y1, h y1', h^2 y1'')
def _hermite_matrix():
    rows = []
    for t, order in ((0.0, 0), (0.0, 1), (0.0, 2), (1.0, 0), (1.0, 1), (1.0, 2)):
        row = []
        for k in range(6):
            if k < order:
                row.append(0.0)
            else:
                row.append(math.perm(k, order) * t ** (k - order))
        rows.append(row)
    return np.linalg.inv(np.array(rows))


HERMITE = _hermite_matrix()


@dataclass(frozen=True)
class Trajectory:
    """Solution nodes on a uniform increasing grid with quintic dense output.

    ``v``, ``v_prime`` and ``q`` are aligned with ``z_grid``; the node second
    derivative is ``q * v``.  ``forward`` records the integration direction
    so ``final_state`` is the state at the integration end point.
    """

    z_grid: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    q: np.ndarray
    h: float
    forward: bool = True
    error_estimate: float = float("nan")
    embedded_error: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def states(self):
        return np.column_stack([self.v, self.v_prime])

    @property
    def final_state(self) -> StateVector:
        i = -1 if self.forward else 0
        return StateVector(float(self.v[i]), float(self.v_prime[i]))

    @property
    def initial_state(self) -> StateVector:
        i = 0 if self.forward else -1
        return StateVector(float(self.v[i]), float(self.v_prime[i]))

    def truncate(self, n_nodes: int) -> "Trajectory":
        s = slice(0, n_nodes)
        return Trajectory(self.z_grid[s], self.v[s], self.v_prime[s], self.q[s], self.h,
                          self.forward, self.error_estimate, self.embedded_error)

    def evaluate(self, z):
        """Return (v, v', v'') at z from quintic Hermite interpolation."""
        z = np.asarray(z, dtype=float)
        zg = self.z_grid
        if np.any(z < zg[0] - 1e-12 * max(1.0, abs(zg[0]))) or np.any(
            z > zg[-1] + 1e-12 * max(1.0, abs(zg[-1]))
        ):
            raise DomainError(f"z outside trajectory range [{zg[0]}, {zg[-1]}]")
        h = (zg[-1] - zg[0]) / (zg.size - 1)
        k = np.clip(np.floor((z - zg[0]) / h).astype(int), 0, zg.size - 2)
        t = (z - zg[k]) / h
        vpp = self.q * self.v
        data = np.stack([
            self.v[k], h * self.v_prime[k], h * h * vpp[k],
            self.v[k + 1], h * self.v_prime[k + 1], h * h * vpp[k + 1],
        ])
        coef = HERMITE @ data.reshape(6, -1)
        powers = np.arange(6)[:, None]
        tt = np.reshape(t, (1, -1))
        p0 = np.sum(coef * tt ** powers, axis=0)
        p1 = np.sum(coef[1:] * powers[1:] * tt ** (powers[1:] - 1), axis=0) / h
        p2 = np.sum(coef[2:] * (powers[2:] * (powers[2:] - 1)) * tt ** (powers[2:] - 2), axis=0) / h**2
        shape = np.shape(z)
        return p0.reshape(shape), p1.reshape(shape), p2.reshape(shape)


def _march(r, v0, vp0):
    r00, r01, r10, r11 = (x.tolist() for x in r)
    n = len(r00)
    v = [0.0] * (n + 1)
    vp = [0.0] * (n + 1)
    v[0], vp[0] = v0, vp0
    a, b = v0, vp0
    for i in range(n):
        a, b = r00[i] * a + r01[i] * b, r10[i] * a + r11[i] * b
        v[i + 1] = a
        vp[i + 1] = b
    return np.array(v), np.array(vp)


def propagate(coeff, z0: float, z1: float, init, h: float, cross_check: bool = True) -> Trajectory:
    """Integrate v'' = Q(z) v from z0 to z1 (either order) with step <= h.

    The returned trajectory carries ``error_estimate``, the end-state
    discrepancy against a half-step re-integration, and ``embedded_error``,
    the largest per-step 5(4) local error estimate.
    """
    if z0 == z1:
        raise DomainError("empty integration interval")
    if not h > 0 or h > abs(z1 - z0) / 10 * (1 + 1e-12):
        raise DomainError(f"step h={h} must satisfy 0 < h <= |z1 - z0|/10")
    v0, vp0 = _as_state(init)
    s_stage, h_eff, sign, n = stage_grid(z0, z1, h)
    z_stage = sign * s_stage
    q = coeff.q(z_stage)
    _check_q(q, z_stage)
    r, e = step_matrices(q, h_eff, embedded=True)
    w, wp = _march(r, v0, sign * vp0)
    with np.errstate(invalid="ignore", over="ignore"):
        norms = np.hypot(w, wp)
    blown = ~(norms <= GROWTH_LIMIT)
    s_nodes = sign * z0 + h_eff * np.arange(n + 1)
    if np.any(blown):
        i = int(np.argmax(blown))
        raise GrowthError(f"solution exceeded {GROWTH_LIMIT:g} at z={sign * s_nodes[i]!r}",
                          z=float(sign * s_nodes[i]))
    local = np.hypot(e[0] * w[:-1] + e[1] * wp[:-1], e[2] * w[:-1] + e[3] * wp[:-1])
    embedded_error = float(local.max())

    error_estimate = float("nan")
    if cross_check:
        q2 = coeff.q(sign * stage_grid(z0, z1, h / 2)[0])
        t = chain_product(step_matrices(q2, h_eff / 2))
        w2 = t[0] * w[0] + t[1] * wp[0]
        wp2 = t[2] * w[0] + t[3] * wp[0]
        error_estimate = float(np.hypot(w2 - w[-1], wp2 - wp[-1]))

    z_nodes = sign * s_nodes
    z_nodes[-1] = z1
    v, vp = w, sign * wp
    q_nodes = coeff.q(z_nodes)
    if sign < 0:
        z_nodes, v, vp, q_nodes = z_nodes[::-1], v[::-1], vp[::-1], q_nodes[::-1]
    return Trajectory(z_nodes.copy(), v.copy(), vp.copy(), np.asarray(q_nodes, dtype=float).copy(),
                      h_eff, sign > 0, error_estimate, embedded_error)


def residual_at(trajectory: Trajectory, coeff, z):
    """|v''(z) - Q(z) v(z)| with v'' taken from the dense output."""
    v, _, vpp = trajectory.evaluate(z)
    return np.abs(vpp - coeff.q(np.asarray(z, dtype=float)) * v)
