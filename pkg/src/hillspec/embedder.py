"""Glue decaying Floquet solutions into an eigenfunction and recover the
asymptotically periodic potential that carries the prescribed eigenvalue.

With window weights w_+ = (1 - tanh(beta z))/2 and w_- = (1 + tanh(beta z))/2,

    v* = w_+ f_+ + w_- f_-,

and since f_+- solve the periodic Hill equation exactly, the localized part

    S = v*''/v* - (m + A_per)^2 + lambda0

only contains the terms where the windows are differentiated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .bands import essential_spectrum, threshold_report
from .errors import DecayMarginError, HillError, PositivityError, RadicandError
from .floquet import Regime, decaying_solutions, floquet_data, monodromy
from .potentials import make_mode_coefficient


class VStar(NamedTuple):
    v: np.ndarray
    v_prime: np.ndarray
    v_second: np.ndarray
    # w_+'' f_+ + 2 w_+' f_+' + (same for f_-), i.e. v*'' - Q v*
    commutator: np.ndarray


@dataclass(frozen=True)
class Diagnostics:
    residual_sup: float
    residual_rel: float
    decay_rate_fit: float
    s_decay_rate_fit: float
    min_radicand: float
    eigenfn_positive: bool
    s_form_discrepancy: float
    tail_mismatch: float
    a2_integral: float


@dataclass(frozen=True)
class EmbeddedConstruction:
    lambda0: float
    m: int
    beta: float
    alpha: float
    Z: float
    h: float
    z_grid: np.ndarray
    v_star: np.ndarray
    v_star_prime: np.ndarray
    S: np.ndarray
    A0: np.ndarray
    A_per: np.ndarray
    diagnostics: Diagnostics
    potential: object = field(default=None, compare=False, repr=False)
    fplus: object = field(default=None, compare=False, repr=False)
    fminus: object = field(default=None, compare=False, repr=False)
    threshold: object = field(default=None, compare=False)


def _windows(z, beta):
    # logistic form keeps 1 - tanh accurate far out in the tails
    wp = expit(-2.0 * beta * z)
    wm = expit(2.0 * beta * z)
    t = wm - wp
    sech2 = 4.0 * wp * wm
    # derivatives of w_+ = (1 - t)/2; w_- has the opposite sign
    w1 = -0.5 * beta * sech2
    w2 = beta * beta * sech2 * t
    return wp, wm, w1, w2


def _glue(z, fp, fm, beta, q):
    """fp, fm are (f, f') pairs at z; q is the periodic Hill coefficient at z."""
    wp, wm, w1, w2 = _windows(z, beta)
    (f1, d1), (f2, d2) = fp, fm
    v = wp * f1 + wm * f2
    vp = wp * d1 + wm * d2 + w1 * (f1 - f2)
    comm = 2.0 * w1 * (d1 - d2) + w2 * (f1 - f2)
    # full product rule with f'' = q f
    vpp = wp * (q * f1) + wm * (q * f2) + comm
    return v, vp, vpp, comm


def build_v_star(fplus, fminus, beta: float = 1.0) -> VStar:
    """Glued eigenfunction on the common window grid of ``fplus``/``fminus``."""
    if fplus.alpha >= 2 * beta:
        raise DecayMarginError(f"alpha={fplus.alpha:.6g} >= 2*beta={2 * beta:g}: v* would not decay")
    tp, tm = fplus.trajectory, fminus.trajectory
    if not np.array_equal(tp.z_grid, tm.z_grid):
        raise ValueError("f_+ and f_- must share a grid")
    v, vp, vpp, comm = _glue(tp.z_grid, (tp.v, tp.v_prime), (tm.v, tm.v_prime), beta, tp.q)
    if np.any(v <= 0):
        zbad = float(tp.z_grid[np.argmax(v <= 0)])
        raise PositivityError(f"glued eigenfunction changes sign near z={zbad!r}")
    return VStar(v, vp, vpp, comm)


def build_S(vstar: VStar, coeff, z):
    """Localized correction S on grid ``z``; returns ``(S, discrepancy)``.

    ``discrepancy`` is the sup difference between the direct quotient
    v*''/v* - (m+A_per)^2 + lambda0 and the window-commutator form.
    """
    if np.any(vstar.v <= 0):
        raise PositivityError("S needs a positive eigenfunction")
    direct = vstar.v_second / vstar.v - coeff.base(z) + coeff.lam
    commutator = vstar.commutator / vstar.v
    return commutator, float(np.max(np.abs(direct - commutator)))


def build_A0(S, potential, m: int, z):
    """A0 = -m + sqrt((m + A_per)^2 + S), positive branch."""
    radicand = (m + potential(z)) ** 2 + S
    bad = radicand <= 0
    if np.any(bad):
        zs = np.asarray(z)[bad]
        raise RadicandError(f"non-positive radicand at {zs.size} nodes, first z={float(zs[0])!r}", zs)
    return -m + np.sqrt(radicand), float(radicand.min())


def fit_decay_rate(z, y, lo: float, hi: float, period: float | None = None) -> float:
    """Least-squares rate r in |y| ~ C exp(-r z) over z in [lo, hi].

    With ``period`` the fit runs through the maxima of |y| over consecutive
    whole periods, which removes the periodic factor of a Floquet-type tail
    exactly.  Windows shorter than two periods use the median of the
    one-period ratios log(|y(z)| / |y(z + period)|) / period instead.
    Without ``period`` it is a plain log-linear fit of every sample.
    """
    z, y = np.asarray(z), np.abs(np.asarray(y))
    if period is not None:
        k = int((hi - lo) // period)
        if k == 1:
            sel = (z >= lo) & (z <= hi - period)
            ahead = np.interp(z[sel] + period, z, y)
            with np.errstate(divide="ignore"):
                ratios = np.log(y[sel] / ahead) / period
            return float(np.median(ratios[np.isfinite(ratios)]))
        if k >= 2:
            centers, peaks = [], []
            for j in range(k):
                a = lo + j * period
                sel = (z >= a) & (z < a + period)
                peaks.append(y[sel].max())
                centers.append(a + 0.5 * period)
            return float(-np.polyfit(centers, np.log(peaks), 1)[0])
    sel = (z >= lo) & (z <= hi) & (y > 0)
    return float(-np.polyfit(z[sel], np.log(y[sel]), 1)[0])


def midpoint_residual(construction: EmbeddedConstruction) -> float:
    """sup |-v*'' + (m + A0)^2 v* - lambda0 v*| at grid midpoints.

    v* and v*'' come from the f_+- dense output (Hermite second derivative,
    not the Hill relation) and A0 from a cubic spline through the node
    values, so the residual measures discretisation error only.
    """
    c = construction
    z = c.z_grid
    zm = 0.5 * (z[:-1] + z[1:])
    f1, d1, s1 = c.fplus.trajectory.evaluate(zm)
    f2, d2, s2 = c.fminus.trajectory.evaluate(zm)
    wp, wm, w1, w2 = _windows(zm, c.beta)
    v = wp * f1 + wm * f2
    vpp = wp * s1 + wm * s2 + 2.0 * w1 * (d1 - d2) + w2 * (f1 - f2)
    a0 = CubicSpline(z, c.A0)(zm)
    return float(np.max(np.abs(-vpp + ((c.m + a0) ** 2 - c.lambda0) * v)))


def _threshold(lambda0, m, potential):
    amax = float(np.max(np.abs(potential(np.linspace(0, potential.period, 256)))))
    mmax = max(abs(m), math.ceil(math.sqrt(max(lambda0, 0.0)) + amax))
    window = (lambda0 - 0.2, lambda0 + 0.2)
    spectra = essential_spectrum(potential, (-mmax, mmax), window)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return threshold_report(lambda0, spectra, m)


def construct(lambda0: float, m: int, potential, beta: float = 1.0, Z: float = 20.0,
              h: float = 2e-3, strict: bool = False, check_threshold: bool = True
              ) -> EmbeddedConstruction:
    """Potential A0 -> A_per with lambda0 as an eigenvalue of mode ``m``."""
    coeff = make_mode_coefficient(m, potential, lambda0)
    mono = monodromy(coeff)
    data = floquet_data(mono)
    # report the spectral position before any construction error can occur
    report = None
    if check_threshold and data.regime is Regime.GAP:
        report = _threshold(lambda0, m, potential)
        if not report.embedded or report.on_threshold:
            warnings.warn(
                f"lambda0={lambda0} is not embedded away from thresholds "
                f"(embedded={report.embedded}, on_threshold={report.on_threshold})",
                stacklevel=2,
            )
    fplus, fminus = decaying_solutions(coeff, data, mono, Z, h)
    alpha = fplus.alpha
    if alpha >= beta:
        raise DecayMarginError(
            f"alpha={alpha:.6g} >= beta={beta:g}: S decays like exp(-2(beta-alpha)|z|) and would not vanish"
        )
    z = fplus.trajectory.z_grid
    vstar = build_v_star(fplus, fminus, beta)
    S, s_disc = build_S(vstar, coeff, z)
    a_per = potential(z)
    A0, min_rad = build_A0(S, potential, m, z)

    diag = Diagnostics(
        residual_sup=float("nan"), residual_rel=float("nan"),
        decay_rate_fit=fit_decay_rate(z, vstar.v, min(10.0, Z / 2), Z, potential.period),
        s_decay_rate_fit=fit_decay_rate(z, S, min(5.0, Z / 4), min(18.0, Z), potential.period),
        min_radicand=min_rad,
        eigenfn_positive=bool(np.all(vstar.v > 0)),
        s_form_discrepancy=s_disc,
        tail_mismatch=float(max(abs(A0[0] - a_per[0]), abs(A0[-1] - a_per[-1]))),
        a2_integral=float(np.trapezoid(A0 - a_per, z)),
    )
    out = EmbeddedConstruction(lambda0, int(m), beta, alpha, Z, fplus.trajectory.h, z, vstar.v,
                               vstar.v_prime, S, A0, a_per, diag, potential, fplus, fminus, report)
    res = midpoint_residual(out)
    vmax = float(vstar.v.max())
    diag = Diagnostics(**{**diag.__dict__, "residual_sup": res, "residual_rel": res / vmax})
    out = EmbeddedConstruction(**{**{f: getattr(out, f) for f in out.__dataclass_fields__},
                                  "diagnostics": diag})
    if strict:
        problems = []
        if diag.residual_rel > 1e-6:
            problems.append(f"residual {diag.residual_rel:.3g} > 1e-6 sup v*")
        if diag.tail_mismatch > 1e-6 * float(np.max(np.abs(A0))):
            problems.append(f"A0 - A_per at +-Z is {diag.tail_mismatch:.3g}")
        if report is not None and (not report.embedded or report.on_threshold):
            problems.append("lambda0 is not an embedded, non-threshold point")
        if problems:
            raise HillError("strict diagnostics failed: " + "; ".join(problems))
    return out
