"""The ten acceptance criteria at their stated tolerances and time limits.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time
import warnings

import numpy as np
import pytest

from hillspec import (band_edges, construct, cos_potential, floquet_data, gaussian_bump,
                      hellmann_feynman, make_mode_coefficient, matching_function, monodromy,
                      sech2_bump)
from hillspec.embedder import fit_decay_rate
from hillspec.floquet import decaying_solutions, discriminant
from hillspec.ode import transfer_matrix
from hillspec.potentials import constant_potential
from hillspec.verifier import construction_potential
from oracles import constant_transfer, cos_mode0_edges

COS = cos_potential()


def _record(acceptance, number, checks, elapsed, limit):
    checks = dict(checks)
    checks[f"runtime {elapsed:.2f}s <= {limit:g}s"] = elapsed <= limit
    ok = all(checks.values())
    detail = "; ".join(k if v else f"NOT({k})" for k, v in checks.items())
    acceptance[number] = (ok, detail)
    assert ok, detail


def _construct(**kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return construct(0.5, 1, COS, **kw)


def test_criterion_01_mode0_first_band(acceptance):
    t = time.perf_counter()
    band = band_edges(0, COS, (0.0, 1.5)).bands[0]
    elapsed = time.perf_counter() - t
    _record(acceptance, 1, {
        f"lo {band.lo:.6f} = 0.469 +- 2e-3": abs(band.lo - 0.469) <= 2e-3,
        f"hi {band.hi:.6f} = 1.242 +- 2e-3": abs(band.hi - 1.242) <= 2e-3,
    }, elapsed, 10)


def test_criterion_02_mode1_bands(acceptance):
    t = time.perf_counter()
    spectra = {m: band_edges(m, COS, (0.0, 2.2)) for m in (1, -1)}
    elapsed = time.perf_counter() - t
    checks = {}
    for m, s in spectra.items():
        first, second = s.bands[0], s.bands[1]
        checks[f"m={m:+d} first [{first.lo:.6f}, {first.hi:.6f}] = [0.564, 0.572] +- 2e-3"] = (
            abs(first.lo - 0.564) <= 2e-3 and abs(first.hi - 0.572) <= 2e-3)
        checks[f"m={m:+d} second onset {second.lo:.4f} = 1.88 +- 0.02"] = abs(second.lo - 1.88) <= 0.02
    _record(acceptance, 2, checks, elapsed, 10)


def test_criterion_03_mode2_empty(acceptance):
    t = time.perf_counter()
    spectra = {m: band_edges(m, COS, (0.0, 2.0)) for m in (2, -2)}
    elapsed = time.perf_counter() - t
    _record(acceptance, 3, {
        f"m={m:+d} has no band in [0, 2]": all(b.lo > 2.0 for b in s.bands)
        for m, s in spectra.items()
    }, elapsed, 10)


def test_criterion_04_floquet_exponent(acceptance):
    t = time.perf_counter()
    data = floquet_data(monodromy(make_mode_coefficient(1, COS, 0.5)))
    elapsed = time.perf_counter() - t
    alpha = abs(data.alpha1.real)
    _record(acceptance, 4, {f"alpha {alpha:.6f} = 0.5835 +- 1e-3": abs(alpha - 0.5835) <= 1e-3},
            elapsed, 1)


def test_criterion_05_mathieu(acceptance):
    t = time.perf_counter()
    spec = band_edges(0, COS, (0.0, 2.2))
    a0, b1, a1, _ = cos_mode0_edges()
    elapsed = time.perf_counter() - t
    got = (spec.bands[0].lo, spec.bands[0].hi, spec.bands[1].lo)
    _record(acceptance, 5, {
        f"{name} + 1/2: |{g:.8f} - {w:.8f}| <= 1e-4": abs(g - w) <= 1e-4
        for name, g, w in zip(("a0", "b1", "a1"), got, (a0, b1, a1))
    }, elapsed, 5)


def test_criterion_06_construction_residual(acceptance):
    t = time.perf_counter()
    c = _construct(beta=1.0, Z=20.0, h=2e-3)
    res = [_construct(Z=20.0, h=h, check_threshold=False).diagnostics.residual_sup
           for h in (0.1, 0.05, 0.025)]
    elapsed = time.perf_counter() - t
    orders = [math.log2(res[i] / res[i + 1]) for i in range(2)]
    _record(acceptance, 6, {
        f"residual {c.diagnostics.residual_sup:.3g} <= 1e-6 sup v* ({c.v_star.max():.3g})":
            c.diagnostics.residual_sup <= 1e-6 * c.v_star.max(),
        f"observed orders {orders[0]:.2f}, {orders[1]:.2f} in [3.5, 4.5] (h = 0.1, 0.05, 0.025)":
            all(3.5 <= o <= 4.5 for o in orders),
    }, elapsed, 30)


def test_criterion_07_decay_bounds(acceptance):
    t = time.perf_counter()
    c = _construct(check_threshold=False)
    p = COS.period
    v_rate = fit_decay_rate(c.z_grid, c.v_star, 5.0, 18.0, period=p)
    s_rate = fit_decay_rate(c.z_grid, c.S, 5.0, 18.0, period=p)
    elapsed = time.perf_counter() - t
    _record(acceptance, 7, {
        f"v* rate {v_rate:.4f} = alpha {c.alpha:.4f} +- 0.02": abs(v_rate - c.alpha) <= 0.02,
        f"S rate {s_rate:.4f} >= (2 - alpha) - 0.05 = {2 - c.alpha - 0.05:.4f}":
            s_rate >= (2 - c.alpha) - 0.05,
    }, elapsed, 5)


def test_criterion_08_matching_oracle(acceptance):
    t = time.perf_counter()
    a0 = construction_potential(_construct(check_threshold=False))
    r15 = matching_function(a0, COS, 1, (0.45, 0.55), Z_match=15.0).roots
    r25 = matching_function(a0, COS, 1, (0.45, 0.55), Z_match=25.0).roots
    elapsed = time.perf_counter() - t
    ok_single = len(r15) == 1 and len(r25) == 1
    _record(acceptance, 8, {
        f"one root each ({len(r15)}, {len(r25)})": ok_single,
        f"root {r15[0] if r15 else float('nan'):.12f} = 0.5 +- 1e-6": ok_single and abs(r15[0] - 0.5) <= 1e-6,
        f"Z_match 15 -> 25 shift {abs(r15[0] - r25[0]) if ok_single else float('nan'):.2g} <= 1e-8":
            ok_single and abs(r15[0] - r25[0]) <= 1e-8,
    }, elapsed, 30)


def test_criterion_09_first_order(acceptance):
    t = time.perf_counter()
    base = _construct(check_threshold=False)
    bumps = [sech2_bump(0.0, 1.0, 1.0), gaussian_bump(1.0, 1.0, 1.0), sech2_bump(-2.0, 0.7, 1.0)]
    checks = {}
    for b in bumps:
        pc = hellmann_feynman(base, b)
        rel = abs(pc.derivative_formula - pc.derivative_tracked) / abs(pc.derivative_tracked)
        checks[f"{b.name}: formula {pc.derivative_formula:.8f} vs tracked {pc.derivative_tracked:.8f} "
               f"(rel {rel:.1g}) <= 1e-3"] = rel <= 1e-3
    elapsed = time.perf_counter() - t
    _record(acceptance, 9, checks, elapsed, 120)


def test_criterion_10_property_suite(acceptance):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    # 500 random (m, lambda) over the modes and window of the cos example
    ms = rng.integers(-1, 2, 500)
    lams = rng.uniform(0.0, 2.2, 500)
    det_dev = rho_dev = 0.0
    for m in (-1, 0, 1):
        sel = ms == m
        t00, t01, t10, t11 = (np.asarray(x) for x in
                              transfer_matrix(make_mode_coefficient(m, COS, 0.0), 0.0, COS.period,
                                              1e-3 * COS.period, lam=lams[sel]))
        det_dev = max(det_dev, float(np.max(np.abs(t00 * t11 - t01 * t10 - 1))))
        for i in np.flatnonzero(sel)[:40]:
            d = floquet_data(monodromy(make_mode_coefficient(m, COS, lams[i])))
            rho_dev = max(rho_dev, abs(d.rho1 * d.rho2 - 1))
        eig = np.linalg.eigvals(np.stack([np.stack([t00, t01], -1), np.stack([t10, t11], -1)], -2))
        rho_dev = max(rho_dev, float(np.max(np.abs(np.prod(eig, axis=-1) - 1))))

    closed = 0.0
    for k in (-4.0, -0.3, 0.0, 0.7, 2.0):
        coeff = make_mode_coefficient(0, constant_potential(0.0, math.pi), -k)
        got = transfer_matrix(coeff, 0.0, math.pi, 1e-3)
        ref = constant_transfer(k, math.pi)
        closed = max(closed, max(abs(a - b) for a, b in zip(got, ref)) / max(1.0, max(map(abs, ref))))
    free = np.linspace(0.0, 10.0, 100)
    gam = discriminant(make_mode_coefficient(0, constant_potential(0.0, math.pi), 0.0), free)
    closed = max(closed, float(np.max(np.abs(gam - np.cos(np.sqrt(free) * math.pi)))))

    coeff = make_mode_coefficient(1, COS, 0.5)
    mono = monodromy(coeff)
    fp, fm = decaying_solutions(coeff, floquet_data(mono), mono, 20.0, 2e-3)
    sym = float(np.max(np.abs(fp.trajectory.v - fm.trajectory.v[::-1]) / fm.trajectory.v[::-1]))

    c20 = _construct(Z=20.0, check_threshold=False)
    c30 = _construct(Z=30.0, check_threshold=False)
    i = int(np.argmin(np.abs(c30.z_grid + 20.0)))
    win = float(np.max(np.abs(c30.A0[i:i + c20.z_grid.size] - c20.A0)))
    elapsed = time.perf_counter() - t
    _record(acceptance, 10, {
        f"max |det M - 1| = {det_dev:.2g} <= 1e-9 (500 samples)": det_dev <= 1e-9,
        f"max |rho1 rho2 - 1| = {rho_dev:.2g} <= 1e-9": rho_dev <= 1e-9,
        f"closed forms {closed:.2g} <= 1e-8": closed <= 1e-8,
        f"f+(z) = f-(-z) rel {sym:.2g} <= 1e-6": sym <= 1e-6,
        f"A0 window Z 20 -> 30 change {win:.2g} <= 1e-8": win <= 1e-8,
    }, elapsed, 120)
