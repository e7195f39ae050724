import numpy as np
import pytest

from hillspec.errors import RegimeError, TrackingError
from hillspec.ode import residual_at
from hillspec.potentials import LocalizedPerturbation, make_mode_coefficient, sech2_bump
from hillspec.verifier import (construction_potential, glued_eigenfunction, hellmann_feynman,
                               matching_function, track_eigenvalue)


@pytest.fixture(scope="module")
def a0(construction):
    return construction_potential(construction)


@pytest.fixture(scope="module")
def matched(a0, cos):
    return matching_function(a0, cos, 1, (0.45, 0.55))


def test_single_root_at_lambda0(matched):
    assert len(matched.roots) == 1
    assert matched.roots[0] == pytest.approx(0.5, abs=1e-6)
    assert matched.Z_match == pytest.approx(4 * np.pi)


def test_root_meets_scale_bound(a0, cos, matched):
    again = matching_function(a0, cos, 1, (matched.roots[0] - 1e-12, matched.roots[0] + 1e-12), n=3)
    scale = np.max(np.abs(matched.iota_values))
    assert np.min(np.abs(again.iota_values)) <= 1e-8 * scale


def test_iota_is_continuous(matched):
    jumps = np.abs(np.diff(matched.iota_values))
    assert np.max(jumps) <= 0.1 * np.max(np.abs(matched.iota_values))


def test_root_stable_under_longer_shooting(a0, cos, matched):
    longer = matching_function(a0, cos, 1, (0.45, 0.55), Z_match=25.0)
    assert longer.Z_match > matched.Z_match
    assert longer.roots[0] == pytest.approx(matched.roots[0], abs=1e-8)


def test_periodic_background_has_no_eigenvalue(cos):
    assert matching_function(cos, cos, 1, (0.4, 0.55)).roots == []


def test_window_in_band_is_rejected(a0, cos):
    with pytest.raises(RegimeError):
        matching_function(a0, cos, 1, (0.5, 0.6))


def test_glued_eigenfunction_residual(a0, cos, matched):
    lam = matched.roots[0]
    tr = glued_eigenfunction(a0, cos, 1, lam)
    coeff = make_mode_coefficient(1, a0, lam)
    z = np.linspace(tr.z_grid[0], tr.z_grid[-1], 100001)
    assert np.max(residual_at(tr, coeff, z)) <= 1e-6
    assert np.max(np.abs(tr.v)) == pytest.approx(1.0)
    assert np.all(tr.v > 0)


def test_glued_eigenfunction_matches_v_star(a0, cos, matched, construction):
    tr = glued_eigenfunction(a0, cos, 1, matched.roots[0])
    c = construction
    inside = np.abs(c.z_grid) <= 10.0
    v_star = c.v_star[inside] / c.v_star.max()
    assert np.max(np.abs(np.interp(c.z_grid[inside], tr.z_grid, tr.v) - v_star)) <= 1e-6


def test_track_base_case(construction):
    [(eps, lam)] = track_eigenvalue(construction, sech2_bump(), [0.0])
    assert eps == 0.0 and lam == pytest.approx(0.5, abs=1e-8)


def test_track_across_threshold_reports_error(construction):
    with pytest.raises(TrackingError) as err:
        track_eigenvalue(construction, sech2_bump(), [0.0, 0.05, 0.1, 0.15, 0.2, 0.25])
    assert err.value.epsilon > 0


def test_hellmann_feynman_sech2(construction):
    check = hellmann_feynman(construction, sech2_bump())
    assert np.isfinite(check.derivative_formula) and np.isfinite(check.derivative_tracked)
    assert abs(check.derivative_formula - check.derivative_tracked) <= 1e-3 * abs(check.derivative_tracked)
    assert check.epsilon_used == 1e-4
    # the tracked oracle supports the plus sign of the first-order integral
    assert check.sign_agrees
    assert check.derivative_formula_negated == -check.derivative_formula


def test_hellmann_feynman_zero_perturbation(construction):
    check = hellmann_feynman(construction, LocalizedPerturbation(np.zeros_like, name="zero"))
    assert check.derivative_formula == 0.0
    assert check.derivative_tracked == 0.0


def test_hellmann_feynman_own_localized_part(construction):
    c = construction
    own = LocalizedPerturbation(lambda z: np.interp(z, c.z_grid, c.A0 - c.A_per, left=0.0, right=0.0),
                                name="A0 - A_per")
    check = hellmann_feynman(construction, own)
    assert abs(check.derivative_tracked) > 1e-3
    assert check.relative_discrepancy <= 1e-2
