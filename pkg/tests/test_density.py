import math

import numpy as np
import pytest

from planarpot.bergman import ConformalBergmanKernel, disk_map
from planarpot.exceptions import ConfigurationError, PreconditionError
from planarpot.density import (
    CapacityDensity, DecayRegressor, approach_samples, chain_lower_bound, density_gamma_profile,
    density_profile, distance_growth_check, fit_decay, fit_green_decay, green_band_inclusion,
    holder_modulus_constant, weak_strong_density, wiener_sum, zwonek_sum,
)
from planarpot.geometry import (
    CompactSet, Disk, carleson_totik, comb_domain, punctured_disk, slit_disk, unit_disk,
)
from planarpot.grid import GridSpec
from planarpot.potential import calibrate_constant, capacity_potential


def test_slit_tip_every_scale_qualifies(oracles):
    p = density_profile(slit_disk(), 0j, 1 / 8, 0.5, 24)
    assert p.qualifies.all()
    assert p.estimate == 1.0
    assert np.allclose(p.log_caps, oracles["slit_trace_log_capacity"], atol=1e-2)


def test_carleson_totik_profile_matches_interval_oracle(oracles):
    ref = oracles["ct_origin_profile"]
    n_max = len(ref["qualifies"])
    p = density_profile(carleson_totik(), 0j, ref["eps"], ref["lam"], n_max)
    firm = ~np.array(ref["borderline"])
    assert np.array_equal(p.qualifies[firm], np.array(ref["qualifies"])[firm])
    lo, hi = np.array(ref["log_cap_bounds"]).T
    # capacity bounds from monotonicity and subadditivity, with discretization slack
    assert np.all(p.log_caps[firm] >= lo[firm] - 1e-2)
    assert np.all(p.log_caps[firm] <= hi[firm] + 1e-2)
    assert set(ref["non_qualifying"]).isdisjoint(p.qualifying_set)


def test_carleson_totik_tail_density_positive():
    assert density_profile(carleson_totik(), 0j, 2.0 ** -12, 0.5, 24).estimate > 0


def test_punctured_disk_has_no_qualifying_scale():
    p = density_profile(punctured_disk(), 0j, 1 / 8, 0.5, 16)
    assert not p.qualifies.any()
    assert p.estimate == 0.0
    assert np.all(p.log_caps == -math.inf)


def test_qualifying_sets_antitone_in_eps():
    dom = carleson_totik()
    sets = [density_profile(dom, 0j, eps, 0.5, 40).qualifying_set for eps in (2.0 ** -14, 2.0 ** -12, 2.0 ** -4)]
    assert sets[2] <= sets[1] <= sets[0]


def test_density_invariant_under_global_scaling():
    dom = slit_disk()
    big = dom.scaled(4.0)
    p1 = density_profile(dom, 0j, 1 / 8, 0.5, 12)
    p2 = density_profile(big, 0j, 1 / 8, 0.5, 12, reference_length=4.0)
    assert np.array_equal(p1.qualifies, p2.qualifies)
    assert np.allclose(p1.log_caps, p2.log_caps, atol=1e-12)


def test_profile_rejects_interior_point():
    with pytest.raises(PreconditionError):
        density_profile(unit_disk(), 0j, 1 / 8, 0.5, 8)


def test_gamma_one_membership_matches_counting_profile():
    dom = carleson_totik()
    a = density_profile(dom, 0j, 2.0 ** -12, 0.5, 40)
    b = density_gamma_profile(dom, 0j, 2.0 ** -12, 0.5, 1.0, 40)
    assert np.array_equal(a.qualifies, b.qualifies)
    assert not np.allclose(a.density[1:], b.density[1:])


@pytest.mark.parametrize("n", ["8", "16", "24"])
def test_comb_harmonic_density(oracles, n):
    p = density_gamma_profile(comb_domain(0.5, 2.0), 0j, 2.0 ** -12, 0.5, 2.0, int(n))
    assert p.qualifies.all()
    assert p.density[int(n) - 1] == pytest.approx(oracles["comb_harmonic_density"][n], rel=1e-12)


def test_gamma_profile_polar_trace_is_zero():
    p = density_gamma_profile(punctured_disk(), 0j, 1 / 8, 0.5, 2.0, 16)
    assert not p.qualifies.any() and p.estimate == 0.0


def test_gamma_below_one_is_rejected():
    with pytest.raises(ConfigurationError):
        density_gamma_profile(slit_disk(), 0j, 1 / 8, 0.5, 0.5, 8)


def test_slit_weak_and_strong_densities_are_one():
    r = weak_strong_density(slit_disk(), None, 1 / 8, 0.5, 16, n_samples=16)
    assert r.weak == 1.0 and r.strong == 1.0


def test_carleson_totik_strong_density_reference(oracles):
    ref = oracles["ct_strong_density_reference"]
    pts = np.array(ref["sample_real_points"], dtype=complex)
    for n in ("16", "24"):
        r = weak_strong_density(carleson_totik(), pts, 2.0 ** -12, 0.5, int(n))
        assert r.strong == pytest.approx(ref["estimate"][n], abs=0.05)
        assert r.strong <= r.weak


def test_strong_never_exceeds_weak():
    r = weak_strong_density(carleson_totik(), None, 2.0 ** -12, 0.5, 40, n_samples=16)
    assert np.all(r.strong_sequence <= r.weak_sequence + 1e-15)


def test_empty_sample_is_rejected():
    with pytest.raises(ConfigurationError):
        weak_strong_density(slit_disk(), np.zeros(0, dtype=complex))


def test_estimator_matches_function():
    est = CapacityDensity(eps=1 / 8, n_max=12, n_samples=8).fit(slit_disk())
    assert est.weak_ == 1.0 and est.strong_ == 1.0


def test_wiener_terms_on_disk_boundary(oracles):
    bounds = oracles["wiener_disk_term_bounds"]
    sums = wiener_sum(unit_disk(), 8, 1 + 0j)
    terms = np.diff(np.concatenate([[0.0], sums]))
    for k, t in enumerate(terms, start=1):
        assert bounds["lower"][str(k)] <= t <= bounds["upper"]


def test_wiener_partial_sums_grow_linearly():
    sums = wiener_sum(unit_disk(), 16, 1 + 0j)
    terms = np.diff(sums)
    assert terms[-1] == pytest.approx(1 / math.log(2), rel=0.15)


def test_wiener_isolated_point_contributes_nothing():
    assert np.all(wiener_sum(punctured_disk(), 12, 0j) == 0.0)


def test_wiener_rejects_zero_truncation():
    with pytest.raises(ConfigurationError):
        wiener_sum(unit_disk(), 0, 1 + 0j)


def test_zwonek_sum_diverges_toward_boundary():
    vals = [zwonek_sum(unit_disk(), 1 - 2.0 ** -k + 0j, 12) for k in (3, 5, 7)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] / vals[1] > 4


def test_zwonek_sum_centre_small_truncation_is_zero():
    assert zwonek_sum(unit_disk(), 0j, 3) == 0.0


def test_zwonek_sum_punctured_point_is_bounded():
    total, terms = zwonek_sum(punctured_disk(), 1e-3 + 0j, 14, terms=True)
    assert total == 0.0 and np.all(terms == 0.0)


def test_disk_green_decay_exponent():
    deltas = np.geomspace(1e-3, 1e-1, 12)
    z = approach_samples(1 + 0j, -1 + 0j, deltas)
    fit = fit_green_decay(unit_disk(), 0j, z, "power", GridSpec.graded(1 / 128, (1 + 0j,), 1e-4))
    assert fit.exponent == pytest.approx(1.0, abs=0.1)
    assert fit.r2 >= 0.99


def test_decay_fit_needs_twelve_samples():
    with pytest.raises(PreconditionError):
        fit_decay(np.geomspace(1e-3, 1e-1, 11), np.ones(11))


def test_decay_fit_needs_two_decades():
    with pytest.raises(PreconditionError):
        fit_decay(np.geomspace(1e-2, 5e-1, 12), np.ones(12))


def test_decay_regressor_recovers_exponents():
    d = np.geomspace(1e-4, 1e-1, 15)
    reg = DecayRegressor("power").fit(d[:, None], 3 * d ** 0.5)
    assert reg.exponent_ == pytest.approx(0.5, abs=1e-12)
    assert reg.score(d[:, None], 3 * d ** 0.5) == pytest.approx(1.0, abs=1e-12)
    log_reg = DecayRegressor("logpower").fit(d[:, None], (-np.log(d)) ** -2.0)
    assert log_reg.exponent_ == pytest.approx(2.0, abs=1e-12)


def test_chain_of_identical_points_is_empty():
    assert chain_lower_bound(unit_disk(), 0j, 0j, 4.0).length == 0


def test_chain_counts_disk_scales():
    z = complex(1 - 2.0 ** -6, 0.0)
    res = chain_lower_bound(unit_disk(), 0j, z, 4.0, 0.5, grid=GridSpec.graded(1 / 128, (1 + 0j,), 2.0 ** -12))
    assert abs(res.length - 6) <= 1


def test_disk_distance_growth_slope(oracles):
    z = np.linspace(0.9, 0.99, 10) * np.exp(0.3j)
    fit = distance_growth_check(ConformalBergmanKernel(disk_map()), 0j, z, "log", route="closed")
    assert fit.slope == pytest.approx(oracles["disk_distance_log_slope_limit"], rel=0.10)


def test_distance_growth_rejects_unknown_law():
    with pytest.raises(ConfigurationError):
        distance_growth_check(ConformalBergmanKernel(disk_map()), 0j, [0.5 + 0j], "cubic")


@pytest.fixture(scope="module")
def comb_potential():
    C = comb_domain(0.5, 2.0)
    E = CompactSet((Disk(-0.6 + 0j, 0.1),))
    spec = GridSpec.graded(1 / 128, (0j,), 1e-4)
    return C, E, spec, capacity_potential(E, C, spec)


# beta close to the fitted log-power decay exponent of the comb (about 1.94)
BAND_BETA = 2.0


def test_band_inclusion_deep_interior_is_trivial(comb_potential):
    C, E, spec, phi = comb_potential
    assert green_band_inclusion(C, E, -0.45 + 0j, BAND_BETA, 8.0, spec, phi=phi)


def test_band_inclusion_calibrated_near_comb(comb_potential):
    C, E, spec, phi = comb_potential
    c = calibrate_constant(lambda c: green_band_inclusion(C, E, -0.05 + 0j, BAND_BETA, c, spec, phi=phi))
    assert c in (2.0, 4.0, 8.0)


def test_band_inclusion_small_constant_fails(comb_potential):
    C, E, spec, phi = comb_potential
    assert not green_band_inclusion(C, E, -0.05 + 0j, BAND_BETA, 1.0, spec, phi=phi)


def test_holder_modulus_constant_is_finite(comb_potential):
    _, _, _, phi = comb_potential
    w = -0.05 + 0j
    pts = w + 0.02 * np.exp(2j * np.pi * np.arange(8) / 8)
    c0 = holder_modulus_constant(phi, w, pts, 1.0)
    assert 0 < c0 < math.inf


def test_holder_modulus_rejects_far_pairs(comb_potential):
    _, _, _, phi = comb_potential
    with pytest.raises(PreconditionError):
        holder_modulus_constant(phi, -0.05 + 0j, [0.96 + 0j], 1.0)
