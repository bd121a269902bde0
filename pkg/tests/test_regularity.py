import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouvillekit.da import DAParams
from liouvillekit.dynamics import SkeletonGraph, skeleton_graph
from liouvillekit.models import constant_rate_model, da_chart
from liouvillekit.regularity import (PersistenceError, bunching_estimate, dyadic_times,
                                     holder_exponent, perturbed_system, skeleton_persistence)
from liouvillekit.systems import bundled_system

N_WEIERSTRASS = 2**16


def weierstrass(n=N_WEIERSTRASS, terms=16):
    x = np.arange(n) / n
    return sum(2.0 ** (-k / 2) * np.cos(2 * np.pi * 2**k * x) for k in range(terms))


class TestBunching:
    def test_cat(self, cat):
        rep = bunching_estimate(cat, T_max=16, n_orbits=8)
        assert abs(rep.B_s - 2.0) <= 1e-12
        assert rep.n_samples == 8

    def test_constant_rates(self):
        rep = bunching_estimate(constant_rate_model(1.0, -0.5), T_max=8, n_orbits=4)
        assert rep.B_s == pytest.approx(1.5, abs=1e-12)

    def test_da_fixed_orbit_dominates(self):
        p = DAParams()
        rep = bunching_estimate(da_chart(p), T_max=64, n_orbits=32)
        bound = 1.0 - p.nubar / p.mu
        assert rep.B_s <= bound + 1e-9
        assert rep.B_s == pytest.approx(bound, abs=1e-9)
        assert rep.B_s > 0

    def test_threads_are_bit_identical(self):
        m = da_chart(DAParams())
        a = bunching_estimate(m, T_max=8, n_orbits=20, threads=1)
        b = bunching_estimate(m, T_max=8, n_orbits=20, threads=4)
        assert np.array_equal(a.per_point, b.per_point)

    def test_seed_reproducible(self):
        m = da_chart(DAParams())
        a = bunching_estimate(m, T_max=4, n_orbits=10, seed=3)
        b = bunching_estimate(m, T_max=4, n_orbits=10, seed=3)
        assert a.to_dict() == b.to_dict()

    def test_dyadic_times(self):
        assert dyadic_times(64) == [1, 2, 4, 8, 16, 32, 64]
        assert dyadic_times(1) == [1.0]
        with pytest.raises(ValueError):
            dyadic_times(0.5)


class TestPersistence:
    @pytest.fixture
    def base(self):
        return bundled_system("exp-symmetric-cat")

    def test_zero_perturbation(self, base):
        (rep,) = skeleton_persistence(base, "cos(2*pi*theta)", [0.0])
        assert rep.c0_distance == 0.0

    def test_linear_ratio(self, base):
        (rep,) = skeleton_persistence(base, "cos(2*pi*theta)", [1e-3])
        assert rep.ratio == pytest.approx(0.5, rel=1e-6)

    def test_ratio_is_stable_across_scales(self, base):
        reps = skeleton_persistence(base, "cos(2*pi*theta)", [1e-2, 1e-3, 1e-4])
        ratios = [r.ratio for r in reps]
        assert max(ratios) / min(ratios) - 1 < 0.01

    def test_json_spec_perturbation(self, base):
        (rep,) = skeleton_persistence(
            base, {"type": "cos_theta", "params": {"c0": 0.0, "a": 1.0}}, [1e-3])
        assert rep.ratio == pytest.approx(0.5, rel=1e-6)

    def test_large_perturbation_is_rejected(self, base):
        with pytest.raises(PersistenceError, match="eps=1"):
            skeleton_persistence(base, "cos(2*pi*theta)", [1.0])

    def test_needs_exponential_gauge(self):
        with pytest.raises(PersistenceError):
            perturbed_system(bundled_system("fibration-cat"), "1", 1e-3)

    def test_linear_profile_goes_through_generic_solver(self):
        sys = bundled_system("linear-symmetric-cat")
        assert perturbed_system(sys, "1", 1e-3).closed_form_kind is None
        (rep,) = skeleton_persistence(sys, "1", [1e-4])
        assert rep.c0_distance > 0


class TestHolder:
    def test_constant_is_degenerate(self):
        est = holder_exponent(np.full(4096, 0.25))
        assert est.degenerate and est.exponent == 1.0

    def test_smooth_curve(self):
        x = np.arange(N_WEIERSTRASS) / N_WEIERSTRASS
        est = holder_exponent(np.sin(2 * np.pi * x) + 0.3 * np.cos(6 * np.pi * x))
        assert not est.degenerate
        assert est.exponent == pytest.approx(1.0, abs=0.05)

    def test_weierstrass(self):
        est = holder_exponent(weierstrass())
        assert est.exponent == pytest.approx(0.5, abs=0.05)

    def test_too_few_scales(self):
        with pytest.raises(ValueError):
            holder_exponent(np.zeros(256))
        with pytest.raises(ValueError):
            holder_exponent(weierstrass(4096), scales=[16, 32])

    def test_skeleton_graph_input(self):
        sys = bundled_system("exp-cos-quarter-cat")
        theta = np.arange(4096) / 4096
        pts = np.column_stack([np.zeros_like(theta), np.zeros_like(theta), theta])
        graph = skeleton_graph(sys, pts)
        assert isinstance(graph, SkeletonGraph)
        assert holder_exponent(graph).exponent == pytest.approx(1.0, abs=0.05)

    @settings(max_examples=20)
    @given(st.floats(0.1, 10.0), st.floats(-5, 5))
    def test_affine_invariance(self, scale, shift):
        w = weierstrass(4096, 12)
        a = holder_exponent(w).exponent
        b = holder_exponent(scale * w + shift).exponent
        assert b == pytest.approx(a, abs=1e-9)

    def test_range(self):
        rng = np.random.default_rng(0)
        est = holder_exponent(rng.standard_normal(4096))
        assert 0 < est.exponent <= 1
