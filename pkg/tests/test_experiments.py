import math

import numpy as np
import pytest

from striplab.errors import StripLabError
from striplab.experiments import (BracketVerdict, ConvergenceReport,
                                  DiscretizationPolicy, SweepConfig, SweepEntry,
                                  fit_rate, pattern_lateral_h, realized_width_scale,
                                  report_to_dict, run_sweep, sharpness_probe,
                                  solve_pattern, verify_bracketing,
                                  write_report_csv, write_report_json)
from striplab.geometry import (Constant, CylinderGeometry, Disk, RandomBounded,
                               WidthLaw, build_pattern, classify_regime)
from striplab.mesh import Grading
from striplab.rng import derive_seed


def synthetic_report(d_fn, N_list=(4, 8, 16, 32), regime="DirichletLimit",
                     eta_fn=None, height=math.pi):
    """Fabricated report with planted differences for fit tests."""
    entries = []
    for N in N_list:
        eps = height / (math.pi * N)
        eta = eta_fn(eps) if eta_fn else eps
        mu = -1.0 / (eps * math.log(eta))
        d1 = d_fn(eps, eta, mu)
        entries.append(SweepEntry(
            N=N, eps=eps, width_scale_nominal=eta, width_scale_realized=eta,
            clamped=False, rate_scale=mu, inner_rate_scale=None, h=0.05, n_max=1,
            eigenvalues=[1.0], budgets=[0.0], differences=[d1],
            predictor=eps * (abs(math.log(eta)) + 1.0), ratios=[abs(d1)],
            tag_measure_error=0.0, converged=True, sign_ok=[True],
        ))
    return ConvergenceReport(
        regime=regime, robin_coefficient=0.0, family="constant", k=1,
        limit_eigenvalues=[1.0], limit_method="closed_form", entries=entries,
        sup_ratio=[1.0], ratio_window=[(1.0, 1.0)], sign_verdict=True,
        uniformity_verdict=True, all_converged=True,
    )


class TestFitRate:
    def test_exact_single_predictor(self):
        rep = synthetic_report(lambda eps, eta, mu: 2.0 * eps * math.log(math.sin(eta)))
        fit = fit_rate(rep, 1, "eps_log_sin")
        assert fit.coefficients[0] == pytest.approx(2.0, abs=1e-10)
        assert fit.residual_norm < 1e-12
        assert fit.loglog_slope == pytest.approx(1.0, abs=1e-10)

    def test_exact_two_parameter(self):
        rep = synthetic_report(lambda eps, eta, mu: 3.0 * mu + 5.0 * eps**2,
                               eta_fn=lambda eps: math.exp(-1.0 / eps**1.5))
        fit = fit_rate(rep, 1, "mu_eps2")
        assert fit.coefficients[0] == pytest.approx(3.0, abs=1e-10)
        assert fit.coefficients[1] == pytest.approx(5.0, abs=1e-10)
        assert fit.residual_norm < 1e-12

    def test_needs_enough_points(self):
        rep = synthetic_report(lambda eps, eta, mu: eps, N_list=(4, 8))
        with pytest.raises(StripLabError, match=">= 3"):
            fit_rate(rep, 1, "eps_log")
        rep3 = synthetic_report(lambda eps, eta, mu: eps, N_list=(4, 8, 16))
        with pytest.raises(StripLabError, match=">= 4"):
            fit_rate(rep3, 1, "mu_eps2")

    def test_subset_fit(self):
        rep = synthetic_report(lambda eps, eta, mu: 2.0 * eps * math.log(math.sin(eta)))
        fit = fit_rate(rep, 1, "eps_log_sin", subset=[8, 16, 32])
        assert fit.points == 3
        assert fit.coefficients[0] == pytest.approx(2.0, abs=1e-10)

    def test_degenerate_predictor_diagnosed(self):
        rep = synthetic_report(lambda eps, eta, mu: eps, N_list=(8, 8, 8, 8))
        with pytest.raises(StripLabError, match="nearly constant"):
            fit_rate(rep, 1, "eps_log")

    def test_unknown_predictor(self):
        rep = synthetic_report(lambda eps, eta, mu: eps)
        with pytest.raises(StripLabError, match="unknown predictor"):
            fit_rate(rep, 1, "bogus")


class TestRealizedWidthScale:
    def test_no_clamp_when_resolvable(self):
        regime = classify_regime(WidthLaw("power", p=1.0))
        policy = DiscretizationPolicy(floor_coef=0.004)
        nom, real, clamped = realized_width_scale(regime, 0.25, policy)
        assert (nom, real, clamped) == (0.25, 0.25, False)

    def test_clamps_exponential(self):
        regime = classify_regime(WidthLaw("exponential", c=1.0, q=2.0))
        policy = DiscretizationPolicy(floor_coef=0.004)
        nom, real, clamped = realized_width_scale(regime, 0.125, policy)
        assert clamped and real == 0.004 and nom < 1e-27


class TestVerifyBracketing:
    def test_degenerate_constant(self, disk_pi):
        p = build_pattern(disk_pi, 2, [Constant(0.3)] * 2, [Constant(0.3)] * 2)
        v = verify_bracketing(p, 3, DiscretizationPolicy(base_h=0.15, coarse_h=0.2))
        assert v.degenerate and v.passed()
        assert v.inner_eigenvalues == v.outer_eigenvalues == v.pattern_eigenvalues

    def test_meridian_distinct_widths(self, disk_pi):
        lower = [Constant(0.2), Constant(0.5)]
        upper = [Constant(0.4), Constant(0.3)]
        p = build_pattern(disk_pi, 2, lower, upper)
        v = verify_bracketing(p, 4, DiscretizationPolicy(base_h=0.12, coarse_h=0.15))
        assert not v.degenerate
        assert v.passed()
        assert np.all(np.array(v.inner_eigenvalues) <= np.array(v.outer_eigenvalues))

    def test_random_bounded_3d(self, disk_pi):
        N = 2
        lower = [RandomBounded(0.2, 0.5, derive_seed(17, N, j, 0), samples=64)
                 for j in range(N)]
        upper = [RandomBounded(0.2, 0.5, derive_seed(17, N, j, 1), samples=64)
                 for j in range(N)]
        p = build_pattern(disk_pi, N, lower, upper)
        v = verify_bracketing(p, 3, DiscretizationPolicy(h_cross=0.45,
                                                         layers_per_half_period=3,
                                                         tol=1e-9))
        assert v.passed() and not v.degenerate
        # extremes genuinely bracket the nested triple
        assert v.neumann_eigenvalues[0] < v.inner_eigenvalues[0]
        assert v.outer_eigenvalues[0] < v.dirichlet_eigenvalues[0]


@pytest.fixture(scope="module")
def small_report(disk_pi):
    regime = classify_regime(WidthLaw("power", p=1.0))
    policy = DiscretizationPolicy(base_h=0.08, coarse_h=0.1)
    config = SweepConfig(regime, disk_pi, "constant", (4, 8), k=2, policy=policy)
    return run_sweep(config)


class TestRunSweep:

    def test_dirichlet_sign_within_budget(self, small_report):
        assert small_report.sign_verdict
        for e in small_report.entries:
            for d, b in zip(e.differences, e.budgets):
                assert d <= b

    def test_entries_recorded(self, small_report):
        e = small_report.entries[0]
        assert e.N == 4 and e.eps == pytest.approx(0.25)
        assert e.width_scale_realized == pytest.approx(0.25)
        assert not e.clamped and e.converged
        assert e.tag_measure_error == 0.0

    def test_threads_give_identical_report(self, disk_pi, small_report):
        regime = classify_regime(WidthLaw("power", p=1.0))
        policy = DiscretizationPolicy(base_h=0.08, coarse_h=0.1)
        config = SweepConfig(regime, disk_pi, "constant", (4, 8), k=2,
                             policy=policy, threads=2)
        rep2 = run_sweep(config)
        assert report_to_dict(rep2) == report_to_dict(small_report)

    def test_serialization_roundtrip(self, small_report, tmp_path):
        import json
        p1 = tmp_path / "report.json"
        write_report_json(small_report, p1)
        write_report_csv(small_report, tmp_path / "report.csv")
        data = json.loads(p1.read_text())
        assert data["regime"] == "DirichletLimit"
        assert len(data["entries"]) == 2
        lines = (tmp_path / "report.csv").read_text().splitlines()
        assert lines[0] == "rank,eps,lambda,d,predictor,ratio"
        assert len(lines) == 1 + 2 * 2

    def test_sandwich_family_within_bounds(self, disk_pi):
        regime = classify_regime(WidthLaw("exponential", c=1.0, q=1.0),
                                 WidthLaw("constant", value=0.5))
        policy = DiscretizationPolicy(base_h=0.08, coarse_h=0.1)
        config = SweepConfig(regime, disk_pi, "sandwich", (4,), k=1,
                             policy=policy, seed=3)
        from striplab.experiments import _family_pattern
        eta = regime.width_scale(disk_pi.height / (math.pi * 4))
        pattern = _family_pattern(config, 4, eta)
        for prof in pattern.lower_profiles + pattern.upper_profiles:
            assert 0.5 * eta - 1e-15 <= prof.value <= eta + 1e-15


class TestSharpnessProbe:
    def test_needs_three_points(self, disk_pi):
        regime = classify_regime(WidthLaw("power", p=1.0))
        config = SweepConfig(regime, disk_pi, "constant", (8,), k=1)
        with pytest.raises(StripLabError, match="3"):
            sharpness_probe(config)

    def test_rejects_critical_regime(self, disk_pi):
        regime = classify_regime(WidthLaw("exponential", c=1.0, q=1.0))
        config = SweepConfig(regime, disk_pi, "constant", (4, 8, 16), k=1)
        with pytest.raises(StripLabError, match="Dirichlet and Neumann"):
            sharpness_probe(config)


class TestSolvePattern:
    def test_budget_and_monotone_levels(self, disk_pi):
        p = build_pattern(disk_pi, 2, [Constant(0.3)] * 2, [Constant(0.3)] * 2)
        res = solve_pattern(p, 2, DiscretizationPolicy(base_h=0.1, coarse_h=0.12))
        assert res.converged
        # refined-mesh eigenvalues never exceed the coarse ones (nested spaces)
        assert np.all(res.eigenvalues <= res.coarse_eigenvalues + 1e-10)
        assert np.all(res.budgets >= 0)

    def test_lateral_h_cap(self, disk_pi):
        p = build_pattern(disk_pi, 8, [Constant(0.05)] * 8, [Constant(0.05)] * 8)
        h = pattern_lateral_h(p, DiscretizationPolicy(base_h=0.5))
        assert h == pytest.approx(0.5 * p.eps * 0.1)
