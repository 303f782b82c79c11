"""Convexity certificates, consistency sweeps, filtering curves, threshold studies."""

import math

import numpy as np
import pytest

from relaxopt import (
    CosineSeries,
    CosineTerm,
    EstimatorConfig,
    ObjectiveKind,
    ObjectiveSpec,
    Verdict,
    certify_convexity,
    consistency_sweep,
    filtering_curve,
    rastrigin,
    sigma_star,
    sphere,
    stochastic_threshold_study,
)
from relaxopt.analysis import worst_case_probes
from relaxopt.closed_form import hessian_disturbance_bound

TWO_PI = 2.0 * math.pi


def axis_spec(a, xi, psi=0.0, m=1.0):
    return ObjectiveSpec(
        kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=1, quad_strength=m,
        cosine=CosineSeries((CosineTerm(a, np.array([xi]), psi),)),
    )


def random_spec(rng, max_dim=3):
    n = int(rng.integers(1, max_dim + 1))
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        xi = rng.normal(size=n)
        xi *= rng.uniform(0.5, 4.0 * math.pi) / np.linalg.norm(xi)
        terms.append(CosineTerm(rng.uniform(-10, 10), xi, rng.uniform(0, TWO_PI)))
    return ObjectiveSpec(
        kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=n, quad_strength=rng.uniform(0.2, 3.0),
        cosine=CosineSeries(tuple(terms)),
    )


class TestCertifyConvexity:
    def test_certified_above_threshold(self):
        cert = certify_convexity(rastrigin(2), 0.6, (-1.0, 1.0, 41), 100, 0.0, seed=1)
        assert cert.verdict is Verdict.CERTIFIED_ON_GRID
        assert cert.min_eigenvalue_observed > 0.0

    def test_refuted_below_threshold_at_worst_point(self):
        cert = certify_convexity(rastrigin(2), 0.3, (-1.0, 1.0, 41), 100, 0.0, seed=1)
        assert cert.verdict is Verdict.REFUTED_AT
        np.testing.assert_allclose(cert.worst_theta, [0.5, 0.5], atol=1e-12)
        expected = 2.0 - 40.0 * math.pi**2 * math.exp(-0.18 * math.pi**2)
        assert cert.min_eigenvalue_observed == pytest.approx(expected, abs=1e-10)

    def test_pure_quadratic_certified_at_full_modulus(self):
        m = 1.7
        cert = certify_convexity(sphere(2, m), 0.9, (-2.0, 2.0, 11), 50, 2.0 * m, seed=0)
        assert cert.verdict is Verdict.CERTIFIED_ON_GRID
        assert cert.min_eigenvalue_observed == 2.0 * m

    def test_never_refuted_above_sigma_star(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            spec = random_spec(rng)
            sigma = max(sigma_star(spec), 1e-3) * 1.0001
            points = 9 if spec.dim == 3 else 15
            cert = certify_convexity(spec, sigma, (-1.0, 1.0, points), 40, 0.0,
                                     seed=int(rng.integers(1 << 31)))
            assert cert.verdict is Verdict.CERTIFIED_ON_GRID

    def test_refuted_below_sigma_star_via_analytic_probe(self):
        rng = np.random.default_rng(43)
        checked = 0
        while checked < 25:
            a = rng.uniform(1.0, 10.0)
            xi = rng.uniform(1.0, 4.0 * math.pi)
            psi = rng.uniform(0.0, TWO_PI)
            m = rng.uniform(0.1, 1.0)
            if a * xi**2 <= 3.0 * m:
                continue
            spec = axis_spec(a, xi, psi, m)
            sigma = sigma_star(spec) * (1.0 - 1e-6)
            # coarse grid: the analytic probe must carry the refutation
            cert = certify_convexity(spec, sigma, (-0.1, 0.1, 3), 0, 0.0, seed=0)
            assert cert.verdict is Verdict.REFUTED_AT
            checked += 1

    def test_worst_case_probe_locations(self):
        probes = worst_case_probes(rastrigin(2))
        np.testing.assert_allclose(probes[0], [0.5, 0.5])
        assert len(probes) == 3

    def test_requires_closed_form_family(self):
        spec = ObjectiveSpec(kind=ObjectiveKind.BLACK_BOX, dim=1, blackbox_eval=lambda x: 0.0)
        with pytest.raises(ValueError):
            certify_convexity(spec, 1.0, (-1.0, 1.0, 3), 0, 0.0)

    def test_no_evidence_is_inconclusive(self):
        cert = certify_convexity(sphere(2), 1.0, (0.0, 0.0, 0), 0, 0.0, seed=0)
        assert cert.verdict is Verdict.INCONCLUSIVE
        assert math.isnan(cert.min_eigenvalue_observed)


class TestConsistencySweep:
    def test_gap_formula_and_small_sigma_value(self):
        spec = rastrigin(1)
        sigmas = [0.5, 0.1, 0.01]
        report = consistency_sweep(spec, [0.0], sigmas, [0.1], EstimatorConfig(20000, 1))
        for s, gap in zip(report.sigma_schedule, report.gaps):
            expected = s**2 + 10.0 * (1.0 - math.exp(-2.0 * math.pi**2 * s**2))
            assert gap == pytest.approx(expected, abs=1e-10)
        assert report.gaps[-1] < 0.02

    def test_gap_vanishes_in_small_sigma_limit(self):
        report = consistency_sweep(
            rastrigin(1), [0.0], [1e-8], [0.1], EstimatorConfig(1000, 1)
        )
        assert report.gaps[0] <= 1e-6

    def test_gaps_decrease_along_geometric_schedule(self):
        sigmas = [1.6 * 0.5**k for k in range(8)]
        report = consistency_sweep(
            rastrigin(2), [0.0, 0.0], sigmas, [0.5], EstimatorConfig(1000, 1)
        )
        assert all(b < a for a, b in zip(report.gaps, report.gaps[1:]))

    def test_concentration_cells_small_when_sigma_below_delta_fifth(self):
        spec = rastrigin(1)
        deltas = [0.5, 1.0]
        sigmas = [0.1, 0.05, 0.01]
        report = consistency_sweep(spec, [0.0], sigmas, deltas, EstimatorConfig(100000, 5))
        for delta, sigma, mass, se in report.epsilon_delta_table:
            if sigma <= delta / 5.0:
                assert mass < 1e-3 + 4.0 * se

    def test_rejects_bad_schedules(self):
        with pytest.raises(ValueError):
            consistency_sweep(rastrigin(1), [0.0], [], [0.1], EstimatorConfig(100, 0))
        with pytest.raises(ValueError):
            consistency_sweep(rastrigin(1), [0.0], [0.5, -1.0], [0.1], EstimatorConfig(100, 0))

    def test_blackbox_gap_falls_back_to_monte_carlo(self):
        # |x| has no closed-form relaxation here; E|x| at theta=0 is
        # sigma*sqrt(2/pi), so the gap to f(0)=0 follows that law
        spec = ObjectiveSpec(
            kind=ObjectiveKind.BLACK_BOX, dim=1, blackbox_eval=lambda x: abs(float(x[0]))
        )
        report = consistency_sweep(spec, [0.0], [1.0, 0.1], [1.0], EstimatorConfig(50000, 3))
        for sigma, gap in zip(report.sigma_schedule, report.gaps):
            expected = sigma * math.sqrt(2.0 / math.pi)
            assert gap == pytest.approx(expected, rel=0.05)


class TestFilteringCurve:
    def test_no_damping_at_zero(self):
        spec = rastrigin(2)
        curve = filtering_curve(spec, [0.0])
        expected = sum(abs(t.amplitude) * t.frequency_norm**2 for t in spec.cosine.terms)
        assert curve[0][1] == pytest.approx(expected, rel=1e-12)

    def test_crosses_two_m_at_threshold_single_term(self):
        spec = rastrigin(1)
        s = sigma_star(spec)
        curve = filtering_curve(spec, [s])
        assert curve[0][1] == pytest.approx(2.0, abs=1e-10)

    def test_crosses_two_m_at_threshold_multi_term(self):
        spec = ObjectiveSpec(
            kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=2, quad_strength=1.0,
            cosine=CosineSeries((
                CosineTerm(10.0, np.array([TWO_PI, 2.0]), 0.0),
                CosineTerm(4.0, np.array([1.0, 5.0]), 0.4),
            )),
        )
        s = sigma_star(spec)
        assert filtering_curve(spec, [s])[0][1] == pytest.approx(2.0, abs=1e-10)

    def test_strictly_decreasing(self):
        curve = filtering_curve(rastrigin(1), np.linspace(0.0, 1.0, 30))
        bounds = [b for _, b in curve]
        assert all(b < a for a, b in zip(bounds, bounds[1:]))

    def test_doubling_sigma_quadruples_log_attenuation(self):
        spec = rastrigin(1)
        b1 = hessian_disturbance_bound(spec, 0.2)
        b2 = hessian_disturbance_bound(spec, 0.4)
        w = 10.0 * TWO_PI**2
        assert math.log(b2 / w) == pytest.approx(4.0 * math.log(b1 / w), rel=1e-9)


class TestThresholdStudy:
    def single_term_base(self):
        return CosineSeries((CosineTerm(1.0, np.array([TWO_PI]), 0.0),))

    def test_single_frequency_law(self):
        rows = stochastic_threshold_study(self.single_term_base(), [1.0, 10.0], [1, 2, 3], 1.0)
        delta = rows[1].exact_single_frequency**2 - rows[0].exact_single_frequency**2
        assert delta == pytest.approx(math.log(10.0) / (2.0 * math.pi**2), abs=1e-12)

    def test_small_budget_already_convex(self):
        base = CosineSeries((
            CosineTerm(1.0, np.array([1.0, 0.2]), 0.0),
            CosineTerm(1.0, np.array([0.3, 1.1]), 0.0),
        ))
        rows = stochastic_threshold_study(base, [0.5], list(range(10)), 1.0)
        assert rows[0].max_sigma_star == 0.0

    def test_growth_is_sublinear_in_any_root(self):
        rows = stochastic_threshold_study(
            self.single_term_base(), [1.0, 10.0, 100.0, 1000.0, 10000.0], [1], 1.0
        )
        for d in (1, 2, 4):
            ratios = [r.max_sigma_star / r.scale ** (1.0 / d) for r in rows[1:]]
            assert all(b <= a for a, b in zip(ratios, ratios[1:]))

    def test_multi_term_mean_below_max(self):
        base = CosineSeries((
            CosineTerm(1.0, np.array([TWO_PI, 1.0]), 0.0),
            CosineTerm(1.0, np.array([1.0, TWO_PI]), 0.0),
        ))
        rows = stochastic_threshold_study(base, [5.0, 50.0], list(range(20)), 1.0)
        for row in rows:
            assert row.mean_sigma_star <= row.max_sigma_star
            assert math.isnan(row.exact_single_frequency)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="increasing"):
            stochastic_threshold_study(self.single_term_base(), [10.0, 1.0], [1], 1.0)
        with pytest.raises(ValueError, match="m must be"):
            stochastic_threshold_study(self.single_term_base(), [1.0], [1], 0.0)
