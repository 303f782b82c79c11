"""Objective evaluation, gradients, validation, and config round-trips."""

import math

import numpy as np
import pytest

from relaxopt import (
    CosineSeries,
    CosineTerm,
    EstimatorConfig,
    ObjectiveKind,
    ObjectiveSpec,
    RelaxationParams,
    eval_discrete,
    eval_objective,
    eval_objective_grad,
    onemax,
    rastrigin,
    sphere,
)
from relaxopt.estimators import finite_difference_grad

TWO_PI = 2.0 * math.pi


def single_cosine_spec(amplitude=10.0, frequency=TWO_PI, phase=0.0, m=1.0):
    return ObjectiveSpec(
        kind=ObjectiveKind.QUAD_PLUS_COSINE,
        dim=1,
        quad_strength=m,
        cosine=CosineSeries((CosineTerm(amplitude, np.array([frequency]), phase),)),
    )


class TestEvaluation:
    def test_value_at_origin(self):
        assert eval_objective(single_cosine_spec(), [0.0]) == -10.0

    def test_value_at_half(self):
        # 0.25 - 10*cos(pi) = 10.25
        assert eval_objective(single_cosine_spec(), [0.5]) == pytest.approx(10.25, abs=1e-12)

    def test_pure_quadratic(self):
        assert eval_objective(sphere(2), [3.0, 4.0]) == 25.0

    def test_value_at_origin_equals_negated_cosine_sum(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            terms = tuple(
                CosineTerm(rng.uniform(-10, 10), rng.normal(size=3), rng.uniform(0, TWO_PI))
                for _ in range(3)
            )
            spec = ObjectiveSpec(
                kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=3, quad_strength=1.0,
                cosine=CosineSeries(terms),
            )
            value = eval_objective(spec, np.zeros(3))
            assert value == -float(np.cos(spec.cosine.phases()) @ spec.cosine.amplitudes())
            expected = -sum(t.amplitude * math.cos(t.phase) for t in terms)
            assert value == pytest.approx(expected, abs=1e-12)

    def test_blackbox_delegation(self):
        spec = ObjectiveSpec(
            kind=ObjectiveKind.BLACK_BOX, dim=2, blackbox_eval=lambda x: float(x[0] - x[1])
        )
        assert eval_objective(spec, [3.0, 1.0]) == 2.0


class TestGradient:
    def test_zero_at_symmetric_origin(self):
        np.testing.assert_array_equal(eval_objective_grad(single_cosine_spec(), [0.0]), [0.0])

    def test_quarter_period_point(self):
        # 0.5 + 10*sin(pi/2)*2*pi
        got = eval_objective_grad(single_cosine_spec(), [0.25])[0]
        assert got == pytest.approx(0.5 + 20.0 * math.pi, abs=1e-10)

    def test_pure_quadratic_gradient(self):
        np.testing.assert_allclose(eval_objective_grad(sphere(2), [1.0, 2.0]), [2.0, 4.0])

    def test_matches_central_differences(self):
        # Oracle bound: per-component truncation of a central difference on a
        # cosine of frequency xi is |a| * |xi_i|^3 * h^2 / 6; the quadratic
        # part differentiates exactly.  1e-6 absolute covers rounding noise.
        rng = np.random.default_rng(7)
        h = 1e-4
        for _ in range(5):
            n = int(rng.integers(1, 4))
            terms = []
            for _ in range(int(rng.integers(1, 4))):
                xi = rng.normal(size=n)
                xi *= rng.uniform(0.5, 4.0 * math.pi) / np.linalg.norm(xi)
                terms.append(CosineTerm(rng.uniform(-10, 10), xi, rng.uniform(0, TWO_PI)))
            spec = ObjectiveSpec(
                kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=n, quad_strength=rng.uniform(0, 2),
                cosine=CosineSeries(tuple(terms)),
            )
            truncation = sum(
                abs(t.amplitude) * np.abs(t.frequency) ** 3 for t in terms
            ) * h**2 / 6.0
            for _ in range(20):
                x = rng.uniform(-2, 2, size=n)
                fd = finite_difference_grad(lambda p: eval_objective(spec, p), x, h)
                delta = np.abs(eval_objective_grad(spec, x) - fd)
                assert np.all(delta <= 1e-6 + truncation)

    def test_matches_central_differences_mild_frequencies(self):
        # With ||xi|| <= 1.5 the truncation bound sits below 1e-8, so the
        # plain 1e-6 componentwise tolerance is sound.
        rng = np.random.default_rng(8)
        spec = ObjectiveSpec(
            kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=2, quad_strength=1.0,
            cosine=CosineSeries((
                CosineTerm(10.0, np.array([1.2, -0.7]), 0.3),
                CosineTerm(-6.0, np.array([0.4, 1.1]), 1.7),
            )),
        )
        for _ in range(100):
            x = rng.uniform(-3, 3, size=2)
            fd = finite_difference_grad(lambda p: eval_objective(spec, p), x, 1e-4)
            np.testing.assert_allclose(eval_objective_grad(spec, x), fd, atol=1e-6)


class TestDiscrete:
    def test_all_ones(self):
        assert eval_discrete(onemax(4), [1, 1, 1, 1]) == -4.0

    def test_all_zeros(self):
        assert eval_discrete(onemax(4), [0, 0, 0, 0]) == 0.0

    def test_count(self):
        assert eval_discrete(onemax(4), [1, 0, 1, 0]) == -2.0

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError, match="binary"):
            eval_discrete(onemax(2), [0.5, 1.0])

    def test_rejects_continuous_eval(self):
        with pytest.raises(ValueError):
            eval_objective(onemax(2), [0.0, 1.0])


class TestValidation:
    def test_rejects_zero_frequency(self):
        with pytest.raises(ValueError, match="nonzero"):
            CosineTerm(1.0, np.zeros(2), 0.0)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            eval_objective(rastrigin(2), [1.0])

    def test_rejects_nan_input(self):
        with pytest.raises(ValueError, match="finite"):
            eval_objective(rastrigin(1), [float("nan")])

    def test_rejects_cosine_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            ObjectiveSpec(
                kind=ObjectiveKind.QUAD_PLUS_COSINE, dim=2, quad_strength=1.0,
                cosine=CosineSeries((CosineTerm(1.0, np.array([1.0]), 0.0),)),
            )

    def test_blackbox_requires_eval(self):
        with pytest.raises(ValueError, match="blackbox_eval"):
            ObjectiveSpec(kind=ObjectiveKind.BLACK_BOX, dim=1)

    def test_blackbox_without_grad_has_no_gradient(self):
        spec = ObjectiveSpec(kind=ObjectiveKind.BLACK_BOX, dim=1, blackbox_eval=lambda x: 0.0)
        with pytest.raises(ValueError, match="gradient"):
            eval_objective_grad(spec, [0.0])

    def test_relaxation_params_require_positive_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            RelaxationParams([0.0], 0.0)

    def test_estimator_config_bounds(self):
        with pytest.raises(ValueError):
            EstimatorConfig(1, 0)
        with pytest.raises(ValueError, match="even"):
            EstimatorConfig(101, 0, antithetic=True)

    def test_core_types_are_immutable(self):
        spec = rastrigin(2)
        with pytest.raises(Exception):
            spec.dim = 3
        assert not spec.cosine.terms[0].frequency.flags.writeable


class TestSerialization:
    def test_round_trip(self):
        spec = rastrigin(2, amplitude=3.5, frequency=4.0)
        doc = spec.to_config()
        assert doc["kind"] == "quad_plus_cosine"
        assert doc["cosine"][0] == {"a": 3.5, "xi": [4.0, 0.0], "psi": 0.0}
        back = ObjectiveSpec.from_config(doc)
        assert back.kind == spec.kind
        assert back.dim == spec.dim
        assert back.quad_strength == spec.quad_strength
        assert len(back.cosine) == len(spec.cosine)
        for a, b in zip(back.cosine.terms, spec.cosine.terms):
            assert a.amplitude == b.amplitude
            assert a.phase == b.phase
            np.testing.assert_array_equal(a.frequency, b.frequency)

    def test_missing_field_is_named(self):
        with pytest.raises(ValueError, match="dim"):
            ObjectiveSpec.from_config({"kind": "quad_plus_cosine"})

    def test_blackbox_not_serializable(self):
        spec = ObjectiveSpec(kind=ObjectiveKind.BLACK_BOX, dim=1, blackbox_eval=lambda x: 0.0)
        with pytest.raises(ValueError, match="serializ"):
            spec.to_config()
