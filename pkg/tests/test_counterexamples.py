"""Point-mass families where naive concentration fails to approximate f.

Both families put vanishing probability (or vanishing |f|-mass) outside the
target point yet keep the expected value bounded away from f at that point,
which is why the concentration condition weights the escaping mass by
max{|f|, 1}.  The expectations are literal finite sums over the atoms, so
the checks are exact.
"""

import math

import numpy as np
import pytest


def test_escaping_mixture_expectation_is_one_over_theta():
    # measure (1-theta) at 0 plus theta at 1/theta, objective x^2
    f = lambda x: x * x
    for theta in np.linspace(0.01, 0.99, 50):
        expected_value = (1.0 - theta) * f(0.0) + theta * f(1.0 / theta)
        assert expected_value == pytest.approx(1.0 / theta, rel=1e-14)
        # mass escapes: P(anything but 0) = theta -> 0, yet the value
        # stays above 1 while f(0) = 0
        assert expected_value > 1.0 > f(0.0)


def test_drifting_point_mass_expectation():
    # point mass at theta > 1, objective -exp(-x^2)
    f = lambda x: -math.exp(-(x * x))
    for theta in np.linspace(1.0 + 1e-9, 8.0, 50):
        expected_value = f(theta)
        assert expected_value == -math.exp(-(theta * theta))
        # |f|-mass outside the origin can be made arbitrarily small ...
        assert abs(expected_value) <= math.exp(-(theta * theta))
        # ... but the value never approaches f(0) = -1
        assert expected_value > -1.0 / math.e > f(0.0)
