# Copyright The lateral-line-estimator Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Tests for the back propagation network."""

import json
import numpy as np
import pytest
from lateral_line_estimator.errors import ArgumentError, StandardizationError
from lateral_line_estimator.models import StateKind
from lateral_line_estimator.pipeline.baselines.network import (
    Weights,
    bpnn_from_dict,
    bpnn_to_dict,
    fit_bpnn,
    forward,
    gradient_check,
    init_weights,
    loss_and_gradients,
    predict_bpnn,
)
from lateral_line_estimator.pipeline.evaluate import r_squared
from tests.conftest import build_regression_set


def _linear_means(gains) -> np.ndarray:
    return np.asarray(StateKind.D.grid)[:, None] * np.asarray(gains) + 1.0


class TestForward:
    """Test cases for the network forward pass and gradients."""

    def test_initialization_range(self):
        """Test weights start uniform in (-0.5, 0.5) with the right shapes."""
        weights = init_weights(4, 6, np.random.default_rng(0))
        assert weights.w1.shape == (6, 4)
        assert weights.b1.shape == (6,)
        assert weights.w2.shape == (6,)
        assert weights.b2.shape == (1,)
        for block in weights:
            assert np.all(np.abs(block) < 0.5)

    def test_linear_output(self):
        """Test the output is a linear read-out of sigmoid activations."""
        weights = Weights(
            w1=np.zeros((2, 3)), b1=np.zeros(2), w2=np.array([2.0, 4.0]), b2=np.array([1.0])
        )
        hidden, out = forward(weights, np.ones((5, 3)))
        np.testing.assert_allclose(hidden, 0.5)
        np.testing.assert_allclose(out, 4.0)

    @pytest.mark.parametrize('n_inputs, hidden', [(1, 1), (3, 5), (9, 11), (2, 13), (5, 2)])
    def test_gradient_check(self, n_inputs, hidden):
        """Test analytic gradients agree with central differences."""
        rng = np.random.default_rng(n_inputs * 100 + hidden)
        weights = init_weights(n_inputs, hidden, rng)
        xs = rng.normal(size=(20, n_inputs))
        ys = rng.uniform(size=20)
        assert gradient_check(weights, xs, ys) < 1e-4

    def test_zero_gradient_at_perfect_fit(self):
        """Test a network reproducing its targets has zero loss and gradient."""
        rng = np.random.default_rng(4)
        weights = init_weights(2, 3, rng)
        xs = rng.normal(size=(10, 2))
        _, ys = forward(weights, xs)
        loss, grads = loss_and_gradients(weights, xs, ys)
        assert loss == pytest.approx(0.0, abs=1e-24)
        for block in grads:
            np.testing.assert_allclose(block, 0.0, atol=1e-12)


class TestFitBpnn:
    """Test cases for network training."""

    def test_learns_linear_response(self, make_set):
        """Test a network fits a noise-free linear response."""
        gains = [0.8, 0.5, 0.3, 0.2, 0.1, 0.45, 0.25, 0.15, 0.05]
        train = make_set(_linear_means(gains), per_parameter=5)
        network = fit_bpnn(train, hidden=6, iterations=1000, seed=1)
        assert r_squared(predict_bpnn(network, train.features), train.labels) >= 0.95
        assert network.hidden == 6

    def test_loss_never_increases(self, linear_set):
        """Test the recorded loss is non-increasing."""
        network = fit_bpnn(linear_set, hidden=4, iterations=50, seed=2)
        history = np.asarray(network.loss_history)
        assert history.size == 51
        assert np.all(np.diff(history) <= 0)

    def test_rate_halving(self, linear_set):
        """Test an oversized learning rate is halved instead of diverging."""
        network = fit_bpnn(linear_set, hidden=4, iterations=20, seed=2, learning_rate=1e4)
        assert network.learning_rate < 1e4
        assert np.all(np.diff(network.loss_history) <= 0)

    def test_seeded(self, small_linear_set):
        """Test training depends on the seed only."""
        first = fit_bpnn(small_linear_set, hidden=3, iterations=30, seed=5)
        second = fit_bpnn(small_linear_set, hidden=3, iterations=30, seed=5)
        other = fit_bpnn(small_linear_set, hidden=3, iterations=30, seed=6)
        x = small_linear_set.features
        np.testing.assert_array_equal(predict_bpnn(first, x), predict_bpnn(second, x))
        assert not np.array_equal(predict_bpnn(first, x), predict_bpnn(other, x))

    def test_scaling_statistics(self, small_linear_set):
        """Test inputs are z-scored and labels min-max scaled with training statistics."""
        network = fit_bpnn(small_linear_set, hidden=2, iterations=1, seed=0)
        np.testing.assert_allclose(network.x_mean, small_linear_set.features.mean(axis=0))
        np.testing.assert_allclose(network.x_std, small_linear_set.features.std(axis=0))
        assert network.y_min == -45.0
        assert network.y_span == 90.0

    def test_constant_feature(self, make_set):
        """Test a zero-spread feature names the sensor."""
        means = _linear_means([1.0, 0.0, 2.0])
        with pytest.raises(StandardizationError) as exc_info:
            fit_bpnn(make_set(means, per_parameter=2), hidden=2, iterations=5, seed=0)
        assert exc_info.value.feature == 'PL1'

    def test_constant_labels(self):
        """Test constant labels scale with a span of one."""
        rng = np.random.default_rng(0)
        train = build_regression_set(rng.normal(size=(10, 2)), np.full(10, 3.0))
        network = fit_bpnn(train, hidden=2, iterations=5, seed=0)
        assert network.y_min == 3.0
        assert network.y_span == 1.0

    @pytest.mark.parametrize(
        'hidden, iterations, learning_rate', [(0, 5, 0.1), (2, 0, 0.1), (2, 5, 0.0)]
    )
    def test_invalid_arguments(self, small_linear_set, hidden, iterations, learning_rate):
        """Test non-positive sizes and rates are rejected."""
        with pytest.raises(ArgumentError):
            fit_bpnn(small_linear_set, hidden, iterations, seed=0, learning_rate=learning_rate)


class TestPredictBpnn:
    """Test cases for network prediction and dumps."""

    def test_shapes(self, small_linear_set):
        """Test a vector gives a float, a matrix an array, a wrong width an error."""
        network = fit_bpnn(small_linear_set, hidden=2, iterations=5, seed=0)
        assert isinstance(predict_bpnn(network, small_linear_set.features[0]), float)
        assert predict_bpnn(network, small_linear_set.features).shape == (small_linear_set.n,)
        with pytest.raises(ArgumentError):
            predict_bpnn(network, np.zeros((2, 3)))

    def test_dump_and_reload(self, small_linear_set):
        """Test a reloaded network predicts identically."""
        network = fit_bpnn(small_linear_set, hidden=3, iterations=10, seed=0)
        restored = bpnn_from_dict(json.loads(json.dumps(bpnn_to_dict(network))))
        x = small_linear_set.features
        np.testing.assert_array_equal(predict_bpnn(restored, x), predict_bpnn(network, x))
        assert restored.loss_history == network.loss_history
