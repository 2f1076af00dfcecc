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

"""Tests for the network hyperparameter sweeps."""

import pytest
from lateral_line_estimator.errors import ArgumentError
from lateral_line_estimator.models import SweepGrid
from lateral_line_estimator.pipeline.baselines.sweep import knee, sweep_bpnn


class TestKnee:
    """Test cases for the knee of a sweep curve."""

    def test_smallest_value_near_best(self):
        """Test the knee is the smallest value within tolerance of the best."""
        assert knee([1, 2, 3, 4], [0.5, 0.9, 0.905, 0.91], 0.01) == 2

    def test_best_value_when_tolerance_is_zero(self):
        """Test a zero tolerance picks the maximizer."""
        assert knee([5, 10, 15], [0.7, 0.95, 0.9], 0.0) == 10

    def test_empty_grid(self):
        """Test an empty grid is rejected."""
        with pytest.raises(ArgumentError):
            knee([], [])


class TestSweepBpnn:
    """Test cases for the network sweeps."""

    def test_hidden_sweep(self, linear_set):
        """Test a hidden node sweep reports one score per value and is seeded."""
        first = sweep_bpnn(linear_set, 'hidden', seed=1, values=[1, 2, 3], iterations=50, n_jobs=1)
        second = sweep_bpnn(
            linear_set, SweepGrid.HIDDEN, seed=1, values=[1, 2, 3], iterations=50, n_jobs=2
        )
        assert first.grid == SweepGrid.HIDDEN
        assert first.values == [1, 2, 3]
        assert first.r2 == second.r2
        assert first.chosen in first.values
        assert first.chosen == knee(first.values, first.r2, first.tol)
        assert all(s >= 0 for s in first.train_seconds)

    def test_iteration_sweep(self, linear_set):
        """Test an iteration sweep keeps the hidden count fixed."""
        result = sweep_bpnn(linear_set, 'iterations', seed=2, values=[5, 20], hidden=2)
        assert result.grid == SweepGrid.ITERATIONS
        assert len(result.r2) == 2

    def test_training_time_grows_with_iterations(self, linear_set):
        """Test longer training never reports a shorter time."""
        result = sweep_bpnn(
            linear_set, 'iterations', seed=3, values=[10, 200, 2000], hidden=5, n_jobs=1
        )
        assert result.train_seconds == sorted(result.train_seconds)

    @pytest.mark.parametrize('values', [[0], [3, -1]])
    def test_invalid_values(self, linear_set, values):
        """Test non-positive grid values are rejected."""
        with pytest.raises(ArgumentError):
            sweep_bpnn(linear_set, 'hidden', seed=0, values=values, iterations=5)
