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

"""Tests for worker pools and seed derivation."""

import pytest
from lateral_line_estimator.errors import ArgumentError
from lateral_line_estimator.models import Criterion, ModelFamily
from lateral_line_estimator.pipeline.parallel import derive_seed, parallel_map, resolve_threads
from unittest.mock import patch


class TestResolveThreads:
    """Test cases for worker count resolution."""

    def test_override_wins(self):
        """Test an explicit override beats the environment."""
        with patch.dict('os.environ', {'ALLE_THREADS': '3'}):
            assert resolve_threads(5) == 5

    @patch('lateral_line_estimator.pipeline.parallel.cpu_count', return_value=8)
    def test_environment(self, mock_cpu_count):
        """Test ALLE_THREADS is used when no override is given."""
        with patch.dict('os.environ', {'ALLE_THREADS': '3'}):
            assert resolve_threads() == 3

    @patch('lateral_line_estimator.pipeline.parallel.cpu_count', return_value=2)
    def test_environment_capped_at_cpu_count(self, mock_cpu_count):
        """Test ALLE_THREADS cannot exceed the CPU count."""
        with patch.dict('os.environ', {'ALLE_THREADS': '64'}):
            assert resolve_threads() == 2

    @patch('lateral_line_estimator.pipeline.parallel.cpu_count', return_value=6)
    def test_cpu_count_default(self, mock_cpu_count):
        """Test the CPU count is the fallback."""
        with patch.dict('os.environ', {}, clear=True):
            assert resolve_threads() == 6

    def test_invalid_values(self):
        """Test non-positive and non-integer worker counts are rejected."""
        with pytest.raises(ArgumentError):
            resolve_threads(0)

        with patch.dict('os.environ', {'ALLE_THREADS': 'many'}):
            with pytest.raises(ArgumentError):
                resolve_threads()

        with patch.dict('os.environ', {'ALLE_THREADS': '0'}):
            with pytest.raises(ArgumentError):
                resolve_threads()


class TestParallelMap:
    """Test cases for parallel_map."""

    def test_preserves_order(self):
        """Test results come back in input order."""
        assert parallel_map(lambda x: x * x, range(20), 4) == [x * x for x in range(20)]

    def test_worker_count_does_not_change_results(self):
        """Test one and several workers agree."""
        items = list(range(10))
        assert parallel_map(lambda x: derive_seed(x), items, 1) == parallel_map(
            lambda x: derive_seed(x), items, 3
        )

    def test_empty(self):
        """Test an empty input gives an empty list."""
        assert parallel_map(lambda x: x, [], 2) == []


class TestDeriveSeed:
    """Test cases for derive_seed."""

    def test_stable(self):
        """Test the same coordinates give the same seed."""
        assert derive_seed(1, 'rf', 'c2', 4) == derive_seed(1, 'rf', 'c2', 4)

    def test_range(self):
        """Test seeds fit in 63 bits."""
        for i in range(50):
            assert 0 <= derive_seed(i, 'holdout') < 2**63

    def test_coordinates_matter(self):
        """Test different coordinates give different seeds."""
        seeds = {derive_seed(0, 'rf', c, m) for c in ('c1', 'c2') for m in range(1, 10)}
        assert len(seeds) == 18

    def test_enum_equals_value(self):
        """Test enum members and their tags derive the same seed."""
        assert derive_seed(7, ModelFamily.SVR, Criterion.C1, 3) == derive_seed(7, 'svr', 'c1', 3)
