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

"""Tests for the reference tables."""

import pytest
from lateral_line_estimator.models import SensorId, StateKind
from lateral_line_estimator.resources.reference_tables import (
    BPNN_HIDDEN_PRESETS,
    REFERENCE_AMPLITUDE_ESTIMATE,
    REFERENCE_AMPLITUDE_PER_PARAMETER,
    REFERENCE_BEST,
    REFERENCE_C1,
    REFERENCE_C2,
    REFERENCE_IMPORTANT,
    REFERENCE_M_R,
    REFERENCE_ORDER_C1,
    REFERENCE_ORDER_C2,
    bpnn_preset,
)


class TestReferenceTables:
    """Test cases for the reference tables."""

    def test_network_presets(self):
        """Test the preset hidden nodes and iterations per state."""
        assert bpnn_preset(StateKind.D) == (11, 150)
        assert bpnn_preset(StateKind.ALPHA) == (13, 400)
        assert set(BPNN_HIDDEN_PRESETS) == set(StateKind)

    @pytest.mark.parametrize('state', list(StateKind))
    def test_shapes(self, state):
        """Test every state has a full row and a permutation ordering."""
        assert len(REFERENCE_C1[state]) == 9
        assert len(REFERENCE_C2[state]) == 9
        assert sorted(REFERENCE_ORDER_C1[state]) == sorted(SensorId.all())
        assert sorted(REFERENCE_ORDER_C2[state]) == sorted(SensorId.all())

    @pytest.mark.parametrize('state', list(StateKind))
    def test_cut_agrees_with_best_tuple(self, state):
        """Test the redundancy cut matches the best tuple and the important sensors."""
        assert len(REFERENCE_IMPORTANT[state]) == REFERENCE_M_R[state]
        assert REFERENCE_BEST[state][2] == REFERENCE_M_R[state]

    def test_amplitude_values_are_on_the_grid(self):
        """Test the per-parameter amplitude errors refer to grid values."""
        assert set(REFERENCE_AMPLITUDE_PER_PARAMETER) <= set(StateKind.A.grid)

    def test_amplitude_estimate_is_consistent(self):
        """Test the overall amplitude error lies below every per-parameter error."""
        r2, mae = REFERENCE_AMPLITUDE_ESTIMATE
        assert 0 < r2 <= 1
        assert mae < min(REFERENCE_AMPLITUDE_PER_PARAMETER.values())
