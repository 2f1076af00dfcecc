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

"""Tests for data models of the lateral line estimation pipeline."""

import pytest
from lateral_line_estimator.models import (
    ComparisonMatrix,
    Criterion,
    FamilyParams,
    GeneratorConfig,
    ModelFamily,
    RecordingMeta,
    RunConfig,
    SensitivityReport,
    SensorId,
    StateKind,
    SweepGrid,
    Unit,
)
from pydantic import ValidationError


class TestSensorId:
    """Test cases for SensorId enum."""

    def test_sensor_values(self):
        """Test SensorId enum values."""
        assert SensorId.P0 == 'P0'
        assert SensorId.PL4 == 'PL4'
        assert SensorId.PR1 == 'PR1'

    def test_ordinal_follows_feature_order(self):
        """Test every sensor maps to its feature column and back."""
        for index, sensor in enumerate(SensorId.all()):
            assert sensor.ordinal == index
            assert SensorId.from_index(index) == sensor

    def test_from_index_out_of_range(self):
        """Test an out-of-range feature column is rejected."""
        with pytest.raises(ValueError):
            SensorId.from_index(9)

        with pytest.raises(ValueError):
            SensorId.from_index(-1)


class TestStateKind:
    """Test cases for StateKind enum."""

    @pytest.mark.parametrize(
        'state, unit, p, first, last',
        [
            (StateKind.D, Unit.MM, 7, -45.0, 45.0),
            (StateKind.A, Unit.DEGREE, 16, 0.0, 30.0),
            (StateKind.F, Unit.HZ, 6, 0.5, 1.0),
            (StateKind.PHI, Unit.DEGREE, 13, -30.0, 30.0),
            (StateKind.ALPHA, Unit.DEGREE, 19, -90.0, 90.0),
            (StateKind.BETA, Unit.DEGREE, 9, -20.0, 20.0),
            (StateKind.GAMMA, Unit.DEGREE, 11, -50.0, 50.0),
        ],
    )
    def test_state_grids(self, state, unit, p, first, last):
        """Test each state's unit and experimental grid."""
        assert state.unit == unit
        assert state.p == p
        assert state.grid[0] == first
        assert state.grid[-1] == last
        assert all(b > a for a, b in zip(state.grid, state.grid[1:]))

    def test_frequency_grid_is_rounded(self):
        """Test the frequency grid carries no accumulated float error."""
        assert StateKind.F.grid == (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

    def test_ordinal(self):
        """Test state ordinals follow declaration order."""
        assert [s.ordinal for s in StateKind] == list(range(7))


class TestRecordingMeta:
    """Test cases for RecordingMeta model."""

    def test_valid_meta(self):
        """Test creating valid recording metadata."""
        meta = RecordingMeta(
            state_kind='d', unit='mm', parameter_value=-45, parameter_index=1, recording_index=2
        )
        assert meta.state_kind == StateKind.D
        assert meta.sample_rate_hz == 100.0

    def test_indices_are_one_based(self):
        """Test zero indices are rejected."""
        with pytest.raises(ValidationError):
            RecordingMeta(
                state_kind='d', unit='mm', parameter_value=0, parameter_index=0, recording_index=1
            )


class TestGeneratorConfig:
    """Test cases for GeneratorConfig model."""

    def test_default_grid(self):
        """Test the grid defaults to the state's reference grid."""
        config = GeneratorConfig(state_kind='beta', coefficients=[[0, 1, 0]] * 9)
        assert config.resolved_grid() == list(StateKind.BETA.grid)
        assert config.osc_gain == [0.0] * 9

    def test_explicit_grid(self):
        """Test an explicit grid is used as given."""
        config = GeneratorConfig(coefficients=[[0, 1, 0]] * 9, grid=[1.0, 2.0, 4.0])
        assert config.resolved_grid() == [1.0, 2.0, 4.0]

    def test_coefficient_shape(self):
        """Test coefficients must be nine rows of three."""
        with pytest.raises(ValidationError):
            GeneratorConfig(coefficients=[[0, 1, 0]] * 8)

        with pytest.raises(ValidationError):
            GeneratorConfig(coefficients=[[0, 1]] * 9)

    def test_grid_must_increase(self):
        """Test a non-increasing grid is rejected."""
        with pytest.raises(ValidationError):
            GeneratorConfig(coefficients=[[0, 1, 0]] * 9, grid=[1.0, 1.0, 2.0])

    def test_negative_noise(self):
        """Test a negative noise level is rejected."""
        with pytest.raises(ValidationError):
            GeneratorConfig(coefficients=[[0, 1, 0]] * 9, noise_std=-1.0)


class TestSensitivityReport:
    """Test cases for SensitivityReport model."""

    def test_ordering_by_criterion(self):
        """Test the ordering accessor picks the requested criterion."""
        c1_order = list(reversed(SensorId.all()))
        report = SensitivityReport(
            sensors=SensorId.all(),
            c1=[0.0] * 9,
            c2=[0.0] * 9,
            delta=[[0.0]] * 9,
            mm_range=[0.0] * 9,
            delta_prime=[[0.0]] * 9,
            ordering_c1=c1_order,
            ordering_c2=SensorId.all(),
            criterion=Criterion.C1,
        )
        assert report.ordering() == c1_order
        assert report.ordering(Criterion.C2) == SensorId.all()


class TestComparisonMatrix:
    """Test cases for ComparisonMatrix model."""

    def test_missing_cell(self):
        """Test looking up an absent cell raises KeyError."""
        matrix = ComparisonMatrix(state_kind='d', orderings={}, cells=[], best=[])
        with pytest.raises(KeyError):
            matrix.cell(ModelFamily.RF, Criterion.C2, 1)


class TestFamilyParams:
    """Test cases for FamilyParams model."""

    def test_defaults(self):
        """Test hyperparameter defaults."""
        params = FamilyParams()
        assert params.n_trees == 500
        assert params.m_try is None
        assert params.hidden is None
        assert params.c_box == 1.0
        assert params.eps_tube == 0.1

    def test_invalid_values(self):
        """Test out-of-range hyperparameters are rejected."""
        with pytest.raises(ValidationError):
            FamilyParams(n_trees=0)

        with pytest.raises(ValidationError):
            FamilyParams(learning_rate=0.0)


class TestRunConfig:
    """Test cases for RunConfig model."""

    def test_echo_excludes_location_and_workers(self):
        """Test the echoed config leaves out the output directory and worker cap."""
        config = RunConfig(subcommand='train', out='/tmp/x', threads=4, family='rf', seed=1)
        echoed = config.echo()
        assert 'out' not in echoed
        assert 'threads' not in echoed
        assert echoed['family'] == 'rf'
        assert echoed['params']['n_trees'] == 500

    def test_enum_coercion(self):
        """Test string flags are coerced to enums."""
        config = RunConfig(subcommand='sweep', criterion='c1', grid='hidden', state='A')
        assert config.criterion == Criterion.C1
        assert config.grid == SweepGrid.HIDDEN
        assert config.state == StateKind.A

    def test_negative_seed(self):
        """Test the run seed must be non-negative."""
        with pytest.raises(ValidationError):
            RunConfig(subcommand='estimate', seed=-1)
