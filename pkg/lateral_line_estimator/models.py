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

"""Data models for the lateral line estimation pipeline."""

import math
from .consts import (
    DEFAULT_BPNN_LEARNING_RATE,
    DEFAULT_FLUME_SPEED_MPS,
    DEFAULT_KNEE_TOL,
    DEFAULT_MIN_NODE_SIZE,
    DEFAULT_N_TREES,
    DEFAULT_PER_RECORDING,
    DEFAULT_PLATEAU_TOL,
    DEFAULT_SAMPLE_RATE_HZ,
    DEFAULT_SMOOTHING_SIGMA,
    DEFAULT_SMOOTHING_WINDOW,
    DEFAULT_SVR_C_BOX,
    DEFAULT_SVR_EPS_TUBE,
    DEFAULT_SVR_MAX_ITER,
    DEFAULT_SVR_TOL,
    DEFAULT_TRAIN_FRACTION,
    N_SENSORS,
    RECORDINGS_PER_PARAMETER,
    SENSOR_LABELS,
)
from enum import Enum
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Dict, List, Optional, Tuple


class SensorId(str, Enum):
    """Pressure sensors of the lateral line array, in feature order.

    Attributes:
        P0: Head sensor.
        PL1..PL4: Left flank sensors, front to back.
        PR1..PR4: Right flank sensors, front to back.
    """

    P0 = 'P0'
    PL1 = 'PL1'
    PL2 = 'PL2'
    PL3 = 'PL3'
    PL4 = 'PL4'
    PR1 = 'PR1'
    PR2 = 'PR2'
    PR3 = 'PR3'
    PR4 = 'PR4'

    @property
    def ordinal(self) -> int:
        """Feature column of this sensor (0..8)."""
        return SENSOR_LABELS.index(self.value)

    @classmethod
    def from_index(cls, index: int) -> 'SensorId':
        """Sensor at feature column ``index``."""
        if not 0 <= index < N_SENSORS:
            raise ValueError(f'Sensor index out of range: {index}')
        return cls(SENSOR_LABELS[index])

    @classmethod
    def all(cls) -> List['SensorId']:
        """All nine sensors in index order."""
        return [cls(label) for label in SENSOR_LABELS]


class Unit(str, Enum):
    """Units a relative state is expressed in."""

    MM = 'mm'
    DEGREE = 'degree'
    HZ = 'Hz'


def _grid(start: float, stop: float, step: float, digits: int = 6) -> Tuple[float, ...]:
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, digits) for i in range(count))


class StateKind(str, Enum):
    """The seven relative states between the upstream and downstream bodies.

    Attributes:
        D: Vertical distance.
        A: Oscillating amplitude.
        F: Oscillating frequency.
        PHI: Oscillating offset.
        ALPHA: Yaw angle.
        BETA: Pitch angle.
        GAMMA: Roll angle.
    """

    D = 'd'
    A = 'A'
    F = 'f'
    PHI = 'phi'
    ALPHA = 'alpha'
    BETA = 'beta'
    GAMMA = 'gamma'

    @property
    def unit(self) -> Unit:
        """Unit of the state value."""
        return _STATE_UNITS[self]

    @property
    def grid(self) -> Tuple[float, ...]:
        """Experimental parameter values, strictly increasing."""
        return _STATE_GRIDS[self]

    @property
    def p(self) -> int:
        """Number of experimental parameters."""
        return len(self.grid)

    @property
    def ordinal(self) -> int:
        """Position of this state in declaration order."""
        return list(StateKind).index(self)


_STATE_UNITS: Dict[StateKind, Unit] = {
    StateKind.D: Unit.MM,
    StateKind.A: Unit.DEGREE,
    StateKind.F: Unit.HZ,
    StateKind.PHI: Unit.DEGREE,
    StateKind.ALPHA: Unit.DEGREE,
    StateKind.BETA: Unit.DEGREE,
    StateKind.GAMMA: Unit.DEGREE,
}

_STATE_GRIDS: Dict[StateKind, Tuple[float, ...]] = {
    StateKind.D: _grid(-45, 45, 15),
    StateKind.A: _grid(0, 30, 2),
    StateKind.F: _grid(0.5, 1.0, 0.1),
    StateKind.PHI: _grid(-30, 30, 5),
    StateKind.ALPHA: _grid(-90, 90, 10),
    StateKind.BETA: _grid(-20, 20, 5),
    StateKind.GAMMA: _grid(-50, 50, 10),
}


class Provenance(str, Enum):
    """Where a sample set came from."""

    INGESTED = 'ingested'
    SYNTHETIC = 'synthetic'
    DERIVED = 'derived'


class ModelFamily(str, Enum):
    """Regression model families.

    Attributes:
        RF: Random forest.
        BPNN: Three-layer back propagation network.
        SVR: Epsilon support vector regression with an RBF kernel.
        REG: Multiple linear regression.
    """

    RF = 'rf'
    BPNN = 'bpnn'
    SVR = 'svr'
    REG = 'reg'


class Criterion(str, Enum):
    """Sensor sensitivity criteria.

    Attributes:
        C1: Mean range-normalized step change of the per-parameter mean response.
        C2: Mean raw step change of the per-parameter mean response.
    """

    C1 = 'c1'
    C2 = 'c2'


class SweepGrid(str, Enum):
    """Hyperparameter swept for the back propagation network."""

    HIDDEN = 'hidden'
    ITERATIONS = 'iterations'


class RecordingMeta(BaseModel):
    """Sidecar metadata of one raw recording.

    Attributes:
        state_kind: Relative state varied in this recording.
        unit: Unit of the parameter value.
        parameter_value: Value of the relative state.
        parameter_index: 1-based index of the value in the state's grid.
        recording_index: 1-based repetition index.
        sample_rate_hz: Sampling rate of the pressure channels.
    """

    state_kind: StateKind = Field(..., description='Relative state varied in this recording')
    unit: Unit = Field(..., description='Unit of the parameter value')
    parameter_value: float = Field(..., description='Value of the relative state')
    parameter_index: int = Field(..., ge=1, description='1-based index in the state grid')
    recording_index: int = Field(..., ge=1, description='1-based repetition index')
    sample_rate_hz: float = Field(DEFAULT_SAMPLE_RATE_HZ, gt=0, description='Sampling rate')


class GeneratorConfig(BaseModel):
    """Configuration of the synthetic wake-pressure generator.

    Channel k at parameter value theta and time t is
    ``a_k0 + a_k1*theta + a_k2*theta**2 + b_k*sin(2*pi*f_osc*t + k*pi/9) + noise``.

    Attributes:
        state_kind: Relative state the data set varies.
        grid: Parameter values; defaults to the state's reference grid.
        coefficients: Per-sensor quadratic mean response (9 rows of a_k0, a_k1, a_k2).
        osc_gain: Per-sensor oscillation amplitude b_k.
        osc_frequency_hz: Oscillation frequency.
        noise_std: Standard deviation of additive Gaussian noise.
        sample_rate_hz: Sampling rate of the emitted recordings.
        n_steps: Time steps per recording.
        n_recordings: Repetitions per parameter value.
        flume_speed_mps: Flume speed metadata.
        seed: Master seed of every noise stream.
    """

    state_kind: StateKind = Field(StateKind.D, description='Relative state the data set varies')
    grid: Optional[List[float]] = Field(None, description='Parameter values (default: state grid)')
    coefficients: List[List[float]] = Field(
        ..., description='Per-sensor quadratic mean response coefficients, 9 rows of 3'
    )
    osc_gain: List[float] = Field(
        default_factory=lambda: [0.0] * N_SENSORS, description='Per-sensor oscillation gain'
    )
    osc_frequency_hz: float = Field(1.0, ge=0, description='Oscillation frequency')
    noise_std: float = Field(0.0, ge=0, description='Standard deviation of additive noise')
    sample_rate_hz: float = Field(DEFAULT_SAMPLE_RATE_HZ, gt=0, description='Sampling rate')
    n_steps: int = Field(300, ge=1, description='Time steps per recording')
    n_recordings: int = Field(
        RECORDINGS_PER_PARAMETER, ge=1, description='Repetitions per parameter value'
    )
    flume_speed_mps: float = Field(DEFAULT_FLUME_SPEED_MPS, description='Flume speed metadata')
    seed: int = Field(0, ge=0, description='Master seed')

    @field_validator('coefficients')
    @classmethod
    def _check_coefficients(cls, value: List[List[float]]) -> List[List[float]]:
        if len(value) != N_SENSORS or any(len(row) != 3 for row in value):
            raise ValueError(f'coefficients must be {N_SENSORS} rows of 3 values')
        if not all(math.isfinite(c) for row in value for c in row):
            raise ValueError('coefficients must be finite')
        return value

    @field_validator('osc_gain')
    @classmethod
    def _check_osc_gain(cls, value: List[float]) -> List[float]:
        if len(value) != N_SENSORS:
            raise ValueError(f'osc_gain must have {N_SENSORS} values')
        if not all(math.isfinite(c) for c in value):
            raise ValueError('osc_gain must be finite')
        return value

    @model_validator(mode='after')
    def _check_grid(self) -> 'GeneratorConfig':
        if self.grid is not None:
            if not all(math.isfinite(v) for v in self.grid):
                raise ValueError('grid values must be finite')
            if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
                raise ValueError('grid must be strictly increasing')
        return self

    def resolved_grid(self) -> List[float]:
        """Parameter values used by the generator."""
        return list(self.grid) if self.grid is not None else list(self.state_kind.grid)


class GroundTruth(BaseModel):
    """Closed-form sensitivity of a generator configuration.

    Attributes:
        state_kind: Relative state of the configuration.
        grid: Parameter values.
        mean_response: p rows of 9 analytic mean responses.
        c1: Analytic C1 per sensor.
        c2: Analytic C2 per sensor.
        ordering_c1: Sensors sorted by C1, descending.
        ordering_c2: Sensors sorted by C2, descending.
    """

    state_kind: StateKind = Field(..., description='Relative state of the configuration')
    grid: List[float] = Field(..., description='Parameter values')
    mean_response: List[List[float]] = Field(..., description='Analytic mean responses')
    c1: List[float] = Field(..., description='Analytic C1 per sensor')
    c2: List[float] = Field(..., description='Analytic C2 per sensor')
    ordering_c1: List[SensorId] = Field(..., description='Sensors sorted by C1')
    ordering_c2: List[SensorId] = Field(..., description='Sensors sorted by C2')


class SensitivityReport(BaseModel):
    """Per-sensor sensitivity criteria.

    Attributes:
        sensors: Sensor of each entry of the per-sensor lists.
        c1: Mean normalized step change per sensor.
        c2: Mean raw step change per sensor.
        delta: Absolute step changes, 9 rows of p-1.
        mm_range: Max minus min of the per-parameter means per sensor.
        delta_prime: Range-normalized step changes, 9 rows of p-1.
        ordering_c1: Sensors sorted by C1, descending.
        ordering_c2: Sensors sorted by C2, descending.
        criterion: Criterion chosen for downstream orderings.
    """

    sensors: List[SensorId] = Field(..., description='Sensor of each per-sensor entry')
    c1: List[float] = Field(..., description='C1 per sensor')
    c2: List[float] = Field(..., description='C2 per sensor')
    delta: List[List[float]] = Field(..., description='Absolute step changes per sensor')
    mm_range: List[float] = Field(..., description='Range of the per-parameter means')
    delta_prime: List[List[float]] = Field(..., description='Normalized step changes')
    ordering_c1: List[SensorId] = Field(..., description='Sensors sorted by C1')
    ordering_c2: List[SensorId] = Field(..., description='Sensors sorted by C2')
    criterion: Criterion = Field(Criterion.C2, description='Criterion chosen for orderings')

    def ordering(self, criterion: Optional[Criterion] = None) -> List[SensorId]:
        """Ordering under ``criterion`` (default: the chosen one)."""
        chosen = criterion or self.criterion
        return list(self.ordering_c1 if chosen == Criterion.C1 else self.ordering_c2)


class RedundancyCurve(BaseModel):
    """Accuracy against the number of leading sensors used.

    Attributes:
        family: Model family trained for each M.
        ordering: Sensor ordering whose prefixes were used.
        mae: Held-out MAE for M = 1..9.
        r2: Held-out R^2 for M = 1..9.
        train_mae: Training MAE for M = 1..9.
        train_r2: Training R^2 for M = 1..9.
        m_r: Smallest M whose R^2 is within tolerance of the curve maximum.
        tol: Relative R^2 tolerance used for m_r.
        seeds: Per-M training seeds.
    """

    family: ModelFamily = Field(..., description='Model family trained for each M')
    ordering: List[SensorId] = Field(..., description='Sensor ordering used')
    mae: List[float] = Field(..., description='Held-out MAE per M')
    r2: List[float] = Field(..., description='Held-out R^2 per M')
    train_mae: List[float] = Field(..., description='Training MAE per M')
    train_r2: List[float] = Field(..., description='Training R^2 per M')
    m_r: int = Field(..., ge=1, le=N_SENSORS, description='Plateau cut')
    tol: float = Field(DEFAULT_PLATEAU_TOL, description='Relative R^2 tolerance')
    seeds: List[int] = Field(default_factory=list, description='Per-M training seeds')


class ImportanceReport(BaseModel):
    """Permutation importance of each feature of a random forest.

    Attributes:
        sensors: Feature labels in model column order.
        importance: I_k per feature, sign as computed (MSE_i - MSE_i(k)).
        mean_delta_mse: Mean over trees of MSE_i - MSE_i(k).
        se: Population standard error of MSE_i - MSE_i(k) over trees.
        n_trees: Number of trees evaluated.
        ranking: Features sorted by |I_k|, descending.
    """

    sensors: List[SensorId] = Field(..., description='Feature labels in column order')
    importance: List[float] = Field(..., description='I_k per feature')
    mean_delta_mse: List[float] = Field(..., description='Mean delta MSE per feature')
    se: List[float] = Field(..., description='Standard error per feature')
    n_trees: int = Field(..., ge=1, description='Trees evaluated')
    ranking: List[SensorId] = Field(..., description='Features sorted by |I_k|')


class SweepResult(BaseModel):
    """Network accuracy across a hyperparameter grid.

    Attributes:
        grid: Hyperparameter swept.
        values: Swept values.
        r2: Held-out R^2 per value.
        train_seconds: Wall-clock training time per value.
        chosen: Smallest value whose R^2 is within tolerance of the maximum.
        tol: Absolute R^2 tolerance.
    """

    grid: SweepGrid = Field(..., description='Hyperparameter swept')
    values: List[int] = Field(..., description='Swept values')
    r2: List[float] = Field(..., description='Held-out R^2 per value')
    train_seconds: List[float] = Field(..., description='Training time per value')
    chosen: int = Field(..., description='Chosen value')
    tol: float = Field(DEFAULT_KNEE_TOL, description='Absolute R^2 tolerance')


class ParameterError(BaseModel):
    """Error restricted to one parameter value."""

    parameter_value: float = Field(..., description='State value')
    count: int = Field(..., ge=1, description='Samples at this value')
    mae: float = Field(..., ge=0, description='MAE at this value')


class EvalReport(BaseModel):
    """Accuracy of one fitted model.

    Attributes:
        family: Model family.
        state_kind: Relative state estimated.
        unit: Unit of MAE.
        sensors: Sensors used as features.
        m: Number of sensors used.
        n: Held-out sample count.
        mae: Held-out MAE.
        r2: Held-out R^2.
        per_parameter: Held-out MAE per parameter value.
        n_train: Training sample count.
        train_mae: Training-set MAE.
        train_r2: Training-set R^2.
        seed: Training seed.
    """

    family: ModelFamily = Field(..., description='Model family')
    state_kind: StateKind = Field(..., description='Relative state estimated')
    unit: Unit = Field(..., description='Unit of MAE')
    sensors: List[SensorId] = Field(..., description='Sensors used')
    m: int = Field(..., ge=1, le=N_SENSORS, description='Number of sensors used')
    n: int = Field(..., ge=1, description='Held-out sample count')
    mae: float = Field(..., ge=0, description='Held-out MAE')
    r2: float = Field(..., le=1.0, description='Held-out R^2')
    per_parameter: List[ParameterError] = Field(..., description='Held-out MAE per value')
    n_train: int = Field(..., ge=1, description='Training sample count')
    train_mae: float = Field(..., ge=0, description='Training MAE')
    train_r2: float = Field(..., le=1.0, description='Training R^2')
    seed: int = Field(..., description='Training seed')


class ComparisonCell(BaseModel):
    """One (family, ordering, M) cell of a comparison grid."""

    family: ModelFamily = Field(..., description='Model family')
    ordering: Criterion = Field(..., description='Ordering criterion')
    m: int = Field(..., ge=1, le=N_SENSORS, description='Number of leading sensors')
    seed: int = Field(..., description='Cell seed')
    report: Optional[EvalReport] = Field(None, description='Evaluation, absent on failure')
    error: Optional[str] = Field(None, description='Failure marker')


class BestTuple(BaseModel):
    """Best (R^2, MAE, M) of a family."""

    family: ModelFamily = Field(..., description='Model family')
    ordering: Criterion = Field(..., description='Ordering giving the best tuple')
    r2: float = Field(..., description='R^2 at M_r')
    mae: float = Field(..., description='MAE at M_r')
    m: int = Field(..., ge=1, le=N_SENSORS, description='M_r')
    text: str = Field(..., description='Rendered "(R^2, MAE unit, M)"')


class ComparisonMatrix(BaseModel):
    """Grid of evaluations over family, ordering and M."""

    state_kind: StateKind = Field(..., description='Relative state estimated')
    orderings: Dict[Criterion, List[SensorId]] = Field(..., description='Orderings compared')
    cells: List[ComparisonCell] = Field(..., description='Grid cells')
    best: List[BestTuple] = Field(..., description='Best tuple per family')
    tol: float = Field(DEFAULT_PLATEAU_TOL, description='Plateau tolerance for M_r')

    def cell(self, family: ModelFamily, ordering: Criterion, m: int) -> ComparisonCell:
        """Cell at the given coordinates."""
        for cell in self.cells:
            if cell.family == family and cell.ordering == ordering and cell.m == m:
                return cell
        raise KeyError((family, ordering, m))


class FamilyParams(BaseModel):
    """Hyperparameters of every model family.

    Attributes:
        n_trees: Trees in a random forest.
        m_try: Features drawn per split (default max(1, round(M/3))).
        min_node_size: Nodes smaller than this become leaves.
        hidden: Hidden nodes of the network (default: state preset).
        iterations: Gradient descent iterations (default: state preset).
        learning_rate: Initial gradient descent rate.
        c_box: SVR box constraint.
        eps_tube: SVR tube half-width.
        gamma: RBF bandwidth (default 1/(M * mean feature variance)).
        svr_tol: SVR KKT tolerance.
        svr_max_iter: SVR iteration cap.
    """

    n_trees: int = Field(DEFAULT_N_TREES, ge=1, description='Trees in a random forest')
    m_try: Optional[int] = Field(None, ge=1, description='Features drawn per split')
    min_node_size: int = Field(DEFAULT_MIN_NODE_SIZE, ge=1, description='Minimum node size')
    hidden: Optional[int] = Field(None, ge=1, description='Hidden nodes of the network')
    iterations: Optional[int] = Field(None, ge=1, description='Gradient descent iterations')
    learning_rate: float = Field(DEFAULT_BPNN_LEARNING_RATE, gt=0, description='Initial rate')
    c_box: float = Field(DEFAULT_SVR_C_BOX, gt=0, description='SVR box constraint')
    eps_tube: float = Field(DEFAULT_SVR_EPS_TUBE, ge=0, description='SVR tube half-width')
    gamma: Optional[float] = Field(None, gt=0, description='RBF bandwidth')
    svr_tol: float = Field(DEFAULT_SVR_TOL, gt=0, description='SVR KKT tolerance')
    svr_max_iter: int = Field(DEFAULT_SVR_MAX_ITER, ge=1, description='SVR iteration cap')


class RunConfig(BaseModel):
    """Resolved configuration of one command line run.

    Attributes:
        subcommand: Pipeline step executed.
        input: Input directory or file.
        model: Serialized model (importance only).
        config: Generator configuration file (generate only).
        out: Output directory.
        state: Expected state kind of the input.
        seed: Master seed.
        window: Gaussian window length.
        sigma: Gaussian window standard deviation.
        per_recording: Samples kept per recording.
        family: Model family.
        criterion: Ordering criterion.
        sensors: Sensor selection ("all", a prefix length, or comma separated labels).
        fraction: Training fraction.
        grid: Network hyperparameter to sweep instead of M.
        plateau_tol: Relative R^2 tolerance for M_r.
        knee_tol: Absolute R^2 tolerance for network sweeps.
        params: Model hyperparameters.
        threads: Worker cap.
    """

    subcommand: str = Field(..., description='Pipeline step executed')
    input: Optional[str] = Field(None, description='Input directory or file')
    model: Optional[str] = Field(None, description='Serialized model')
    config: Optional[str] = Field(None, description='Generator configuration file')
    out: Optional[str] = Field(None, description='Output directory')
    state: Optional[StateKind] = Field(None, description='Expected state kind')
    seed: Optional[int] = Field(None, ge=0, description='Master seed')
    window: int = Field(DEFAULT_SMOOTHING_WINDOW, description='Gaussian window length')
    sigma: float = Field(DEFAULT_SMOOTHING_SIGMA, description='Gaussian window std')
    per_recording: int = Field(DEFAULT_PER_RECORDING, description='Samples kept per recording')
    family: Optional[ModelFamily] = Field(None, description='Model family')
    criterion: Criterion = Field(Criterion.C2, description='Ordering criterion')
    sensors: str = Field('all', description='Sensor selection')
    fraction: float = Field(DEFAULT_TRAIN_FRACTION, description='Training fraction')
    grid: Optional[SweepGrid] = Field(None, description='Network hyperparameter to sweep')
    plateau_tol: float = Field(DEFAULT_PLATEAU_TOL, description='Relative tolerance for M_r')
    knee_tol: float = Field(DEFAULT_KNEE_TOL, description='Absolute tolerance for sweeps')
    params: FamilyParams = Field(default_factory=FamilyParams, description='Hyperparameters')
    threads: Optional[int] = Field(None, description='Worker cap')

    def echo(self) -> Dict:
        """Config as embedded in reports; output location and worker cap do not affect results."""
        return self.model_dump(mode='json', exclude={'out', 'threads'})
