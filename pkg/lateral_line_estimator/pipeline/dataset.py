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

"""Sample data model, recording ingestion, smoothing and sample set assembly.

A recording is one repetition of the 9-channel pressure time series at one
parameter value. Smoothed recordings are cut to a centered block and stacked
into the original sample set, one row per time step, labeled with the state
value the recording was taken at.
"""

import json
import math
import numpy as np
import pandas as pd
from ..consts import (
    DEFAULT_PER_RECORDING,
    DEFAULT_SMOOTHING_SIGMA,
    DEFAULT_SMOOTHING_WINDOW,
    N_SENSORS,
    RECORDINGS_PER_PARAMETER,
    SENSOR_LABELS,
)
from ..errors import (
    ArgumentError,
    CompletenessError,
    LabelMismatchError,
    ParseError,
    ReportWriteError,
    SchemaError,
    StratificationError,
)
from ..models import Provenance, RecordingMeta, SensorId, StateKind, Unit
from dataclasses import dataclass, field
from loguru import logger
from pathlib import Path
from pydantic import ValidationError
from scipy.ndimage import convolve1d
from scipy.signal.windows import gaussian
from typing import Dict, List, Optional, Sequence, Tuple, Union


TIME_COLUMN = 't'
RECORDING_COLUMNS = [TIME_COLUMN, *SENSOR_LABELS]
LABEL_COLUMN = 'Y'


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Recording:
    """One repetition of the 9-channel pressure series at one parameter value.

    Attributes:
        meta: Sidecar metadata (state kind, parameter, repetition, sample rate).
        time: Time stamps, one per step.
        pressure: Pressure values, steps x 9 in sensor order.
    """

    meta: RecordingMeta
    time: np.ndarray
    pressure: np.ndarray

    def __post_init__(self):
        """Validate shapes and freeze the arrays."""
        pressure = np.asarray(self.pressure, dtype=np.float64)
        time = np.asarray(self.time, dtype=np.float64)
        if pressure.ndim != 2 or pressure.shape[1] != N_SENSORS:
            raise ArgumentError(f'Recording needs {N_SENSORS} channels, got {pressure.shape}')
        if time.shape != (pressure.shape[0],):
            raise ArgumentError('Time stamps and channels differ in length')
        object.__setattr__(self, 'pressure', _frozen(pressure))
        object.__setattr__(self, 'time', _frozen(time))

    @property
    def n_steps(self) -> int:
        """Number of time steps."""
        return self.pressure.shape[0]

    @property
    def state_kind(self) -> StateKind:
        """State kind varied in the recording."""
        return self.meta.state_kind


@dataclass(frozen=True)
class SampleSet:
    """Labeled HPV samples of one relative state.

    Attributes:
        state_kind: Relative state the labels measure.
        features: n x M matrix of HPVs, columns in ``sensors`` order.
        labels: State value per sample.
        parameter_index: 1-based grid index per sample (the split stratum).
        ids: Sample identity, stable across derived subsets.
        sensors: Sensor of each feature column.
        provenance: Where the set came from.
    """

    state_kind: StateKind
    features: np.ndarray
    labels: np.ndarray
    parameter_index: np.ndarray
    ids: np.ndarray
    sensors: Tuple[SensorId, ...] = field(default_factory=lambda: tuple(SensorId.all()))
    provenance: Provenance = Provenance.INGESTED

    def __post_init__(self):
        """Validate shapes and freeze the arrays."""
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != len(self.sensors):
            raise ArgumentError(
                f'Features must be n x {len(self.sensors)}, got shape {features.shape}'
            )
        n = features.shape[0]
        for name in ('labels', 'parameter_index', 'ids'):
            if np.shape(getattr(self, name)) != (n,):
                raise ArgumentError(f'{name} must have one entry per sample')
        if not np.all(np.isfinite(features)) or not np.all(np.isfinite(self.labels)):
            raise ArgumentError('Samples must be finite')
        object.__setattr__(self, 'features', _frozen(features))
        object.__setattr__(self, 'labels', _frozen(self.labels))
        index = np.array(self.parameter_index, dtype=np.int64)
        index.flags.writeable = False
        ids = np.array(self.ids, dtype=np.int64)
        ids.flags.writeable = False
        object.__setattr__(self, 'parameter_index', index)
        object.__setattr__(self, 'ids', ids)
        object.__setattr__(self, 'sensors', tuple(SensorId(s) for s in self.sensors))

    @property
    def n(self) -> int:
        """Sample count."""
        return self.features.shape[0]

    @property
    def m(self) -> int:
        """Feature count."""
        return self.features.shape[1]

    @property
    def unit(self) -> Unit:
        """Unit of the labels."""
        return self.state_kind.unit

    def parameters(self) -> List[Tuple[int, float]]:
        """Distinct (grid index, state value) pairs in grid order."""
        pairs = {}
        for index, value in zip(self.parameter_index.tolist(), self.labels.tolist()):
            pairs.setdefault(index, value)
        return sorted(pairs.items())

    def counts(self) -> Dict[int, int]:
        """Sample count per grid index."""
        index, counts = np.unique(self.parameter_index, return_counts=True)
        return dict(zip(index.tolist(), counts.tolist()))

    def take(self, rows: Sequence[int]) -> 'SampleSet':
        """Derived set made of the given rows."""
        rows = np.asarray(rows, dtype=np.int64)
        return SampleSet(
            state_kind=self.state_kind,
            features=self.features[rows],
            labels=self.labels[rows],
            parameter_index=self.parameter_index[rows],
            ids=self.ids[rows],
            sensors=self.sensors,
            provenance=Provenance.DERIVED,
        )

    def select(self, sensors: Sequence[SensorId]) -> 'SampleSet':
        """Derived set keeping only the given sensors, in the given order."""
        sensors = [SensorId(s) for s in sensors]
        if not sensors:
            raise ArgumentError('At least one sensor must be selected')
        if len(set(sensors)) != len(sensors):
            raise ArgumentError('Sensor selection contains duplicates')
        missing = [s.value for s in sensors if s not in self.sensors]
        if missing:
            raise ArgumentError(f'Sensors not in the sample set: {", ".join(missing)}')
        columns = [self.sensors.index(s) for s in sensors]
        return SampleSet(
            state_kind=self.state_kind,
            features=self.features[:, columns],
            labels=self.labels,
            parameter_index=self.parameter_index,
            ids=self.ids,
            sensors=tuple(sensors),
            provenance=Provenance.DERIVED,
        )


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix('.json')


def _finite_columns(frame: pd.DataFrame, columns: Sequence[str], source: Path) -> np.ndarray:
    """Columns as a float matrix; the first non-finite cell raises ParseError."""
    values = np.empty((len(frame), len(columns)), dtype=np.float64)
    for j, column in enumerate(columns):
        series = frame[column]
        if series.dtype == object:
            series = pd.to_numeric(series, errors='coerce')
        numeric = series.to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(numeric))
        if bad.size:
            row = int(bad[0]) + 1
            cell = frame[column].iloc[bad[0]]
            raise ParseError(
                f'{source}: row {row}, column {column}: {cell!r} is not a finite number',
                row=row,
                column=column,
            )
        values[:, j] = numeric
    return values


def _read_csv(path: Path, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision='round_trip', **kwargs)
    except FileNotFoundError:
        raise SchemaError(f'File not found: {path}')
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaError(f'{path}: unreadable CSV: {str(e)}')


def ingest_recording(path: Union[str, Path], schema: Optional[StateKind] = None) -> Recording:
    """Read a recording CSV and its sidecar metadata.

    Args:
        path: Recording CSV with header ``t,P0,PL1,...,PR4``.
        schema: Expected state kind; None accepts any.

    Returns:
        The parsed recording, rows in file order.

    Raises:
        SchemaError: Missing file, sidecar or channel column.
        ParseError: A cell is not a finite number.
        LabelMismatchError: The sidecar names another state kind.
    """
    path = Path(path)
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise SchemaError(f'{path}: missing sidecar metadata {sidecar.name}')
    try:
        meta = RecordingMeta.model_validate_json(sidecar.read_text(encoding='utf-8'))
    except ValidationError as e:
        raise SchemaError(f'{sidecar}: invalid metadata: {str(e)}')
    if schema is not None and meta.state_kind != schema:
        raise LabelMismatchError(
            f'{path}: recorded state {meta.state_kind.value}, expected {schema.value}'
        )
    if meta.unit != meta.state_kind.unit:
        raise LabelMismatchError(
            f'{path}: unit {meta.unit.value} does not match state {meta.state_kind.value}'
        )

    frame = _read_csv(path)
    missing = [c for c in RECORDING_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f'{path}: missing column(s) {", ".join(missing)}')
    values = _finite_columns(frame, RECORDING_COLUMNS, path)
    logger.debug(f'Ingested {path.name}: {len(frame)} steps')
    return Recording(meta=meta, time=values[:, 0], pressure=values[:, 1:])


def recording_filename(meta: RecordingMeta) -> str:
    """Canonical file name of a recording."""
    return f'{meta.state_kind.value}_p{meta.parameter_index:02d}_r{meta.recording_index}.csv'


def export_recording(recording: Recording, path: Union[str, Path]) -> Path:
    """Write a recording CSV and its sidecar; values round-trip exactly."""
    path = Path(path)
    frame = pd.DataFrame(recording.pressure, columns=list(SENSOR_LABELS))
    frame.insert(0, TIME_COLUMN, recording.time)
    meta = json.dumps(recording.meta.model_dump(mode='json'), indent=2, sort_keys=True)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator='\n')
        _sidecar_path(path).write_text(meta + '\n', encoding='utf-8')
    except OSError as e:
        raise ReportWriteError(f'Cannot write {path}: {str(e)}')
    return path


def ingest_directory(
    path: Union[str, Path], schema: Optional[StateKind] = None
) -> List[Recording]:
    """Read every recording CSV in a directory, in file name order."""
    path = Path(path)
    if not path.is_dir():
        raise SchemaError(f'Not a directory: {path}')
    files = sorted(path.glob('*.csv'))
    if not files:
        raise CompletenessError(f'{path}: no recordings found', gaps=['all recordings'])
    recordings = [ingest_recording(f, schema) for f in files]
    logger.info(f'Ingested {len(recordings)} recordings from {path}')
    return recordings


def gaussian_kernel(window: int, sigma: float) -> np.ndarray:
    """Discrete Gaussian window of odd length, normalized to unit sum."""
    if window < 1 or window % 2 == 0:
        raise ArgumentError(f'Smoothing window must be odd and positive, got {window}')
    if not sigma > 0 or not math.isfinite(sigma):
        raise ArgumentError(f'Smoothing sigma must be positive, got {sigma}')
    kernel = gaussian(window, std=sigma, sym=True)
    return kernel / kernel.sum()


def smooth(
    recording: Recording,
    window: int = DEFAULT_SMOOTHING_WINDOW,
    sigma: float = DEFAULT_SMOOTHING_SIGMA,
) -> Recording:
    """Convolve each channel with a normalized Gaussian window, reflecting at the edges."""
    kernel = gaussian_kernel(window, sigma)
    if window > recording.n_steps:
        raise ArgumentError(
            f'Smoothing window {window} is longer than the series ({recording.n_steps} steps)'
        )
    smoothed = convolve1d(recording.pressure, kernel, axis=0, mode='reflect')
    return Recording(meta=recording.meta, time=recording.time, pressure=smoothed)


def _expected_parameters(recordings: Sequence[Recording]) -> List[int]:
    state = recordings[0].state_kind
    indices = {r.meta.parameter_index for r in recordings}
    on_grid = all(
        r.meta.parameter_index <= state.p
        and math.isclose(r.meta.parameter_value, state.grid[r.meta.parameter_index - 1])
        for r in recordings
    )
    top = max(max(indices), state.p if on_grid else 0)
    return list(range(1, top + 1))


def assemble(
    recordings: Sequence[Recording],
    per_recording: int = DEFAULT_PER_RECORDING,
    n_recordings: int = RECORDINGS_PER_PARAMETER,
) -> SampleSet:
    """Stack the centered block of every recording into the original sample set.

    Args:
        recordings: Smoothed recordings of one state, all parameters and repetitions.
        per_recording: Consecutive samples kept from the middle of each recording.
        n_recordings: Repetitions required per parameter value.

    Returns:
        Sample set with p x n_recordings x per_recording rows, ordered by
        parameter, repetition and time.

    Raises:
        CompletenessError: A (parameter, repetition) pair is missing, duplicated
            or too short.
        LabelMismatchError: Recordings of different states, or inconsistent
            parameter values for one grid index.
    """
    if per_recording < 1:
        raise ArgumentError(f'per_recording must be positive, got {per_recording}')
    if not recordings:
        raise CompletenessError('No recordings to assemble', gaps=['all recordings'])
    state = recordings[0].state_kind
    kinds = {r.state_kind for r in recordings}
    if len(kinds) > 1:
        raise LabelMismatchError(
            f'Recordings mix states: {", ".join(sorted(k.value for k in kinds))}'
        )

    by_key: Dict[Tuple[int, int], Recording] = {}
    values: Dict[int, float] = {}
    gaps: List[str] = []
    for r in recordings:
        key = (r.meta.parameter_index, r.meta.recording_index)
        if key in by_key:
            gaps.append(f'parameter {key[0]} recording {key[1]} duplicated')
        by_key[key] = r
        known = values.setdefault(key[0], r.meta.parameter_value)
        if known != r.meta.parameter_value:
            raise LabelMismatchError(
                f'Parameter {key[0]} labeled both {known} and {r.meta.parameter_value}'
            )

    parameters = _expected_parameters(recordings)
    for i in parameters:
        for k in range(1, n_recordings + 1):
            r = by_key.get((i, k))
            if r is None:
                gaps.append(f'parameter {i} recording {k} missing')
            elif r.n_steps < per_recording:
                gaps.append(
                    f'parameter {i} recording {k} has {r.n_steps} steps, needs {per_recording}'
                )
    extra = sorted(k for k in by_key if k[1] > n_recordings)
    gaps.extend(f'parameter {i} recording {k} unexpected' for i, k in extra)
    if gaps:
        raise CompletenessError(f'Incomplete recordings: {"; ".join(gaps)}', gaps=gaps)

    blocks, labels, index = [], [], []
    for i in parameters:
        for k in range(1, n_recordings + 1):
            r = by_key[(i, k)]
            start = (r.n_steps - per_recording) // 2
            blocks.append(r.pressure[start : start + per_recording])
            labels.append(np.full(per_recording, values[i]))
            index.append(np.full(per_recording, i))
    features = np.vstack(blocks)
    sample_set = SampleSet(
        state_kind=state,
        features=features,
        labels=np.concatenate(labels),
        parameter_index=np.concatenate(index),
        ids=np.arange(features.shape[0]),
    )
    logger.info(
        f'Assembled {state.value}: {len(parameters)} parameters x {n_recordings} x '
        f'{per_recording} = {sample_set.n} samples'
    )
    return sample_set


def split(
    sample_set: SampleSet, train_fraction: float, seed: int
) -> Tuple[SampleSet, SampleSet]:
    """Stratified train/test partition, stratum = parameter value.

    Each stratum contributes round(train_fraction * size) samples to the
    training set; both sets keep the original sample order.

    Raises:
        ArgumentError: train_fraction outside (0, 1).
        StratificationError: A stratum would end up absent from either side.
    """
    if not 0 < train_fraction < 1:
        raise ArgumentError(f'train_fraction must be in (0, 1), got {train_fraction}')
    rng = np.random.default_rng(seed)
    train_rows: List[np.ndarray] = []
    for stratum in np.unique(sample_set.parameter_index):
        rows = np.flatnonzero(sample_set.parameter_index == stratum)
        n_train = int(math.floor(train_fraction * rows.size + 0.5))
        if n_train == 0 or n_train == rows.size:
            raise StratificationError(
                f'Fraction {train_fraction} leaves stratum {stratum} ({rows.size} samples) '
                'without train or test samples'
            )
        train_rows.append(rng.permutation(rows)[:n_train])
    train_mask = np.zeros(sample_set.n, dtype=bool)
    train_mask[np.concatenate(train_rows)] = True
    return (
        sample_set.take(np.flatnonzero(train_mask)),
        sample_set.take(np.flatnonzero(~train_mask)),
    )


def _grid_tag(sample_set: SampleSet) -> str:
    pairs = sample_set.parameters()
    values = dict(pairs)
    if not pairs or len(set(values.values())) != len(pairs):
        return ''
    expected = np.array([values[i] for i in sample_set.parameter_index.tolist()])
    if not np.array_equal(expected, sample_set.labels):
        return ''
    return ' grid=' + ','.join(f'{i}:{float(v)!r}' for i, v in pairs)


def _parse_grid_tag(tag: str, path: Path) -> Tuple[np.ndarray, np.ndarray]:
    try:
        pairs = [item.split(':', 1) for item in tag.split(',')]
        return (
            np.array([int(i) for i, _ in pairs], dtype=np.int64),
            np.array([float(v) for _, v in pairs]),
        )
    except ValueError:
        raise SchemaError(f'{path}: malformed grid tag {tag!r}')


def export_sample_set(sample_set: SampleSet, path: Union[str, Path]) -> Path:
    """Write a sample set as ``# state=<kind> unit=<unit> grid=...`` followed by ``Y,X1,...``.

    The ``grid`` tag lists ``index:value`` pairs so a subset missing some
    parameter values keeps its grid indices. It is left out when labels and
    indices do not pair one to one.
    """
    path = Path(path)
    columns = [f'X{s.ordinal + 1}' for s in sample_set.sensors]
    frame = pd.DataFrame(sample_set.features, columns=columns)
    frame.insert(0, LABEL_COLUMN, sample_set.labels)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='\n') as handle:
            handle.write(f'# state={sample_set.state_kind.value} unit={sample_set.unit.value}')
            handle.write(_grid_tag(sample_set) + '\n')
            frame.to_csv(handle, index=False, lineterminator='\n')
    except OSError as e:
        raise ReportWriteError(f'Cannot write {path}: {str(e)}')
    return path


def read_sample_set(path: Union[str, Path], schema: Optional[StateKind] = None) -> SampleSet:
    """Read a sample set CSV written by :func:`export_sample_set`.

    Grid indices come from the ``grid`` tag. Files without one number the
    distinct label values in ascending order.
    """
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as handle:
            first = handle.readline().strip()
    except FileNotFoundError:
        raise SchemaError(f'File not found: {path}')
    if not first.startswith('#'):
        raise SchemaError(f'{path}: missing "# state=<kind> unit=<unit>" line')
    tags = dict(part.split('=', 1) for part in first.lstrip('#').split() if '=' in part)
    try:
        state = StateKind(tags.get('state'))
    except ValueError:
        raise SchemaError(f'{path}: unknown state {tags.get("state")!r}')
    if schema is not None and state != schema:
        raise LabelMismatchError(f'{path}: holds state {state.value}, expected {schema.value}')

    frame = _read_csv(path, skiprows=1)
    feature_columns = [c for c in frame.columns if c != LABEL_COLUMN]
    if LABEL_COLUMN not in frame.columns or not feature_columns:
        raise SchemaError(f'{path}: expected header Y,X1,...,X{N_SENSORS}')
    sensors = []
    for column in feature_columns:
        ordinal = column[1:]
        if not column.startswith('X') or not ordinal.isdigit():
            raise SchemaError(f'{path}: unexpected column {column}')
        if not 1 <= int(ordinal) <= N_SENSORS:
            raise SchemaError(f'{path}: column {column} out of range')
        sensors.append(SensorId.from_index(int(ordinal) - 1))
    values = _finite_columns(frame, [LABEL_COLUMN, *feature_columns], path)
    labels = values[:, 0]
    if 'grid' in tags:
        indices, grid = _parse_grid_tag(tags['grid'], path)
        match = np.isclose(labels[:, None], grid[None, :])
        if not match.any(axis=1).all():
            stray = labels[~match.any(axis=1)][0]
            raise SchemaError(f'{path}: label {stray} is not in the grid tag')
        parameter_index = indices[match.argmax(axis=1)]
    else:
        _, inverse = np.unique(labels, return_inverse=True)
        parameter_index = inverse + 1
    return SampleSet(
        state_kind=state,
        features=values[:, 1:],
        labels=labels,
        parameter_index=parameter_index,
        ids=np.arange(len(labels)),
        sensors=tuple(sensors),
        provenance=Provenance.INGESTED,
    )
