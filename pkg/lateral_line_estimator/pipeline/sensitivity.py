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

"""Sensor sensitivity criteria, sensor ordering and redundancy analysis.

For each sensor, the mean response at every parameter value is taken over all
samples of that value. C2 is the mean absolute change of that mean between
neighbouring parameter values; C1 is the same after dividing each change by
the sensor's range of means. Sensors sorted by a criterion give the prefixes
the redundancy sweep trains on.
"""

import numpy as np
from ..consts import DEFAULT_PLATEAU_TOL, DEFAULT_SWEEP_HOLDOUT
from ..errors import ArgumentError, CompletenessError
from ..models import (
    Criterion,
    FamilyParams,
    ModelFamily,
    RedundancyCurve,
    SensitivityReport,
    SensorId,
)
from .dataset import SampleSet, split
from .evaluate import estimate, plateau_cut
from .parallel import derive_seed, parallel_map
from dataclasses import dataclass
from loguru import logger
from typing import List, NamedTuple, Optional, Sequence, Tuple


@dataclass(frozen=True)
class PerParameterMeans:
    """Mean HPV of every sensor at every parameter value.

    Attributes:
        values: p x M matrix; row i holds the means at the i-th parameter value.
        parameters: State value of each row.
        counts: Samples averaged into each row.
        sensors: Sensor of each column.
    """

    values: np.ndarray
    parameters: Tuple[float, ...]
    counts: Tuple[int, ...]
    sensors: Tuple[SensorId, ...]

    @property
    def p(self) -> int:
        """Number of parameter values."""
        return self.values.shape[0]


class StepCriteria(NamedTuple):
    """Intermediate and final values of both criteria, one entry per sensor."""

    delta: np.ndarray
    mm_range: np.ndarray
    delta_prime: np.ndarray
    c1: np.ndarray
    c2: np.ndarray


def per_parameter_means(sample_set: SampleSet) -> PerParameterMeans:
    """Average every sensor over the samples of each parameter value.

    Raises:
        CompletenessError: A parameter index between 1 and the largest present
            index has no samples.
    """
    if sample_set.n == 0:
        raise CompletenessError('Sample set is empty', gaps=['all parameters'])
    present = np.unique(sample_set.parameter_index)
    expected = np.arange(1, int(present.max()) + 1)
    missing = np.setdiff1d(expected, present)
    if missing.size:
        gaps = [f'parameter {i} has no samples' for i in missing.tolist()]
        raise CompletenessError(f'Empty parameter groups: {missing.tolist()}', gaps=gaps)

    rows, parameters, counts = [], [], []
    for i in expected:
        mask = sample_set.parameter_index == i
        rows.append(sample_set.features[mask].mean(axis=0))
        parameters.append(float(sample_set.labels[mask][0]))
        counts.append(int(mask.sum()))
    if len(set(counts)) > 1:
        logger.warning(f'Unequal sample counts per parameter: {counts}')
    return PerParameterMeans(
        values=np.vstack(rows),
        parameters=tuple(parameters),
        counts=tuple(counts),
        sensors=sample_set.sensors,
    )


def step_criteria(means: np.ndarray) -> StepCriteria:
    """Both criteria for a p x M matrix of per-parameter means."""
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 2 or means.shape[0] < 2:
        raise ArgumentError(f'Criteria need at least 2 parameter values, got {means.shape[0]}')
    delta = np.abs(np.diff(means, axis=0))
    mm_range = means.max(axis=0) - means.min(axis=0)
    safe = np.where(mm_range > 0, mm_range, 1.0)
    delta_prime = np.where(mm_range > 0, delta / safe, 0.0)
    return StepCriteria(
        delta=delta.T,
        mm_range=mm_range,
        delta_prime=delta_prime.T,
        c1=delta_prime.mean(axis=0),
        c2=delta.mean(axis=0),
    )


def sort_sensors(
    values: Sequence[float], sensors: Optional[Sequence[SensorId]] = None
) -> List[SensorId]:
    """Sensors by descending criterion value, ties by ascending sensor index.

    Args:
        values: One criterion value per sensor.
        sensors: Sensor of each value; defaults to all nine in index order.
    """
    sensors = [SensorId(s) for s in (sensors or SensorId.all())]
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (len(sensors),):
        raise ArgumentError(f'Expected {len(sensors)} criterion values, got {values.shape}')
    if not np.all(np.isfinite(values)):
        raise ArgumentError('Criterion values must be finite')
    ordinals = np.array([s.ordinal for s in sensors])
    order = np.lexsort((ordinals, -values))
    return [sensors[i] for i in order]


def criteria(means: PerParameterMeans, criterion: Criterion = Criterion.C2) -> SensitivityReport:
    """C1 and C2 per sensor with both orderings.

    Raises:
        ArgumentError: Fewer than two parameter values.
    """
    steps = step_criteria(means.values)
    return SensitivityReport(
        sensors=list(means.sensors),
        c1=steps.c1.tolist(),
        c2=steps.c2.tolist(),
        delta=steps.delta.tolist(),
        mm_range=steps.mm_range.tolist(),
        delta_prime=steps.delta_prime.tolist(),
        ordering_c1=sort_sensors(steps.c1, means.sensors),
        ordering_c2=sort_sensors(steps.c2, means.sensors),
        criterion=criterion,
    )


def sensitivity_report(
    sample_set: SampleSet, criterion: Criterion = Criterion.C2
) -> Tuple[SensitivityReport, List[SensorId]]:
    """Criteria of a sample set and the ordering under ``criterion``."""
    report = criteria(per_parameter_means(sample_set), criterion)
    ordering = report.ordering(criterion)
    logger.info(
        f'{sample_set.state_kind.value} ordering by {criterion.value}: '
        f'{", ".join(s.value for s in ordering)}'
    )
    return report, ordering


def m_sweep(
    sample_set: SampleSet,
    ordering: Sequence[SensorId],
    family: ModelFamily,
    seed: int,
    params: Optional[FamilyParams] = None,
    tol: float = DEFAULT_PLATEAU_TOL,
    holdout: float = DEFAULT_SWEEP_HOLDOUT,
    n_jobs: Optional[int] = None,
) -> RedundancyCurve:
    """Train ``family`` on every prefix of ``ordering`` and locate the plateau.

    The set is split once (stratified, seed-derived) and every prefix is
    scored on the same held-out part. M_r is the smallest M whose R^2 is
    within ``tol`` (relative) of the best R^2 of the curve.

    Raises:
        ArgumentError: Unknown family, or an ordering that is not a permutation
            of the set's sensors.
    """
    try:
        family = ModelFamily(family)
    except ValueError:
        raise ArgumentError(f'Unknown model family: {family}')
    ordering = [SensorId(s) for s in ordering]
    if sorted(s.ordinal for s in ordering) != sorted(s.ordinal for s in sample_set.sensors):
        raise ArgumentError('Ordering must list every sensor of the sample set exactly once')
    params = params or FamilyParams()

    train, test = split(sample_set, 1.0 - holdout, derive_seed(seed, 'holdout'))
    seeds = [derive_seed(seed, family, 'sweep', m) for m in range(1, len(ordering) + 1)]

    def run(m: int):
        logger.debug(f'M-sweep {family.value}: M={m}')
        return estimate(train, test, family, ordering[:m], seeds[m - 1], params, n_jobs=1)

    reports = parallel_map(run, range(1, len(ordering) + 1), n_jobs)
    r2 = [r.r2 for r in reports]
    m_r = plateau_cut(r2, tol)
    logger.info(f'M-sweep {family.value}: M_r={m_r}, R^2={r2[m_r - 1]:.4f}')
    return RedundancyCurve(
        family=family,
        ordering=ordering,
        mae=[r.mae for r in reports],
        r2=r2,
        train_mae=[r.train_mae for r in reports],
        train_r2=[r.train_r2 for r in reports],
        m_r=m_r,
        tol=tol,
        seeds=seeds,
    )
