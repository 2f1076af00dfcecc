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

"""Accuracy metrics, the train/test estimation protocol and family comparisons."""

import numpy as np
from ..consts import DEFAULT_PLATEAU_TOL, DEFAULT_SWEEP_HOLDOUT
from ..errors import AlleError, ArgumentError, LabelMismatchError, UndefinedVarianceError
from ..models import (
    BestTuple,
    ComparisonCell,
    ComparisonMatrix,
    Criterion,
    EvalReport,
    FamilyParams,
    ModelFamily,
    ParameterError,
    SensorId,
    Unit,
)
from .dataset import SampleSet, split
from .families import TrainedModel, fit_family, parse_family, predict_set
from .parallel import derive_seed, parallel_map
from loguru import logger
from typing import Dict, List, Optional, Sequence, Tuple


def _pair(predictions, labels) -> Tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if predictions.size != labels.size:
        raise ArgumentError(
            f'Predictions and labels differ in length: {predictions.size} != {labels.size}'
        )
    if labels.size == 0:
        raise ArgumentError('Predictions and labels are empty')
    return predictions, labels


def mae(predictions, labels) -> float:
    """Mean absolute error."""
    predictions, labels = _pair(predictions, labels)
    return float(np.mean(np.abs(predictions - labels)))


def r_squared(predictions, labels) -> float:
    """Coefficient of determination ``1 - SSE/SST``.

    Raises:
        UndefinedVarianceError: The labels are all identical.
    """
    predictions, labels = _pair(predictions, labels)
    if labels.size < 2:
        raise ArgumentError('R^2 needs at least 2 samples')
    sst = float(np.sum((labels - labels.mean()) ** 2))
    if sst == 0:
        raise UndefinedVarianceError('Labels have zero variance; R^2 is undefined')
    return 1.0 - float(np.sum((predictions - labels) ** 2)) / sst


def plateau_cut(r2: Sequence[float], tol: float = DEFAULT_PLATEAU_TOL) -> int:
    """Smallest 1-based M whose R^2 is within ``tol`` (relative) of the best R^2."""
    values = np.asarray(r2, dtype=np.float64)
    if values.size == 0:
        raise ArgumentError('Curve is empty')
    finite = np.where(np.isfinite(values), values, -np.inf)
    best = float(finite.max())
    threshold = best - tol * abs(best)
    return int(np.flatnonzero(finite >= threshold)[0]) + 1


def per_parameter_errors(
    predictions, labels, parameter_index: Sequence[int]
) -> List[ParameterError]:
    """MAE restricted to each parameter value, in grid order."""
    predictions, labels = _pair(predictions, labels)
    index = np.asarray(parameter_index)
    errors = []
    for i in np.unique(index):
        mask = index == i
        errors.append(
            ParameterError(
                parameter_value=float(labels[mask][0]),
                count=int(mask.sum()),
                mae=float(np.mean(np.abs(predictions[mask] - labels[mask]))),
            )
        )
    return errors


def _prefix(sample_set: SampleSet, sensors: Optional[Sequence[SensorId]]) -> List[SensorId]:
    chosen = list(sample_set.sensors) if sensors is None else [SensorId(s) for s in sensors]
    return sorted(chosen, key=lambda s: s.ordinal)


def evaluate_model(
    trained: TrainedModel, train: SampleSet, test: SampleSet
) -> Tuple[EvalReport, np.ndarray]:
    """Training-set and held-out accuracy of a fitted model, plus held-out predictions."""
    if train.state_kind != test.state_kind or trained.state_kind != test.state_kind:
        raise LabelMismatchError(
            f'Model for {trained.state_kind.value} evaluated on {test.state_kind.value}'
        )
    train_predictions = predict_set(trained, train)
    test_predictions = predict_set(trained, test)
    report = EvalReport(
        family=trained.family,
        state_kind=test.state_kind,
        unit=test.unit,
        sensors=list(trained.sensors),
        m=len(trained.sensors),
        n=test.n,
        mae=mae(test_predictions, test.labels),
        r2=r_squared(test_predictions, test.labels),
        per_parameter=per_parameter_errors(test_predictions, test.labels, test.parameter_index),
        n_train=train.n,
        train_mae=mae(train_predictions, train.labels),
        train_r2=r_squared(train_predictions, train.labels),
        seed=trained.seed,
    )
    return report, test_predictions


def estimate(
    train: SampleSet,
    test: SampleSet,
    family: ModelFamily,
    sensors: Optional[Sequence[SensorId]],
    seed: int,
    params: Optional[FamilyParams] = None,
    n_jobs: Optional[int] = None,
) -> EvalReport:
    """Fit ``family`` on ``train`` restricted to ``sensors`` and score it on ``test``.

    The sensors are used in index order, so two orderings sharing a prefix set
    train identical models under the same seed.
    """
    family = parse_family(family)
    chosen = _prefix(train, sensors)
    trained = fit_family(train.select(chosen), family, seed, params, n_jobs)
    report, _ = evaluate_model(trained, train, test)
    logger.debug(
        f'{family.value} M={report.m}: test R^2={report.r2:.4f}, MAE={report.mae:.4f}'
    )
    return report


def format_best_tuple(r2: float, mae_value: float, unit: Unit, m: int) -> str:
    """``(R^2, MAE unit, M)`` with three decimals, e.g. ``(0.972, 3.250 mm, 4)``."""
    suffix = '°' if unit == Unit.DEGREE else f' {unit.value}'
    return f'({r2:.3f}, {mae_value:.3f}{suffix}, {m})'


def _best_tuple(
    family: ModelFamily, cells: List[ComparisonCell], unit: Unit, tol: float
) -> Optional[BestTuple]:
    best: Optional[BestTuple] = None
    for criterion in (Criterion.C2, Criterion.C1):
        curve = sorted(
            (c for c in cells if c.family == family and c.ordering == criterion),
            key=lambda c: c.m,
        )
        r2 = [c.report.r2 if c.report else -np.inf for c in curve]
        if not curve or not np.isfinite(max(r2)):
            continue
        m_r = plateau_cut(r2, tol)
        report = curve[m_r - 1].report
        if best is None or report.r2 > best.r2:
            best = BestTuple(
                family=family,
                ordering=criterion,
                r2=report.r2,
                mae=report.mae,
                m=m_r,
                text=format_best_tuple(report.r2, report.mae, unit, m_r),
            )
    return best


def compare_families(
    sample_set: SampleSet,
    orderings: Dict[Criterion, Sequence[SensorId]],
    seed: int,
    params: Optional[FamilyParams] = None,
    families: Optional[Sequence[ModelFamily]] = None,
    tol: float = DEFAULT_PLATEAU_TOL,
    holdout: float = DEFAULT_SWEEP_HOLDOUT,
    n_jobs: Optional[int] = None,
) -> ComparisonMatrix:
    """Evaluate every (family, ordering, M) cell on one stratified split.

    Cell seeds derive from (seed, family, ordering, M), so any cell can be
    recomputed alone. A failing cell is recorded with its error and the grid
    completes. The best tuple of a family is (R^2, MAE, M_r) under the
    ordering whose R^2 at M_r is higher, C2 on ties.
    """
    families = [parse_family(f) for f in (families or list(ModelFamily))]
    orderings = {Criterion(k): [SensorId(s) for s in v] for k, v in orderings.items()}
    train, test = split(sample_set, 1.0 - holdout, derive_seed(seed, 'holdout'))
    coordinates = [
        (family, criterion, m)
        for family in families
        for criterion in sorted(orderings, key=lambda c: c.value)
        for m in range(1, len(orderings[criterion]) + 1)
    ]

    def run(coordinate) -> ComparisonCell:
        family, criterion, m = coordinate
        cell_seed = derive_seed(seed, family, criterion, m)
        try:
            report = estimate(
                train, test, family, orderings[criterion][:m], cell_seed, params, n_jobs=1
            )
            return ComparisonCell(
                family=family, ordering=criterion, m=m, seed=cell_seed, report=report
            )
        except AlleError as e:
            logger.warning(f'Cell {family.value}/{criterion.value}/M={m} failed: {str(e)}')
            return ComparisonCell(
                family=family,
                ordering=criterion,
                m=m,
                seed=cell_seed,
                error=f'{type(e).__name__}: {str(e)}',
            )

    cells = parallel_map(run, coordinates, n_jobs)
    best = [b for f in families if (b := _best_tuple(f, cells, sample_set.unit, tol)) is not None]
    for b in best:
        logger.info(f'{b.family.value} best ({b.ordering.value}): {b.text}')
    return ComparisonMatrix(
        state_kind=sample_set.state_kind,
        orderings=orderings,
        cells=cells,
        best=best,
        tol=tol,
    )
