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

"""Hidden node and iteration sweeps of the back propagation network."""

import time
from ...consts import (
    DEFAULT_HIDDEN_GRID,
    DEFAULT_ITERATION_GRID,
    DEFAULT_KNEE_TOL,
    DEFAULT_SWEEP_HOLDOUT,
)
from ...errors import ArgumentError
from ...models import SweepGrid, SweepResult
from ...resources.reference_tables import bpnn_preset
from ..dataset import SampleSet, split
from ..evaluate import r_squared
from ..parallel import derive_seed, parallel_map
from .network import fit_bpnn, predict_bpnn
from loguru import logger
from typing import List, Optional, Sequence


def knee(values: Sequence[int], r2: Sequence[float], tol: float = DEFAULT_KNEE_TOL) -> int:
    """Smallest value whose R^2 is at least the best R^2 minus ``tol``."""
    if not values:
        raise ArgumentError('Sweep grid is empty')
    best = max(r2)
    return min(v for v, r in zip(values, r2) if r >= best - tol)


def sweep_bpnn(
    train: SampleSet,
    grid: SweepGrid,
    seed: int,
    values: Optional[Sequence[int]] = None,
    hidden: Optional[int] = None,
    iterations: Optional[int] = None,
    learning_rate: Optional[float] = None,
    tol: float = DEFAULT_KNEE_TOL,
    holdout: float = DEFAULT_SWEEP_HOLDOUT,
    n_jobs: Optional[int] = None,
) -> SweepResult:
    """Train one network per grid value and pick the plateau knee.

    The hyperparameter not being swept comes from ``hidden``/``iterations``
    or, when unset, from the state's preset. Every network is scored on the
    same stratified held-out part of ``train``.

    Raises:
        ArgumentError: Empty grid or non-positive grid value.
    """
    grid = SweepGrid(grid)
    if values is None:
        values = DEFAULT_HIDDEN_GRID if grid == SweepGrid.HIDDEN else DEFAULT_ITERATION_GRID
    values = [int(v) for v in values]
    if not values:
        raise ArgumentError('Sweep grid is empty')
    if min(values) < 1:
        raise ArgumentError(f'Sweep values must be positive, got {values}')
    preset_hidden, preset_iterations = bpnn_preset(train.state_kind)
    hidden = hidden or preset_hidden
    iterations = iterations or preset_iterations
    extra = {} if learning_rate is None else {'learning_rate': learning_rate}

    fit_part, score_part = split(train, 1.0 - holdout, derive_seed(seed, 'holdout'))

    def run(position: int):
        value = values[position]
        cell_seed = derive_seed(seed, 'bpnn', grid, position)
        h, it = (value, iterations) if grid == SweepGrid.HIDDEN else (hidden, value)
        start = time.perf_counter()
        network = fit_bpnn(fit_part, h, it, cell_seed, **extra)
        seconds = time.perf_counter() - start
        r2 = r_squared(predict_bpnn(network, score_part.features), score_part.labels)
        logger.debug(f'BPNN sweep {grid.value}={value}: R^2={r2:.4f} in {seconds:.2f}s')
        return r2, seconds

    results = parallel_map(run, range(len(values)), n_jobs)
    r2: List[float] = [r for r, _ in results]
    chosen = knee(values, r2, tol)
    logger.info(f'BPNN {grid.value} sweep: chose {chosen}')
    return SweepResult(
        grid=grid,
        values=values,
        r2=r2,
        train_seconds=[s for _, s in results],
        chosen=chosen,
        tol=tol,
    )
