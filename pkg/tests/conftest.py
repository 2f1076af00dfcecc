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

"""Test fixtures for the lateral line estimation pipeline."""

import numpy as np
import pytest
from lateral_line_estimator.models import SensorId, StateKind
from lateral_line_estimator.pipeline.dataset import SampleSet
from lateral_line_estimator.resources.reference_tables import REFERENCE_C1, REFERENCE_C2
from typing import Callable, Optional, Sequence


def build_sample_set(
    means,
    state: StateKind = StateKind.D,
    per_parameter: int = 1,
    noise: float = 0.0,
    seed: int = 0,
    sensors: Optional[Sequence[SensorId]] = None,
) -> SampleSet:
    """Sample set whose per-parameter means are ``means`` (p x M) plus Gaussian noise."""
    means = np.asarray(means, dtype=np.float64)
    p, m = means.shape
    grid = np.asarray(state.grid[:p]) if p <= state.p else np.arange(p, dtype=np.float64)
    rng = np.random.default_rng(seed)
    features = np.repeat(means, per_parameter, axis=0)
    if noise:
        features = features + rng.normal(0.0, noise, features.shape)
    return SampleSet(
        state_kind=state,
        features=features,
        labels=np.repeat(grid, per_parameter),
        parameter_index=np.repeat(np.arange(1, p + 1), per_parameter),
        ids=np.arange(p * per_parameter),
        sensors=tuple(sensors or SensorId.all()[:m]),
    )


def reference_means(state: StateKind) -> np.ndarray:
    """Per-parameter means whose C1 and C2 equal the reference table row of ``state``.

    Each column is ``s * [0, 1, 1 - e, 1, 1 - e, ...]``: range s, first step s,
    every later step s * e, so C1 = (1 + (p - 2) e) / (p - 1) and C2 = s * C1.
    """
    p = state.p
    columns = []
    for c1, c2 in zip(REFERENCE_C1[state], REFERENCE_C2[state]):
        e = ((p - 1) * c1 - 1.0) / (p - 2)
        column = [0.0] + [1.0 if i % 2 == 0 else 1.0 - e for i in range(p - 1)]
        columns.append(np.asarray(column) * (c2 / c1))
    return np.column_stack(columns)


@pytest.fixture
def make_set() -> Callable[..., SampleSet]:
    """Factory for sample sets with known per-parameter means."""
    return build_sample_set


@pytest.fixture
def linear_set() -> SampleSet:
    """Distance samples whose sensors respond linearly to the state, with noise."""
    gains = np.array([0.8, 0.5, 0.3, 0.2, 0.1, 0.45, 0.25, 0.15, 0.05])
    grid = np.asarray(StateKind.D.grid)
    means = grid[:, None] * gains + 2.0
    return build_sample_set(means, per_parameter=40, noise=1.0, seed=7)


@pytest.fixture
def small_linear_set() -> SampleSet:
    """A smaller version of ``linear_set`` for the slower families."""
    gains = np.array([0.8, 0.5, 0.3, 0.2, 0.1, 0.45, 0.25, 0.15, 0.05])
    grid = np.asarray(StateKind.D.grid)
    means = grid[:, None] * gains + 2.0
    return build_sample_set(means, per_parameter=10, noise=1.0, seed=11)


@pytest.fixture
def generator_payload() -> dict:
    """Noise-free generator configuration with distinct linear sensitivities."""
    gains = [0.9, 0.1, 0.5, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6]
    return {
        'state_kind': 'd',
        'coefficients': [[1.0, g, 0.0] for g in gains],
        'osc_gain': [0.5] * 9,
        'osc_frequency_hz': 1.0,
        'noise_std': 0.0,
        'n_steps': 300,
        'n_recordings': 5,
        'seed': 3,
    }


def build_regression_set(features, labels, state: StateKind = StateKind.D) -> SampleSet:
    """Sample set for plain regression checks; every sample shares one stratum."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    n = features.shape[0]
    return SampleSet(
        state_kind=state,
        features=features,
        labels=np.asarray(labels, dtype=np.float64),
        parameter_index=np.ones(n, dtype=np.int64),
        ids=np.arange(n),
        sensors=tuple(SensorId.all()[: features.shape[1]]),
    )
