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

"""Deterministic synthetic wake-pressure generator.

Stands in for flume experiments. Channel k at parameter value theta follows a
quadratic mean response plus a sinusoid and Gaussian noise, so the
sensitivity of every sensor is known in closed form.
"""

import numpy as np
from ..consts import GROUND_TRUTH_FILE, N_SENSORS
from ..errors import ArgumentError
from ..models import GeneratorConfig, GroundTruth, RecordingMeta
from .dataset import Recording, export_recording, recording_filename
from .parallel import parallel_map
from .reports import write_json
from .sensitivity import sort_sensors, step_criteria
from loguru import logger
from pathlib import Path
from typing import List, Optional, Tuple, Union


def mean_response(config: GeneratorConfig) -> np.ndarray:
    """Analytic mean of every channel at every grid value, p x 9."""
    grid = np.asarray(config.resolved_grid(), dtype=np.float64)
    if grid.size == 0:
        raise ArgumentError('Generator grid is empty')
    a = np.asarray(config.coefficients, dtype=np.float64)
    theta = grid[:, None]
    return a[:, 0] + a[:, 1] * theta + a[:, 2] * theta**2


def analytic_criteria(config: GeneratorConfig) -> GroundTruth:
    """Closed-form C1, C2 and orderings of a configuration, free of sampling noise."""
    mu = mean_response(config)
    steps = step_criteria(mu)
    return GroundTruth(
        state_kind=config.state_kind,
        grid=config.resolved_grid(),
        mean_response=mu.tolist(),
        c1=steps.c1.tolist(),
        c2=steps.c2.tolist(),
        ordering_c1=sort_sensors(steps.c1),
        ordering_c2=sort_sensors(steps.c2),
    )


def _recording(config: GeneratorConfig, mu: np.ndarray, i: int, r: int) -> Recording:
    t = np.arange(config.n_steps) / config.sample_rate_hz
    gain = np.asarray(config.osc_gain, dtype=np.float64)
    phase = np.arange(N_SENSORS) * np.pi / 9
    pressure = np.empty((config.n_steps, N_SENSORS))
    for k in range(N_SENSORS):
        # one stream per (state, parameter, recording, channel)
        rng = np.random.default_rng([config.seed, config.state_kind.ordinal, i, r, k])
        noise = rng.normal(0.0, config.noise_std, config.n_steps)
        oscillation = gain[k] * np.sin(2 * np.pi * config.osc_frequency_hz * t + phase[k])
        pressure[:, k] = mu[i, k] + oscillation + noise
    meta = RecordingMeta(
        state_kind=config.state_kind,
        unit=config.state_kind.unit,
        parameter_value=config.resolved_grid()[i],
        parameter_index=i + 1,
        recording_index=r + 1,
        sample_rate_hz=config.sample_rate_hz,
    )
    return Recording(meta=meta, time=t, pressure=pressure)


def generate(
    config: GeneratorConfig, n_jobs: Optional[int] = None
) -> Tuple[List[Recording], GroundTruth]:
    """Emit every (parameter, repetition) recording of a configuration.

    Returns:
        Recordings ordered by parameter then repetition, and the ground truth.

    Raises:
        ArgumentError: Empty grid, or no channel whose mean varies with the state.
    """
    mu = mean_response(config)
    a = np.asarray(config.coefficients)
    if not np.any(a[:, 1:] != 0):
        raise ArgumentError('At least one sensor needs a non-constant mean response')
    if mu.shape[0] < 2:
        raise ArgumentError('Generator grid needs at least 2 values')
    truth = analytic_criteria(config)
    pairs = [(i, r) for i in range(mu.shape[0]) for r in range(config.n_recordings)]
    recordings = parallel_map(lambda pair: _recording(config, mu, *pair), pairs, n_jobs)
    logger.info(
        f'Generated {len(recordings)} {config.state_kind.value} recordings '
        f'of {config.n_steps} steps (seed {config.seed})'
    )
    return recordings, truth


def write_dataset(
    recordings: List[Recording], truth: GroundTruth, out_dir: Union[str, Path]
) -> List[Path]:
    """Write recordings in the dataset CSV schema plus ``ground_truth.json``."""
    out_dir = Path(out_dir)
    paths = [export_recording(r, out_dir / recording_filename(r.meta)) for r in recordings]
    paths.append(write_json(truth.model_dump(mode='json'), out_dir / GROUND_TRUTH_FILE))
    logger.info(f'Wrote {len(recordings)} recordings and ground truth to {out_dir}')
    return paths
