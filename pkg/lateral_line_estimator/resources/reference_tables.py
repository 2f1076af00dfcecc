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

"""Reference tables measured on the flume rig.

Criterion values and orderings per relative state, the network presets chosen
from hyperparameter sweeps, and the redundancy cuts and best (R^2, MAE, M)
tuples found with the random forest. They serve as fixtures for the sorting
and report code and as default network hyperparameters.
"""

from ..models import SensorId, StateKind
from typing import Dict, List, Tuple


_STATES = [
    StateKind.D,
    StateKind.A,
    StateKind.F,
    StateKind.PHI,
    StateKind.ALPHA,
    StateKind.BETA,
    StateKind.GAMMA,
]


def _by_state(rows: Dict[str, List[float]]) -> Dict[StateKind, List[float]]:
    """Pivot per-sensor rows into per-state columns in sensor order."""
    return {
        state: [rows[sensor.value][column] for sensor in SensorId.all()]
        for column, state in enumerate(_STATES)
    }


def _orders(rows: Dict[StateKind, str]) -> Dict[StateKind, List[SensorId]]:
    return {state: [SensorId(label) for label in order.split()] for state, order in rows.items()}


# Columns: d, A, f, phi, alpha, beta, gamma
REFERENCE_C1: Dict[StateKind, List[float]] = _by_state(
    {
        'P0': [0.3165, 0.0667, 0.2000, 0.1633, 0.1691, 0.2446, 0.4535],
        'PL1': [0.3117, 0.1109, 0.2000, 0.1340, 0.1268, 0.2586, 0.1495],
        'PL2': [0.1672, 0.2608, 0.4971, 0.2757, 0.1420, 0.1713, 0.1205],
        'PL3': [0.2676, 0.3224, 0.3555, 0.2394, 0.1336, 0.2439, 0.1000],
        'PL4': [0.4260, 0.3172, 0.3354, 0.2143, 0.1113, 0.3339, 0.2280],
        'PR1': [0.3280, 0.0968, 0.2025, 0.1427, 0.1205, 0.2199, 0.1708],
        'PR2': [0.1723, 0.2442, 0.5251, 0.2713, 0.1276, 0.1606, 0.1167],
        'PR3': [0.3130, 0.3174, 0.4818, 0.2009, 0.1346, 0.3175, 0.1000],
        'PR4': [0.2750, 0.3012, 0.5028, 0.2162, 0.1030, 0.2462, 0.1009],
    }
)

REFERENCE_C2: Dict[StateKind, List[float]] = _by_state(
    {
        'P0': [11.3143, 3.4602, 2.5864, 3.8769, 5.2647, 6.9166, 0.9537],
        'PL1': [2.3996, 1.6968, 1.7521, 2.4489, 4.4564, 3.0227, 1.6151],
        'PL2': [1.4778, 1.3393, 1.1334, 1.1984, 2.0292, 1.6177, 1.0072],
        'PL3': [0.6341, 1.2951, 0.8205, 1.3811, 1.1658, 1.6542, 0.5840],
        'PL4': [1.0560, 1.4444, 0.4281, 1.1442, 1.2445, 1.6735, 0.2736],
        'PR1': [2.2620, 1.4399, 1.5111, 2.1011, 4.1315, 2.9065, 1.4136],
        'PR2': [1.7180, 1.2739, 0.8769, 1.1659, 2.0737, 1.9250, 0.9149],
        'PR3': [0.7541, 1.3676, 0.6749, 1.1011, 1.2411, 1.0540, 0.4223],
        'PR4': [0.6398, 1.2407, 0.9156, 0.9262, 1.2121, 1.5360, 0.1482],
    }
)

REFERENCE_ORDER_C1: Dict[StateKind, List[SensorId]] = _orders(
    {
        StateKind.D: 'PL4 PR1 P0 PR3 PL1 PR4 PL3 PR2 PL2',
        StateKind.A: 'PL3 PR3 PL4 PR4 PL2 PR2 PL1 PR1 P0',
        StateKind.F: 'PR2 PR4 PL2 PR3 PL3 PL4 PR1 P0 PL1',
        StateKind.PHI: 'PL2 PR2 PL3 PR4 PL4 PR3 P0 PR1 PL1',
        StateKind.ALPHA: 'P0 PL2 PR3 PL3 PR2 PL1 PR1 PL4 PR4',
        StateKind.BETA: 'PL4 PR3 PL1 PR4 P0 PL3 PR1 PL2 PR2',
        StateKind.GAMMA: 'P0 PL4 PR1 PL1 PL2 PR2 PR4 PL3 PR3',
    }
)

REFERENCE_ORDER_C2: Dict[StateKind, List[SensorId]] = _orders(
    {
        StateKind.D: 'P0 PL1 PR1 PR2 PL2 PL4 PR3 PR4 PL3',
        StateKind.A: 'P0 PL1 PL4 PR1 PR3 PL2 PL3 PR2 PR4',
        StateKind.F: 'P0 PL1 PR1 PL2 PR4 PR2 PL3 PR3 PL4',
        StateKind.PHI: 'P0 PL1 PR1 PL3 PL2 PR2 PL4 PR3 PR4',
        StateKind.ALPHA: 'P0 PL1 PR1 PR2 PL2 PL4 PR3 PR4 PL3',
        StateKind.BETA: 'P0 PL1 PR1 PR2 PL4 PL3 PL2 PR4 PR3',
        StateKind.GAMMA: 'PL1 PR1 PL2 P0 PR2 PL3 PR3 PL4 PR4',
    }
)

# Network presets from the hidden-node and iteration sweeps
BPNN_HIDDEN_PRESETS: Dict[StateKind, int] = dict(zip(_STATES, [11, 10, 9, 6, 13, 6, 10]))
BPNN_ITERATION_PRESETS: Dict[StateKind, int] = dict(
    zip(_STATES, [150, 250, 150, 200, 400, 150, 300])
)

# Redundancy cut per state under the C2 ordering
REFERENCE_M_R: Dict[StateKind, int] = dict(zip(_STATES, [4, 1, 3, 4, 7, 4, 5]))

# Best random forest (R^2, MAE, M) per state
REFERENCE_BEST: Dict[StateKind, Tuple[float, float, int]] = dict(
    zip(
        _STATES,
        [
            (0.972, 3.250, 4),
            (0.975, 1.119, 1),
            (0.949, 0.030, 3),
            (0.958, 2.467, 4),
            (0.952, 5.778, 7),
            (0.952, 1.836, 4),
            (0.985, 1.915, 5),
        ],
    )
)

# Most important sensors by permutation importance, M_r of them per state
REFERENCE_IMPORTANT: Dict[StateKind, List[SensorId]] = _orders(
    {
        StateKind.D: 'P0 PR2 PL2 PL1',
        StateKind.A: 'P0',
        StateKind.F: 'PR1 PL1 P0',
        StateKind.PHI: 'PL1 PR1 P0 PL3',
        StateKind.ALPHA: 'PR1 PR2 PL1 PR4 P0 PL2 PL4',
        StateKind.BETA: 'P0 PR2 PL3 PL2',
        StateKind.GAMMA: 'PR2 PL2 PL1 PR1 PL3',
    }
)

# Held-out amplitude estimation: overall (R^2, MAE) and MAE at A = 4, 14, 28 degrees
REFERENCE_AMPLITUDE_ESTIMATE: Tuple[float, float] = (0.975, 1.091)
REFERENCE_AMPLITUDE_PER_PARAMETER: Dict[float, float] = {4.0: 2.171, 14.0: 3.163, 28.0: 3.211}


def bpnn_preset(state: StateKind) -> Tuple[int, int]:
    """Hidden nodes and iterations preset for ``state``."""
    return BPNN_HIDDEN_PRESETS[state], BPNN_ITERATION_PRESETS[state]
