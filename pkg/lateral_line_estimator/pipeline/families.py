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

"""Uniform fit, predict and serialization over the four model families."""

import json
import numpy as np
from ..consts import MODEL_FORMAT_VERSION
from ..errors import ArgumentError, SchemaError
from ..models import FamilyParams, ModelFamily, SensorId, StateKind
from ..resources.reference_tables import bpnn_preset
from . import forest as rf
from .baselines.linreg import fit_linreg, linreg_from_dict, linreg_to_dict, predict_linreg
from .baselines.network import bpnn_from_dict, bpnn_to_dict, fit_bpnn, predict_bpnn
from .baselines.svr import fit_svr, predict_svr, svr_from_dict, svr_to_dict
from .dataset import SampleSet
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union


@dataclass(frozen=True)
class TrainedModel:
    """A fitted regressor of any family with its training metadata.

    Attributes:
        family: Model family.
        model: Fitted model (Forest, Network, SvrModel or LinearModel).
        state_kind: Relative state the model estimates.
        sensors: Sensors used as features, in column order.
        seed: Training seed.
        n_train: Training sample count.
        params: Hyperparameters the model was fitted with.
    """

    family: ModelFamily
    model: Any
    state_kind: StateKind
    sensors: Tuple[SensorId, ...]
    seed: int
    n_train: int
    params: FamilyParams


def parse_family(family: Union[str, ModelFamily]) -> ModelFamily:
    """Family from its tag; unknown tags raise ArgumentError."""
    try:
        return ModelFamily(family)
    except ValueError:
        raise ArgumentError(
            f'Unknown model family {family!r}; expected one of '
            f'{", ".join(f.value for f in ModelFamily)}'
        )


def fit_family(
    train: SampleSet,
    family: Union[str, ModelFamily],
    seed: int,
    params: Optional[FamilyParams] = None,
    n_jobs: Optional[int] = None,
) -> TrainedModel:
    """Fit ``family`` on every feature of ``train``."""
    family = parse_family(family)
    params = params or FamilyParams()
    if family == ModelFamily.RF:
        model = rf.fit_forest(
            train,
            n_trees=params.n_trees,
            m_try=params.m_try,
            seed=seed,
            min_node_size=params.min_node_size,
            n_jobs=n_jobs,
        )
    elif family == ModelFamily.BPNN:
        preset_hidden, preset_iterations = bpnn_preset(train.state_kind)
        model = fit_bpnn(
            train,
            hidden=params.hidden or preset_hidden,
            iterations=params.iterations or preset_iterations,
            seed=seed,
            learning_rate=params.learning_rate,
        )
    elif family == ModelFamily.SVR:
        model = fit_svr(
            train,
            c_box=params.c_box,
            eps_tube=params.eps_tube,
            gamma=params.gamma,
            tol=params.svr_tol,
            max_iter=params.svr_max_iter,
        )
    else:
        model = fit_linreg(train)
    return TrainedModel(
        family=family,
        model=model,
        state_kind=train.state_kind,
        sensors=train.sensors,
        seed=seed,
        n_train=train.n,
        params=params,
    )


_PREDICT: Dict[ModelFamily, Callable[[Any, np.ndarray], Any]] = {
    ModelFamily.RF: rf.predict,
    ModelFamily.BPNN: predict_bpnn,
    ModelFamily.SVR: predict_svr,
    ModelFamily.REG: predict_linreg,
}

_DUMP: Dict[ModelFamily, Callable[[Any], Dict[str, Any]]] = {
    ModelFamily.RF: rf.to_dict,
    ModelFamily.BPNN: bpnn_to_dict,
    ModelFamily.SVR: svr_to_dict,
    ModelFamily.REG: linreg_to_dict,
}

_LOAD: Dict[ModelFamily, Callable[[Dict[str, Any]], Any]] = {
    ModelFamily.RF: rf.from_dict,
    ModelFamily.BPNN: bpnn_from_dict,
    ModelFamily.SVR: svr_from_dict,
    ModelFamily.REG: linreg_from_dict,
}


def predict(trained: TrainedModel, features) -> np.ndarray:
    """Predictions for a matrix whose columns follow ``trained.sensors``."""
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim != 2:
        raise ArgumentError(f'Expected a feature matrix, got shape {matrix.shape}')
    return np.asarray(_PREDICT[trained.family](trained.model, matrix), dtype=np.float64)


def predict_set(trained: TrainedModel, sample_set: SampleSet) -> np.ndarray:
    """Predictions for a sample set, using the model's sensors."""
    return predict(trained, sample_set.select(trained.sensors).features)


def serialize(trained: TrainedModel) -> Dict[str, Any]:
    """JSON-ready dump of a trained model and its metadata."""
    return {
        'format_version': MODEL_FORMAT_VERSION,
        'family': trained.family.value,
        'state_kind': trained.state_kind.value,
        'sensors': [s.value for s in trained.sensors],
        'seed': trained.seed,
        'n_train': trained.n_train,
        'params': trained.params.model_dump(mode='json'),
        'model': _DUMP[trained.family](trained.model),
    }


def deserialize(data: Dict[str, Any]) -> TrainedModel:
    """Rebuild a model written by :func:`serialize`."""
    try:
        if data['format_version'] != MODEL_FORMAT_VERSION:
            raise SchemaError(f'Unsupported model format {data["format_version"]}')
        family = ModelFamily(data['family'])
        return TrainedModel(
            family=family,
            model=_LOAD[family](data['model']),
            state_kind=StateKind(data['state_kind']),
            sensors=tuple(SensorId(s) for s in data['sensors']),
            seed=int(data['seed']),
            n_train=int(data['n_train']),
            params=FamilyParams.model_validate(data['params']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f'Malformed model file: {str(e)}')


def load(path: Union[str, Path]) -> TrainedModel:
    """Read a model file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise SchemaError(f'Model file not found: {path}')
    except json.JSONDecodeError as e:
        raise SchemaError(f'{path}: invalid JSON: {str(e)}')
    return deserialize(data)
