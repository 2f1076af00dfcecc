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

"""Three-layer back propagation network: sigmoid hidden layer, linear output.

Inputs are z-scored and labels min-max scaled to [0, 1] with training
statistics. Training is full-batch gradient descent on the mean squared
error; a step that would raise the loss is rejected and the rate halved.
"""

import numpy as np
from ...consts import (
    BPNN_INIT_HIGH,
    BPNN_INIT_LOW,
    DEFAULT_BPNN_LEARNING_RATE,
    MIN_BPNN_LEARNING_RATE,
    MODEL_FORMAT_VERSION,
)
from ...errors import ArgumentError, SchemaError, StandardizationError
from ...models import SensorId
from ..dataset import SampleSet
from dataclasses import dataclass
from loguru import logger
from scipy.special import expit
from typing import Any, Dict, NamedTuple, Tuple


class Weights(NamedTuple):
    """Parameters of the network.

    Attributes:
        w1: Hidden weights, hidden x inputs.
        b1: Hidden biases.
        w2: Output weights, one per hidden node.
        b2: Output bias, shape (1,).
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class Network:
    """A trained network with its scaling statistics.

    Attributes:
        weights: Trained parameters.
        x_mean: Per-feature training mean.
        x_std: Per-feature training standard deviation.
        y_min: Smallest training label.
        y_span: Training label range (1 when the labels are constant).
        sensors: Sensor of each input.
        loss_history: Training loss before the first and after every accepted step.
        learning_rate: Rate in effect when training stopped.
    """

    weights: Weights
    x_mean: np.ndarray
    x_std: np.ndarray
    y_min: float
    y_span: float
    sensors: Tuple[SensorId, ...]
    loss_history: Tuple[float, ...]
    learning_rate: float

    @property
    def hidden(self) -> int:
        """Hidden node count."""
        return self.weights.w1.shape[0]


def init_weights(n_inputs: int, hidden: int, rng: np.random.Generator) -> Weights:
    """Uniform(-0.5, 0.5) initialization."""
    return Weights(
        w1=rng.uniform(BPNN_INIT_LOW, BPNN_INIT_HIGH, (hidden, n_inputs)),
        b1=rng.uniform(BPNN_INIT_LOW, BPNN_INIT_HIGH, hidden),
        w2=rng.uniform(BPNN_INIT_LOW, BPNN_INIT_HIGH, hidden),
        b2=rng.uniform(BPNN_INIT_LOW, BPNN_INIT_HIGH, 1),
    )


def forward(weights: Weights, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hidden activations and outputs for standardized inputs."""
    hidden = expit(xs @ weights.w1.T + weights.b1)
    return hidden, hidden @ weights.w2 + weights.b2[0]


def loss_and_gradients(weights: Weights, xs: np.ndarray, ys: np.ndarray) -> Tuple[float, Weights]:
    """Mean squared error and its gradient with respect to every parameter."""
    hidden, out = forward(weights, xs)
    residual = out - ys
    loss = float(np.mean(residual**2))
    d_out = 2.0 * residual / ys.size
    d_hidden = np.outer(d_out, weights.w2) * hidden * (1.0 - hidden)
    grads = Weights(
        w1=d_hidden.T @ xs,
        b1=d_hidden.sum(axis=0),
        w2=hidden.T @ d_out,
        b2=np.array([d_out.sum()]),
    )
    return loss, grads


def numerical_gradients(
    weights: Weights, xs: np.ndarray, ys: np.ndarray, h: float = 1e-5
) -> Weights:
    """Central finite difference gradient of the loss."""
    grads = []
    for j, block in enumerate(weights):
        grad = np.zeros_like(block)
        for index in np.ndindex(block.shape):
            shifted = [w.copy() for w in weights]
            shifted[j][index] = block[index] + h
            plus, _ = loss_and_gradients(Weights(*shifted), xs, ys)
            shifted[j][index] = block[index] - h
            minus, _ = loss_and_gradients(Weights(*shifted), xs, ys)
            grad[index] = (plus - minus) / (2 * h)
        grads.append(grad)
    return Weights(*grads)


def gradient_check(weights: Weights, xs: np.ndarray, ys: np.ndarray, h: float = 1e-5) -> float:
    """Largest relative difference between analytic and numerical gradient blocks."""
    _, analytic = loss_and_gradients(weights, xs, ys)
    numeric = numerical_gradients(weights, xs, ys, h)
    worst = 0.0
    for a, n in zip(analytic, numeric):
        scale = np.linalg.norm(a) + np.linalg.norm(n)
        if scale > 0:
            worst = max(worst, float(np.linalg.norm(a - n) / scale))
    return worst


def _standardize(train: SampleSet) -> Tuple[np.ndarray, np.ndarray]:
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    for k, s in enumerate(std):
        if s == 0:
            label = train.sensors[k].value
            raise StandardizationError(f'Feature {label} has zero spread', feature=label)
    return mean, std


def fit_bpnn(
    train: SampleSet,
    hidden: int,
    iterations: int,
    seed: int,
    learning_rate: float = DEFAULT_BPNN_LEARNING_RATE,
) -> Network:
    """Train a network by safeguarded full-batch gradient descent.

    Raises:
        ArgumentError: hidden, iterations or learning_rate not positive.
        StandardizationError: A feature has zero standard deviation.
    """
    if hidden < 1 or iterations < 1:
        raise ArgumentError(f'hidden and iterations must be >= 1, got {hidden}, {iterations}')
    if not learning_rate > 0:
        raise ArgumentError(f'learning_rate must be positive, got {learning_rate}')
    if train.n == 0:
        raise ArgumentError('Training set is empty')
    x_mean, x_std = _standardize(train)
    xs = (train.features - x_mean) / x_std
    y_min = float(train.labels.min())
    y_span = float(train.labels.max()) - y_min or 1.0
    ys = (train.labels - y_min) / y_span

    weights = init_weights(train.m, hidden, np.random.default_rng(seed))
    loss, grads = loss_and_gradients(weights, xs, ys)
    history = [loss]
    rate = learning_rate
    for iteration in range(iterations):
        while True:
            candidate = Weights(*(w - rate * g for w, g in zip(weights, grads)))
            new_loss, new_grads = loss_and_gradients(candidate, xs, ys)
            if new_loss <= loss:
                break
            rate /= 2
            if rate < MIN_BPNN_LEARNING_RATE:
                break
        if new_loss > loss:
            logger.warning(
                f'Learning rate fell below {MIN_BPNN_LEARNING_RATE} at iteration {iteration}; '
                'stopping early'
            )
            break
        weights, loss, grads = candidate, new_loss, new_grads
        history.append(loss)
    logger.debug(f'BPNN hidden={hidden}: loss {history[0]:.6g} -> {loss:.6g}, rate {rate:.3g}')
    return Network(
        weights=weights,
        x_mean=x_mean,
        x_std=x_std,
        y_min=y_min,
        y_span=y_span,
        sensors=train.sensors,
        loss_history=tuple(history),
        learning_rate=rate,
    )


def predict_bpnn(model: Network, x) -> Any:
    """Unscaled network output; a float for one vector, an array for a matrix."""
    features = np.asarray(x, dtype=np.float64)
    matrix = features[None, :] if features.ndim == 1 else features
    if matrix.ndim != 2 or matrix.shape[1] != model.x_mean.size:
        raise ArgumentError(
            f'Network expects {model.x_mean.size} features, got shape {np.shape(x)}'
        )
    _, out = forward(model.weights, (matrix - model.x_mean) / model.x_std)
    result = model.y_min + out * model.y_span
    return float(result[0]) if features.ndim == 1 else result


def bpnn_to_dict(model: Network) -> Dict[str, Any]:
    """JSON-ready dump of weights and scaling statistics."""
    return {
        'format_version': MODEL_FORMAT_VERSION,
        'family': 'bpnn',
        'weights': {name: w.tolist() for name, w in model.weights._asdict().items()},
        'x_mean': model.x_mean.tolist(),
        'x_std': model.x_std.tolist(),
        'y_min': model.y_min,
        'y_span': model.y_span,
        'sensors': [s.value for s in model.sensors],
        'loss_history': list(model.loss_history),
        'learning_rate': model.learning_rate,
    }


def bpnn_from_dict(data: Dict[str, Any]) -> Network:
    """Rebuild a network written by :func:`bpnn_to_dict`."""
    try:
        w = data['weights']
        return Network(
            weights=Weights(*(np.array(w[name], dtype=np.float64) for name in Weights._fields)),
            x_mean=np.array(data['x_mean'], dtype=np.float64),
            x_std=np.array(data['x_std'], dtype=np.float64),
            y_min=float(data['y_min']),
            y_span=float(data['y_span']),
            sensors=tuple(SensorId(s) for s in data['sensors']),
            loss_history=tuple(float(v) for v in data['loss_history']),
            learning_rate=float(data['learning_rate']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f'Malformed network dump: {str(e)}')
