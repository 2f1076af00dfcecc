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

"""Epsilon support vector regression with an RBF kernel.

The dual has 2n variables ``a = [alpha; alpha*]`` with signs
``z = [+1, ..., -1, ...]``, linear term ``p = [eps - y; eps + y]`` and
``Q = (z z^T) * K``. It is solved by pairwise updates on the maximal
violating pair with second-order selection of the second index, until the
violation drops below ``tol``. Kernel rows are computed on demand and kept
in a bounded cache.
"""

import numpy as np
from ...consts import (
    DEFAULT_SVR_C_BOX,
    DEFAULT_SVR_CACHE_ROWS,
    DEFAULT_SVR_EPS_TUBE,
    DEFAULT_SVR_MAX_ITER,
    DEFAULT_SVR_TOL,
    MODEL_FORMAT_VERSION,
    SVR_TAU,
)
from ...errors import ArgumentError, ConvergenceError, SchemaError
from ...models import SensorId
from ..dataset import SampleSet
from dataclasses import dataclass
from functools import lru_cache
from loguru import logger
from scipy.spatial.distance import cdist
from typing import Any, Dict, Optional, Tuple


def rbf_kernel(u: np.ndarray, v: np.ndarray, gamma: float) -> np.ndarray:
    """``exp(-gamma * |u - v|^2)`` for every pair of rows."""
    u = np.atleast_2d(u)
    v = np.atleast_2d(v)
    return np.exp(-gamma * cdist(u, v, 'sqeuclidean'))


@dataclass(frozen=True)
class SvrModel:
    """A fitted epsilon SVR.

    Attributes:
        alpha: Dual variables of the upper tube side, one per training point.
        alpha_star: Dual variables of the lower tube side.
        b: Bias.
        gamma: RBF bandwidth on standardized inputs.
        c_box: Box constraint.
        eps_tube: Tube half-width in label units.
        tol: Stopping tolerance on the maximal violation.
        x_mean: Per-feature training mean.
        x_scale: Per-feature training standard deviation (1 where it is 0).
        support: Indices of the support vectors.
        support_vectors: Standardized features of the support vectors.
        n_iter: Pair updates performed.
        sensors: Sensor of each feature column.
    """

    alpha: np.ndarray
    alpha_star: np.ndarray
    b: float
    gamma: float
    c_box: float
    eps_tube: float
    tol: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    support: np.ndarray
    support_vectors: np.ndarray
    n_iter: int
    sensors: Tuple[SensorId, ...]

    @property
    def coef(self) -> np.ndarray:
        """alpha - alpha* per training point."""
        return self.alpha - self.alpha_star

    def decision(self, xs: np.ndarray) -> np.ndarray:
        """Prediction for standardized rows."""
        if self.support.size == 0:
            return np.full(xs.shape[0], self.b)
        kernel = rbf_kernel(xs, self.support_vectors, self.gamma)
        return kernel @ self.coef[self.support] + self.b


def default_gamma(xs: np.ndarray) -> float:
    """``1 / (M * mean feature variance)`` of the standardized inputs."""
    variance = float(np.mean(xs.var(axis=0)))
    m = xs.shape[1]
    return 1.0 / (m * variance) if variance > 0 else 1.0 / m


class _Solver:
    """Pairwise dual solver state."""

    def __init__(self, xs, y, c_box, eps_tube, gamma, tol, cache_rows):
        self.xs = xs
        self.n = y.size
        self.c = c_box
        self.tol = tol
        self.z = np.concatenate([np.ones(self.n), -np.ones(self.n)])
        self.a = np.zeros(2 * self.n)
        self.grad = np.concatenate([eps_tube - y, eps_tube + y])
        self.gamma = gamma
        self.kernel_row = lru_cache(maxsize=cache_rows)(self._kernel_row)

    def _kernel_row(self, i: int) -> np.ndarray:
        row = rbf_kernel(self.xs[i], self.xs, self.gamma)[0]
        row.flags.writeable = False
        return row

    def q_row(self, t: int) -> np.ndarray:
        """Row t of Q over all 2n variables."""
        k = self.kernel_row(t % self.n)
        return self.z[t] * self.z * np.concatenate([k, k])

    def select(self) -> Optional[Tuple[int, int]]:
        """Maximal violating i and second-order j, or None when optimal within tol."""
        a, z, g, c = self.a, self.z, self.grad, self.c
        up = ((z > 0) & (a < c)) | ((z < 0) & (a > 0))
        low = ((z > 0) & (a > 0)) | ((z < 0) & (a < c))
        if not up.any() or not low.any():
            return None
        score = np.where(up, -z * g, -np.inf)
        i = int(np.argmax(score))
        g_max = score[i]
        zg = np.where(low, z * g, -np.inf)
        g_max2 = float(zg.max())
        if g_max + g_max2 < self.tol:
            return None
        q_i = self.q_row(i)
        grad_diff = g_max + zg
        candidates = low & (grad_diff > 0)
        if not candidates.any():
            return None
        quad = 2.0 - 2.0 * z[i] * z * q_i
        quad = np.where(quad > 0, quad, SVR_TAU)
        obj = np.where(candidates, -(grad_diff**2) / quad, np.inf)
        return i, int(np.argmin(obj))

    def violation(self) -> float:
        """Current maximal KKT violation."""
        a, z, g, c = self.a, self.z, self.grad, self.c
        up = ((z > 0) & (a < c)) | ((z < 0) & (a > 0))
        low = ((z > 0) & (a > 0)) | ((z < 0) & (a < c))
        if not up.any() or not low.any():
            return 0.0
        return float(np.max(-z[up] * g[up]) + np.max(z[low] * g[low]))

    def update(self, i: int, j: int) -> None:
        """Optimize the pair (i, j) analytically, keeping the box and the equality."""
        a, c = self.a, self.c
        q_i, q_j = self.q_row(i), self.q_row(j)
        old_i, old_j = a[i], a[j]
        if self.z[i] != self.z[j]:
            quad = max(2.0 + 2.0 * q_i[j], SVR_TAU)
            delta = (-self.grad[i] - self.grad[j]) / quad
            diff = a[i] - a[j]
            a[i] += delta
            a[j] += delta
            if diff > 0:
                if a[j] < 0:
                    a[j] = 0.0
                    a[i] = diff
            elif a[i] < 0:
                a[i] = 0.0
                a[j] = -diff
            if diff > 0:
                if a[i] > c:
                    a[i] = c
                    a[j] = c - diff
            elif a[j] > c:
                a[j] = c
                a[i] = c + diff
        else:
            quad = max(2.0 - 2.0 * q_i[j], SVR_TAU)
            delta = (self.grad[i] - self.grad[j]) / quad
            total = a[i] + a[j]
            a[i] -= delta
            a[j] += delta
            if total > c:
                if a[i] > c:
                    a[i] = c
                    a[j] = total - c
            elif a[j] < 0:
                a[j] = 0.0
                a[i] = total
            if total > c:
                if a[j] > c:
                    a[j] = c
                    a[i] = total - c
            elif a[i] < 0:
                a[i] = 0.0
                a[j] = total
        self.grad += q_i * (a[i] - old_i) + q_j * (a[j] - old_j)

    def rho(self) -> float:
        """Offset from free variables, or the middle of the feasible interval."""
        a, z, g, c = self.a, self.z, self.grad, self.c
        zg = z * g
        at_upper = a >= c
        at_lower = a <= 0
        free = ~at_upper & ~at_lower
        if free.any():
            return float(zg[free].mean())
        ub_mask = (at_upper & (z < 0)) | (at_lower & (z > 0))
        lb_mask = (at_upper & (z > 0)) | (at_lower & (z < 0))
        ub = float(zg[ub_mask].min()) if ub_mask.any() else np.inf
        lb = float(zg[lb_mask].max()) if lb_mask.any() else -np.inf
        return (ub + lb) / 2.0


def fit_svr(
    train: SampleSet,
    c_box: float = DEFAULT_SVR_C_BOX,
    eps_tube: float = DEFAULT_SVR_EPS_TUBE,
    gamma: Optional[float] = None,
    tol: float = DEFAULT_SVR_TOL,
    max_iter: int = DEFAULT_SVR_MAX_ITER,
    cache_rows: int = DEFAULT_SVR_CACHE_ROWS,
) -> SvrModel:
    """Solve the epsilon SVR dual on standardized inputs.

    Args:
        train: Training samples.
        c_box: Box constraint on every dual variable.
        eps_tube: Tube half-width in label units.
        gamma: RBF bandwidth; default ``1 / (M * mean feature variance)``.
        tol: Stop once the maximal KKT violation is below this.
        max_iter: Pair update cap.
        cache_rows: Kernel rows kept in memory.

    Raises:
        ArgumentError: Non-positive c_box, gamma or tol, or negative eps_tube.
        ConvergenceError: ``max_iter`` reached; ``best`` holds the model at the last iterate.
    """
    if not c_box > 0 or not tol > 0 or not eps_tube >= 0:
        raise ArgumentError(
            f'SVR needs c_box > 0, eps_tube >= 0, tol > 0; got {c_box}, {eps_tube}, {tol}'
        )
    if gamma is not None and not gamma > 0:
        raise ArgumentError(f'gamma must be positive, got {gamma}')
    if train.n == 0:
        raise ArgumentError('Training set is empty')
    x_mean = train.features.mean(axis=0)
    x_scale = train.features.std(axis=0)
    x_scale = np.where(x_scale > 0, x_scale, 1.0)
    xs = (train.features - x_mean) / x_scale
    gamma = default_gamma(xs) if gamma is None else gamma

    solver = _Solver(xs, train.labels, c_box, eps_tube, gamma, tol, cache_rows)
    n_iter = 0
    converged = False
    while n_iter < max_iter:
        pair = solver.select()
        if pair is None:
            converged = True
            break
        solver.update(*pair)
        n_iter += 1
    else:
        converged = solver.select() is None

    n = train.n
    alpha, alpha_star = solver.a[:n].copy(), solver.a[n:].copy()
    support = np.flatnonzero(alpha - alpha_star != 0)
    model = SvrModel(
        alpha=alpha,
        alpha_star=alpha_star,
        b=-solver.rho(),
        gamma=gamma,
        c_box=c_box,
        eps_tube=eps_tube,
        tol=tol,
        x_mean=x_mean,
        x_scale=x_scale,
        support=support,
        support_vectors=xs[support],
        n_iter=n_iter,
        sensors=train.sensors,
    )
    if not converged:
        raise ConvergenceError(
            f'SVR stopped after {max_iter} iterations with violation {solver.violation():.3g} '
            f'> {tol}',
            best=model,
        )
    logger.debug(f'SVR converged in {n_iter} iterations, {support.size} support vectors')
    return model


def predict_svr(model: SvrModel, x) -> Any:
    """SVR prediction; a float for one vector, an array for a matrix."""
    features = np.asarray(x, dtype=np.float64)
    matrix = features[None, :] if features.ndim == 1 else features
    if matrix.ndim != 2 or matrix.shape[1] != model.x_mean.size:
        raise ArgumentError(f'SVR expects {model.x_mean.size} features, got shape {np.shape(x)}')
    result = model.decision((matrix - model.x_mean) / model.x_scale)
    return float(result[0]) if features.ndim == 1 else result


def svr_to_dict(model: SvrModel) -> Dict[str, Any]:
    """JSON-ready dump of the dual solution and scaling statistics."""
    return {
        'format_version': MODEL_FORMAT_VERSION,
        'family': 'svr',
        'alpha': model.alpha.tolist(),
        'alpha_star': model.alpha_star.tolist(),
        'b': model.b,
        'gamma': model.gamma,
        'c_box': model.c_box,
        'eps_tube': model.eps_tube,
        'tol': model.tol,
        'x_mean': model.x_mean.tolist(),
        'x_scale': model.x_scale.tolist(),
        'support': model.support.tolist(),
        'support_vectors': model.support_vectors.tolist(),
        'n_iter': model.n_iter,
        'sensors': [s.value for s in model.sensors],
    }


def svr_from_dict(data: Dict[str, Any]) -> SvrModel:
    """Rebuild a model written by :func:`svr_to_dict`."""
    try:
        m = len(data['x_mean'])
        return SvrModel(
            alpha=np.array(data['alpha'], dtype=np.float64),
            alpha_star=np.array(data['alpha_star'], dtype=np.float64),
            b=float(data['b']),
            gamma=float(data['gamma']),
            c_box=float(data['c_box']),
            eps_tube=float(data['eps_tube']),
            tol=float(data['tol']),
            x_mean=np.array(data['x_mean'], dtype=np.float64),
            x_scale=np.array(data['x_scale'], dtype=np.float64),
            support=np.array(data['support'], dtype=np.int64),
            support_vectors=np.array(data['support_vectors'], dtype=np.float64).reshape(-1, m),
            n_iter=int(data['n_iter']),
            sensors=tuple(SensorId(s) for s in data['sensors']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f'Malformed SVR dump: {str(e)}')
