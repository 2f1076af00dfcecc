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

"""Multiple linear regression by least squares with an overall F-test."""

import numpy as np
from ...consts import DEFAULT_F_TEST_ALPHA, MODEL_FORMAT_VERSION, RANK_TOLERANCE
from ...errors import ArgumentError, SchemaError, SingularityError, UndefinedVarianceError
from ...models import SensorId
from ..dataset import SampleSet
from .special import f_sf
from dataclasses import dataclass
from loguru import logger
from scipy.linalg import qr, solve_triangular
from typing import Any, Dict, Tuple


INTERCEPT_LABEL = 'const'


@dataclass(frozen=True)
class LinearModel:
    """Fitted ``Y = a0 + sum_k a_k X(k) + e``.

    Attributes:
        intercept: a0.
        coef: a_k per feature.
        residuals: Training residuals.
        sse: Residual sum of squares.
        ssr: Regression sum of squares.
        sst: Total sum of squares.
        r2: 1 - SSE/SST on the training set.
        df_model: M.
        df_resid: n - M - 1.
        f_stat: (SSR/M) / (SSE/(n - M - 1)); infinite when SSE is 0.
        p_value: P(F > f_stat) under H0 (all a_k zero).
        alpha: Significance level of the test.
        reject: Whether H0 is rejected at ``alpha``.
        sensors: Sensor of each feature column.
    """

    intercept: float
    coef: np.ndarray
    residuals: np.ndarray
    sse: float
    ssr: float
    sst: float
    r2: float
    df_model: int
    df_resid: int
    f_stat: float
    p_value: float
    alpha: float
    reject: bool
    sensors: Tuple[SensorId, ...]


def fit_linreg(train: SampleSet, alpha: float = DEFAULT_F_TEST_ALPHA) -> LinearModel:
    """Least squares fit via column-pivoted QR of the design matrix.

    Raises:
        ArgumentError: n <= M + 1.
        SingularityError: The design matrix is rank deficient.
        UndefinedVarianceError: The labels are constant.
    """
    n, m = train.n, train.m
    if n <= m + 1:
        raise ArgumentError(f'Linear regression needs n > M + 1, got n={n}, M={m}')
    y = train.labels
    design = np.hstack([np.ones((n, 1)), train.features])
    q, r, pivot = qr(design, mode='economic', pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TOLERANCE * diag[0]))
    if rank < m + 1:
        labels = [INTERCEPT_LABEL] + [s.value for s in train.sensors]
        dependent = [labels[j] for j in pivot[rank:]]
        raise SingularityError(
            f'Design matrix has rank {rank} < {m + 1}; dependent column(s): '
            f'{", ".join(dependent)}',
            columns=dependent,
        )
    solution = np.empty(m + 1)
    solution[pivot] = solve_triangular(r, q.T @ y)

    fitted = design @ solution
    residuals = y - fitted
    mean = y.mean()
    sst = float(np.sum((y - mean) ** 2))
    if sst == 0:
        raise UndefinedVarianceError('Labels are constant; R^2 and the F-test are undefined')
    sse = float(np.sum(residuals**2))
    ssr = float(np.sum((fitted - mean) ** 2))
    df_model, df_resid = m, n - m - 1
    f_stat = np.inf if sse == 0 else (ssr / df_model) / (sse / df_resid)
    p_value = f_sf(f_stat, df_model, df_resid)
    model = LinearModel(
        intercept=float(solution[0]),
        coef=solution[1:],
        residuals=residuals,
        sse=sse,
        ssr=ssr,
        sst=sst,
        r2=1.0 - sse / sst,
        df_model=df_model,
        df_resid=df_resid,
        f_stat=float(f_stat),
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
        sensors=train.sensors,
    )
    logger.info(f'Fitted linear regression: R^2={model.r2:.4f}, F={f_stat:.4g}, p={p_value:.3g}')
    return model


def predict_linreg(model: LinearModel, x) -> Any:
    """a0 + a . x; a float for one vector, an array for a matrix."""
    features = np.asarray(x, dtype=np.float64)
    matrix = features[None, :] if features.ndim == 1 else features
    if matrix.ndim != 2 or matrix.shape[1] != model.coef.size:
        raise ArgumentError(f'Model expects {model.coef.size} features, got shape {np.shape(x)}')
    result = model.intercept + matrix @ model.coef
    return float(result[0]) if features.ndim == 1 else result


def linreg_to_dict(model: LinearModel) -> Dict[str, Any]:
    """JSON-ready dump of the coefficients and the test statistics."""
    return {
        'format_version': MODEL_FORMAT_VERSION,
        'family': 'reg',
        'intercept': model.intercept,
        'coef': model.coef.tolist(),
        'residuals': model.residuals.tolist(),
        'sse': model.sse,
        'ssr': model.ssr,
        'sst': model.sst,
        'r2': model.r2,
        'df_model': model.df_model,
        'df_resid': model.df_resid,
        'f_stat': model.f_stat if np.isfinite(model.f_stat) else 'inf',
        'p_value': model.p_value,
        'alpha': model.alpha,
        'reject': model.reject,
        'sensors': [s.value for s in model.sensors],
    }


def linreg_from_dict(data: Dict[str, Any]) -> LinearModel:
    """Rebuild a model written by :func:`linreg_to_dict`."""
    try:
        return LinearModel(
            intercept=float(data['intercept']),
            coef=np.array(data['coef'], dtype=np.float64),
            residuals=np.array(data['residuals'], dtype=np.float64),
            sse=float(data['sse']),
            ssr=float(data['ssr']),
            sst=float(data['sst']),
            r2=float(data['r2']),
            df_model=int(data['df_model']),
            df_resid=int(data['df_resid']),
            f_stat=float(data['f_stat']),
            p_value=float(data['p_value']),
            alpha=float(data['alpha']),
            reject=bool(data['reject']),
            sensors=tuple(SensorId(s) for s in data['sensors']),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f'Malformed linear model dump: {str(e)}')
