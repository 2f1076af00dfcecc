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

"""Regularized incomplete beta function and the F distribution tail."""

import math
from ...consts import BETA_CF_FPMIN, BETA_CF_MAX_ITER, BETA_CF_TOL
from ...errors import ArgumentError, ConvergenceError


def _guard(value: float) -> float:
    return BETA_CF_FPMIN if abs(value) < BETA_CF_FPMIN else value


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction of the incomplete beta function, modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 / _guard(1.0 - qab * x / qap)
    h = d
    for m in range(1, BETA_CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 / _guard(1.0 + aa * d)
        c = _guard(1.0 + aa / c)
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 / _guard(1.0 + aa * d)
        c = _guard(1.0 + aa / c)
        step = d * c
        h *= step
        if abs(step - 1.0) < BETA_CF_TOL:
            return h
    raise ConvergenceError(
        f'Incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}', best=h
    )


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Raises:
        ArgumentError: a or b not positive, or x outside [0, 1].
    """
    if not (a > 0 and b > 0):
        raise ArgumentError(f'betainc needs a, b > 0, got a={a}, b={b}')
    if not 0.0 <= x <= 1.0:
        raise ArgumentError(f'betainc needs 0 <= x <= 1, got {x}')
    if x == 0.0 or x == 1.0:
        return x
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for an F distribution with (d1, d2) degrees of freedom."""
    if d1 <= 0 or d2 <= 0:
        raise ArgumentError(f'F distribution needs positive degrees of freedom, got {d1}, {d2}')
    if math.isnan(f):
        raise ArgumentError('F statistic is NaN')
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def f_cdf(f: float, d1: float, d2: float) -> float:
    """P(F <= f) for an F distribution with (d1, d2) degrees of freedom."""
    return 1.0 - f_sf(f, d1, d2)
