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

"""Worker pools shared by the pipeline steps.

Every parallel task derives its randomness from its own coordinates, so the
worker count changes wall-clock time only.
"""

import hashlib
import os
from ..consts import ENV_ALLE_THREADS
from ..errors import ArgumentError
from enum import Enum
from joblib import Parallel, cpu_count, delayed
from loguru import logger
from typing import Callable, Iterable, List, Optional, TypeVar


T = TypeVar('T')
R = TypeVar('R')


def resolve_threads(override: Optional[int] = None) -> int:
    """Number of workers to use.

    Priority: explicit override, then ``ALLE_THREADS``, then the CPU count.
    """
    if override is not None:
        if override < 1:
            raise ArgumentError(f'Worker count must be at least 1, got {override}')
        return override
    raw = os.getenv(ENV_ALLE_THREADS)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ArgumentError(f'{ENV_ALLE_THREADS} must be an integer, got {raw!r}')
        if value < 1:
            raise ArgumentError(f'{ENV_ALLE_THREADS} must be at least 1, got {value}')
        return min(value, cpu_count())
    return cpu_count()


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], n_jobs: Optional[int] = None
) -> List[R]:
    """Apply ``fn`` to each item, preserving input order."""
    items = list(items)
    workers = resolve_threads(n_jobs)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug(f'Running {len(items)} tasks on {workers} workers')
    return Parallel(n_jobs=workers, prefer='threads')(delayed(fn)(item) for item in items)


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary coordinates."""
    text = '|'.join(str(p.value if isinstance(p, Enum) else p) for p in parts)
    digest = hashlib.blake2b(text.encode(), digest_size=8)
    return int.from_bytes(digest.digest(), 'big') % (2**63)
