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

"""Report rendering: canonical JSON, flat CSVs and 4-decimal text summaries."""

import json
import math
import numpy as np
import pandas as pd
from ..consts import REPORT_DECIMALS
from ..errors import ReportWriteError
from ..models import (
    ComparisonMatrix,
    EvalReport,
    ImportanceReport,
    RedundancyCurve,
    SensitivityReport,
    SweepResult,
)
from functools import singledispatch
from loguru import logger
from pathlib import Path
from pydantic import BaseModel
from typing import Any, Dict, List, Optional, Set, Union


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def canonical_json(payload: Any) -> str:
    """Sorted keys, two-space indent, full float precision, trailing newline."""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode='json')
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def _write_text(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    except OSError as e:
        raise ReportWriteError(f'Cannot write {path}: {str(e)}')
    logger.debug(f'Wrote {path}')
    return path


def write_json(payload: Any, path: Union[str, Path]) -> Path:
    """Write ``payload`` as canonical JSON."""
    return _write_text(canonical_json(payload), Path(path))


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a frame without index, LF line endings, full float precision."""
    return _write_text(frame.to_csv(index=False, lineterminator='\n'), Path(path))


def curve_frame(curve: RedundancyCurve) -> pd.DataFrame:
    """One row per M: ``M,sensor,r2,mae,train_r2,train_mae``."""
    m = range(1, len(curve.r2) + 1)
    return pd.DataFrame(
        {
            'M': list(m),
            'sensor': [s.value for s in curve.ordering[: len(curve.r2)]],
            'r2': curve.r2,
            'mae': curve.mae,
            'train_r2': curve.train_r2,
            'train_mae': curve.train_mae,
        }
    )


def comparison_frame(matrix: ComparisonMatrix) -> pd.DataFrame:
    """Flat grid ``family,ordering,M,r2,mae,train_r2,train_mae,seed``; failed cells left empty."""
    rows = []
    for cell in matrix.cells:
        report = cell.report
        rows.append(
            {
                'family': cell.family.value,
                'ordering': cell.ordering.value,
                'M': cell.m,
                'r2': report.r2 if report else None,
                'mae': report.mae if report else None,
                'train_r2': report.train_r2 if report else None,
                'train_mae': report.train_mae if report else None,
                'seed': cell.seed,
            }
        )
    columns = ['family', 'ordering', 'M', 'r2', 'mae', 'train_r2', 'train_mae', 'seed']
    return pd.DataFrame(rows, columns=columns)


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    """``value,r2,train_seconds`` per swept value."""
    return pd.DataFrame(
        {'value': result.values, 'r2': result.r2, 'train_seconds': result.train_seconds}
    )


def predictions_frame(labels, predictions, parameters) -> pd.DataFrame:
    """``y,y_hat,parameter`` per held-out sample."""
    return pd.DataFrame(
        {
            'y': np.asarray(labels, dtype=np.float64),
            'y_hat': np.asarray(predictions, dtype=np.float64),
            'parameter': np.asarray(parameters, dtype=np.int64),
        }
    )


def oob_frame(curve) -> pd.DataFrame:
    """``trees,oob_mse`` for every forest prefix."""
    curve = np.asarray(curve, dtype=np.float64)
    return pd.DataFrame({'trees': np.arange(1, curve.size + 1), 'oob_mse': curve})


def _f(value: Optional[float]) -> str:
    if value is None or not math.isfinite(value):
        return 'nan'
    return f'{value:.{REPORT_DECIMALS}f}'


@singledispatch
def summarize(report: Any) -> str:
    """Human readable summary, numbers at 4 decimals."""
    raise TypeError(f'No summary for {type(report).__name__}')


@summarize.register
def _(report: SensitivityReport) -> str:
    lines = ['sensor  C1      C2']
    for sensor, c1, c2 in zip(report.sensors, report.c1, report.c2):
        lines.append(f'{sensor.value:<7} {_f(c1)}  {_f(c2)}')
    lines.append('order c1: ' + ', '.join(s.value for s in report.ordering_c1))
    lines.append('order c2: ' + ', '.join(s.value for s in report.ordering_c2))
    return '\n'.join(lines) + '\n'


@summarize.register
def _(report: RedundancyCurve) -> str:
    lines = [f'family {report.family.value}, M_r = {report.m_r}', 'M  sensor  R2      MAE']
    for m, (r2, mae) in enumerate(zip(report.r2, report.mae), start=1):
        lines.append(f'{m:<2} {report.ordering[m - 1].value:<7} {_f(r2)}  {_f(mae)}')
    return '\n'.join(lines) + '\n'


@summarize.register
def _(report: ImportanceReport) -> str:
    lines = ['sensor  I_k']
    for sensor, value in zip(report.sensors, report.importance):
        lines.append(f'{sensor.value:<7} {_f(value)}')
    lines.append('ranking |I_k|: ' + ', '.join(s.value for s in report.ranking))
    return '\n'.join(lines) + '\n'


@summarize.register
def _(report: SweepResult) -> str:
    lines = [f'{report.grid.value} sweep, chosen {report.chosen}', 'value  R2']
    lines.extend(f'{v:<6} {_f(r2)}' for v, r2 in zip(report.values, report.r2))
    return '\n'.join(lines) + '\n'


@summarize.register
def _(report: EvalReport) -> str:
    unit = report.unit.value
    lines = [
        f'{report.family.value} on {report.state_kind.value}, M = {report.m}',
        f'train: R2 {_f(report.train_r2)}, MAE {_f(report.train_mae)} {unit} '
        f'(n = {report.n_train})',
        f'test:  R2 {_f(report.r2)}, MAE {_f(report.mae)} {unit} (n = {report.n})',
    ]
    lines.extend(
        f'  {_f(p.parameter_value)} {unit}: MAE {_f(p.mae)} (n = {p.count})'
        for p in report.per_parameter
    )
    return '\n'.join(lines) + '\n'


@summarize.register
def _(report: ComparisonMatrix) -> str:
    lines = [f'best tuples for {report.state_kind.value}']
    lines.extend(f'{b.family.value:<5} {b.ordering.value}: {b.text}' for b in report.best)
    return '\n'.join(lines) + '\n'


def report_render(
    report: BaseModel,
    out_dir: Union[str, Path],
    name: str,
    config: Optional[Dict] = None,
    frames: Optional[Dict[str, pd.DataFrame]] = None,
    exclude: Optional[Set[str]] = None,
) -> List[Path]:
    """Write ``<name>.json``, ``<name>.txt`` and any extra CSV frames into ``out_dir``.

    The text summary is written only for report types :func:`summarize` knows.

    Args:
        report: Report model to render.
        out_dir: Output directory, created when missing.
        name: Base file name.
        config: Resolved run configuration embedded under ``config``.
        frames: Extra CSVs keyed by file name.
        exclude: Report fields left out of the JSON (run-dependent values such as timings).

    Returns:
        Paths written, JSON first.

    Raises:
        ReportWriteError: A file could not be written.
    """
    out_dir = Path(out_dir)
    payload = {'config': config or {}, 'report': report.model_dump(mode='json', exclude=exclude)}
    paths = [write_json(payload, out_dir / f'{name}.json')]
    if type(report) in summarize.registry:
        paths.append(_write_text(summarize(report), out_dir / f'{name}.txt'))
    for filename, frame in (frames or {}).items():
        paths.append(write_csv(frame, out_dir / filename))
    logger.info(f'Rendered {name} into {out_dir}')
    return paths
