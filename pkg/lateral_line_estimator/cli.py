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

"""Command line entry point of the lateral line estimation pipeline."""

import argparse
import json
import os
import sys
from . import __version__
from .consts import (
    DEFAULT_KNEE_TOL,
    DEFAULT_LOG_LEVEL,
    DEFAULT_PER_RECORDING,
    DEFAULT_PLATEAU_TOL,
    DEFAULT_SMOOTHING_SIGMA,
    DEFAULT_SMOOTHING_WINDOW,
    DEFAULT_TRAIN_FRACTION,
    ENV_ALLE_LOG_LEVEL,
    MODEL_FILE,
    SAMPLES_FILE,
)
from .errors import AlleError, ArgumentError
from .models import (
    Criterion,
    FamilyParams,
    GeneratorConfig,
    ModelFamily,
    RunConfig,
    SensorId,
    StateKind,
    SweepGrid,
)
from .pipeline import forest as rf
from .pipeline.baselines.sweep import sweep_bpnn
from .pipeline.dataset import (
    SampleSet,
    assemble,
    export_sample_set,
    ingest_directory,
    read_sample_set,
    smooth,
    split,
)
from .pipeline.evaluate import compare_families, evaluate_model
from .pipeline.families import fit_family, load, serialize
from .pipeline.parallel import resolve_threads
from .pipeline.reports import (
    canonical_json,
    comparison_frame,
    curve_frame,
    oob_frame,
    predictions_frame,
    report_render,
    sweep_frame,
    write_json,
)
from .pipeline.sensitivity import m_sweep, sensitivity_report
from .pipeline.synthgen import generate, write_dataset
from dotenv import load_dotenv
from loguru import logger
from pathlib import Path
from pydantic import ValidationError
from typing import Callable, Dict, List, Optional


def configure_logging() -> None:
    """Send diagnostics to stderr at ``ALLE_LOG_LEVEL``."""
    logger.remove()
    logger.add(sys.stderr, level=os.getenv(ENV_ALLE_LOG_LEVEL, DEFAULT_LOG_LEVEL))


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('model hyperparameters')
    group.add_argument('--trees', type=int, help='Random forest tree count (default: 500)')
    group.add_argument('--m-try', type=int, help='Features drawn per split (default: M/3)')
    group.add_argument('--hidden', type=int, help='Network hidden nodes (default: state preset)')
    group.add_argument('--iterations', type=int, help='Network iterations (default: state preset)')
    group.add_argument('--learning-rate', type=float, help='Initial network learning rate')
    group.add_argument('--c-box', type=float, help='SVR box constraint')
    group.add_argument('--eps-tube', type=float, help='SVR tube half-width')
    group.add_argument('--gamma', type=float, help='SVR RBF bandwidth')


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--in',
        dest='input',
        required=True,
        help='Sample set CSV, or a directory of recordings (or holding samples.csv)',
    )
    parser.add_argument('--state', choices=[s.value for s in StateKind], help='Expected state')
    parser.add_argument('--window', type=int, default=DEFAULT_SMOOTHING_WINDOW)
    parser.add_argument('--sigma', type=float, default=DEFAULT_SMOOTHING_SIGMA)
    parser.add_argument('--per-recording', type=int, default=DEFAULT_PER_RECORDING)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline step."""
    parser = argparse.ArgumentParser(
        prog='alle',
        description='Lateral line relative-state estimation: sensitivity, redundancy and '
        'regression from hydrodynamic pressure variations',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', required=True, help='Output directory')
    common.add_argument('--threads', type=int, help='Worker cap (default: ALLE_THREADS or CPUs)')
    common.add_argument(
        '--echo-config', action='store_true', help='Print the resolved config to stdout'
    )
    families = [f.value for f in ModelFamily]
    criteria = [c.value for c in Criterion]
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('generate', parents=[common], help='Write a synthetic data set')
    p.add_argument('--config', required=True, help='Generator configuration JSON')
    p.add_argument('--seed', type=int, help='Override the configuration seed')

    p = sub.add_parser('preprocess', parents=[common], help='Smooth and assemble recordings')
    _add_input_flags(p)

    p = sub.add_parser('sensitivity', parents=[common], help='Sensor criteria and orderings')
    _add_input_flags(p)
    p.add_argument('--criterion', choices=criteria, default=Criterion.C2.value)
    p.add_argument('--family', choices=families, help='Also run the M-sweep with this family')
    p.add_argument('--seed', type=int, help='Seed of the M-sweep (required with --family)')
    p.add_argument('--plateau-tol', type=float, default=DEFAULT_PLATEAU_TOL)
    _add_model_flags(p)

    p = sub.add_parser('train', parents=[common], help='Fit one model family')
    _add_input_flags(p)
    p.add_argument('--family', choices=families, required=True)
    p.add_argument('--sensors', default='all', help='"all", a prefix length, or labels')
    p.add_argument('--criterion', choices=criteria, default=Criterion.C2.value)
    p.add_argument('--seed', type=int, required=True)
    _add_model_flags(p)

    p = sub.add_parser('importance', parents=[common], help='Forest permutation importance')
    _add_input_flags(p)
    p.add_argument('--model', required=True, help='Random forest model file')
    p.add_argument('--seed', type=int, required=True)

    p = sub.add_parser('sweep', parents=[common], help='M-sweep or network sweep')
    _add_input_flags(p)
    p.add_argument('--family', choices=families, required=True)
    p.add_argument('--ordering', '--criterion', dest='criterion', choices=criteria, default='c2')
    p.add_argument('--grid', choices=[g.value for g in SweepGrid], help='Sweep a network knob')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--plateau-tol', type=float, default=DEFAULT_PLATEAU_TOL)
    p.add_argument('--knee-tol', type=float, default=DEFAULT_KNEE_TOL)
    _add_model_flags(p)

    p = sub.add_parser('estimate', parents=[common], help='Train/test estimation')
    _add_input_flags(p)
    p.add_argument('--family', choices=families, required=True)
    p.add_argument('--fraction', type=float, default=DEFAULT_TRAIN_FRACTION)
    p.add_argument('--sensors', default='all', help='"all", a prefix length, or labels')
    p.add_argument('--criterion', choices=criteria, default=Criterion.C2.value)
    p.add_argument('--seed', type=int, required=True)
    _add_model_flags(p)

    p = sub.add_parser('compare', parents=[common], help='Family x ordering x M grid')
    _add_input_flags(p)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--plateau-tol', type=float, default=DEFAULT_PLATEAU_TOL)
    _add_model_flags(p)
    return parser


_PARAM_FLAGS = {
    'trees': 'n_trees',
    'm_try': 'm_try',
    'hidden': 'hidden',
    'iterations': 'iterations',
    'learning_rate': 'learning_rate',
    'c_box': 'c_box',
    'eps_tube': 'eps_tube',
    'gamma': 'gamma',
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed arguments; flags left unset keep their defaults."""
    values = vars(args)
    params = {
        field: values[flag] for flag, field in _PARAM_FLAGS.items() if values.get(flag) is not None
    }
    fields = {
        name: values[name]
        for name in RunConfig.model_fields
        if name != 'params' and values.get(name) is not None
    }
    return RunConfig(params=FamilyParams(**params), **fields)


def load_samples(config: RunConfig) -> SampleSet:
    """Sample set from a CSV file, a directory holding one, or a directory of recordings."""
    path = Path(config.input or '')
    if path.is_file():
        return read_sample_set(path, config.state)
    if (path / SAMPLES_FILE).is_file():
        return read_sample_set(path / SAMPLES_FILE, config.state)
    recordings = ingest_directory(path, config.state)
    smoothed = [smooth(r, config.window, config.sigma) for r in recordings]
    return assemble(smoothed, config.per_recording)


def resolve_sensors(config: RunConfig, sample_set: SampleSet) -> List[SensorId]:
    """Sensors named by ``--sensors``: all, a prefix of the ordering, or explicit labels."""
    selection = config.sensors.strip()
    if selection == 'all':
        return list(sample_set.sensors)
    if selection.isdigit():
        m = int(selection)
        if not 1 <= m <= sample_set.m:
            raise ArgumentError(f'Sensor prefix must be in 1..{sample_set.m}, got {m}')
        _, ordering = sensitivity_report(sample_set, config.criterion)
        return ordering[:m]
    try:
        return [SensorId(label.strip()) for label in selection.split(',')]
    except ValueError:
        raise ArgumentError(f'Unknown sensor in {selection!r}')


def _require_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise ArgumentError(f'{config.subcommand} needs --seed')
    return config.seed


def run_generate(config: RunConfig, threads: int) -> List[Path]:
    """Write a synthetic data set and its ground truth."""
    try:
        raw = json.loads(Path(config.config or '').read_text(encoding='utf-8'))
        if config.seed is not None:
            raw['seed'] = config.seed
        generator = GeneratorConfig.model_validate(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise ArgumentError(f'Cannot read generator config {config.config}: {str(e)}')
    recordings, truth = generate(generator, threads)
    return write_dataset(recordings, truth, config.out or '.')


def run_preprocess(config: RunConfig, threads: int) -> List[Path]:
    """Smooth and assemble recordings into samples.csv."""
    sample_set = load_samples(config)
    out = Path(config.out or '.')
    summary = {
        'state_kind': sample_set.state_kind.value,
        'unit': sample_set.unit.value,
        'n': sample_set.n,
        'counts': {str(k): v for k, v in sample_set.counts().items()},
    }
    return [
        export_sample_set(sample_set, out / SAMPLES_FILE),
        write_json({'config': config.echo(), 'report': summary}, out / 'preprocess.json'),
    ]


def run_sensitivity(config: RunConfig, threads: int) -> List[Path]:
    """Criteria, orderings and, with --family, the M-sweep."""
    sample_set = load_samples(config)
    report, ordering = sensitivity_report(sample_set, config.criterion)
    paths = report_render(report, config.out or '.', 'sensitivity', config.echo())
    if config.family is not None:
        curve = m_sweep(
            sample_set,
            ordering,
            config.family,
            _require_seed(config),
            config.params,
            config.plateau_tol,
            n_jobs=threads,
        )
        paths += report_render(
            curve, config.out or '.', 'curve', config.echo(), {'curve.csv': curve_frame(curve)}
        )
    return paths


def run_train(config: RunConfig, threads: int) -> List[Path]:
    """Fit one family on the selected sensors; write the model and its training accuracy."""
    sample_set = load_samples(config)
    selected = sample_set.select(resolve_sensors(config, sample_set))
    trained = fit_family(selected, config.family, _require_seed(config), config.params, threads)
    report, _ = evaluate_model(trained, selected, selected)
    frames = {}
    if trained.family == ModelFamily.RF:
        frames['oob.csv'] = oob_frame(rf.oob_mse_curve(trained.model, selected))
    out = Path(config.out or '.')
    paths = [write_json(serialize(trained), out / MODEL_FILE)]
    return paths + report_render(report, out, 'train', config.echo(), frames)


def run_importance(config: RunConfig, threads: int) -> List[Path]:
    """Permutation importance of a saved forest on its training set."""
    trained = load(config.model or '')
    if trained.family != ModelFamily.RF:
        raise ArgumentError(f'Importance needs a random forest model, got {trained.family.value}')
    sample_set = load_samples(config).select(trained.sensors)
    report = rf.permutation_importance(trained.model, sample_set, _require_seed(config), threads)
    return report_render(report, config.out or '.', 'importance', config.echo())


def run_sweep(config: RunConfig, threads: int) -> List[Path]:
    """M-sweep over the chosen ordering, or a network hidden/iteration sweep."""
    sample_set = load_samples(config)
    seed = _require_seed(config)
    out = config.out or '.'
    if config.grid is not None:
        if config.family != ModelFamily.BPNN:
            raise ArgumentError('--grid sweeps apply to the bpnn family only')
        result = sweep_bpnn(
            sample_set,
            config.grid,
            seed,
            hidden=config.params.hidden,
            iterations=config.params.iterations,
            learning_rate=config.params.learning_rate,
            tol=config.knee_tol,
            n_jobs=threads,
        )
        return report_render(
            result,
            out,
            'sweep',
            config.echo(),
            {'sweep.csv': sweep_frame(result)},
            exclude={'train_seconds'},
        )
    _, ordering = sensitivity_report(sample_set, config.criterion)
    curve = m_sweep(
        sample_set,
        ordering,
        config.family,
        seed,
        config.params,
        config.plateau_tol,
        n_jobs=threads,
    )
    return report_render(curve, out, 'curve', config.echo(), {'curve.csv': curve_frame(curve)})


def run_estimate(config: RunConfig, threads: int) -> List[Path]:
    """Stratified split, fit on the training part, score on the rest."""
    sample_set = load_samples(config)
    sensors = resolve_sensors(config, sample_set)
    seed = _require_seed(config)
    train, test = split(sample_set, config.fraction, seed)
    trained = fit_family(train.select(sensors), config.family, seed, config.params, threads)
    report, predictions = evaluate_model(trained, train, test)
    frame = predictions_frame(test.labels, predictions, test.parameter_index)
    return report_render(
        report, config.out or '.', 'estimate', config.echo(), {'predictions.csv': frame}
    )


def run_compare(config: RunConfig, threads: int) -> List[Path]:
    """Every family under both orderings for M = 1..9."""
    sample_set = load_samples(config)
    report, _ = sensitivity_report(sample_set)
    orderings = {c: report.ordering(c) for c in Criterion}
    matrix = compare_families(
        sample_set,
        orderings,
        _require_seed(config),
        config.params,
        tol=config.plateau_tol,
        n_jobs=threads,
    )
    return report_render(
        matrix,
        config.out or '.',
        'compare',
        config.echo(),
        {'compare.csv': comparison_frame(matrix)},
    )


COMMANDS: Dict[str, Callable[[RunConfig, int], List[Path]]] = {
    'generate': run_generate,
    'preprocess': run_preprocess,
    'sensitivity': run_sensitivity,
    'train': run_train,
    'importance': run_importance,
    'sweep': run_sweep,
    'estimate': run_estimate,
    'compare': run_compare,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one subcommand and return its exit code.

    Exit codes: 0 success, 2 argument errors, 3 data or schema errors,
    4 numerical non-convergence.
    """
    load_dotenv()
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.echo_config:
            sys.stdout.write(canonical_json(config.echo()))
        threads = resolve_threads(config.threads)
        logger.info(f'alle {config.subcommand} starting with {threads} worker(s)')
        paths = COMMANDS[config.subcommand](config, threads)
        logger.info(f'alle {config.subcommand} wrote {len(paths)} file(s)')
        return 0
    except ValidationError as e:
        logger.error(f'Invalid configuration: {str(e)}')
        return ArgumentError.exit_code
    except AlleError as e:
        logger.error(f'{type(e).__name__}: {str(e)}')
        return e.exit_code
    except Exception as e:
        logger.error(f'Unexpected error in {args.subcommand}: {str(e)}')
        raise


def main() -> int:
    """Console entry point."""
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
