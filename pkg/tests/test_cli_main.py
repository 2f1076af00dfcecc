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

"""Tests for CLI argument parsing and the main function."""

import json
import pytest
import sys
from lateral_line_estimator.cli import build_parser, main, resolve_config, run
from lateral_line_estimator.models import FamilyParams, StateKind
from lateral_line_estimator.pipeline.dataset import export_sample_set
from lateral_line_estimator.resources.reference_tables import (
    REFERENCE_ORDER_C1,
    REFERENCE_ORDER_C2,
)
from pathlib import Path
from tests.conftest import build_sample_set, reference_means
from unittest.mock import patch


def _report(path: Path) -> dict:
    return json.loads(path.read_text(encoding='utf-8'))['report']


@pytest.fixture
def samples_csv(tmp_path, linear_set) -> Path:
    """The linear distance samples written as a sample set file."""
    path = tmp_path / 'samples.csv'
    export_sample_set(linear_set, path)
    return path


class TestCliMain:
    """Test cases for CLI argument parsing and main function."""

    def test_main_argument_parser_help(self):
        """Test that argument parser help works correctly."""
        with patch.object(sys, 'argv', ['alle', '--help']):
            with pytest.raises(SystemExit) as exc_info:
                main()

            assert exc_info.value.code == 0

    def test_main_invalid_argument(self):
        """Test handling of invalid arguments."""
        with patch.object(sys, 'argv', ['alle', '--invalid-argument']):
            with pytest.raises(SystemExit) as exc_info:
                main()

            assert exc_info.value.code == 2

    def test_main_missing_subcommand(self):
        """Test a subcommand is required."""
        with pytest.raises(SystemExit) as exc_info:
            run([])
        assert exc_info.value.code == 2

    def test_main_missing_seed(self, tmp_path):
        """Test stochastic subcommands require a seed."""
        with pytest.raises(SystemExit) as exc_info:
            run(['train', '--in', str(tmp_path), '--out', str(tmp_path), '--family', 'rf'])
        assert exc_info.value.code == 2

    def test_resolve_config(self, tmp_path):
        """Test flags map onto the run configuration and model hyperparameters."""
        args = build_parser().parse_args(
            ['train', '--in', 'x', '--out', 'y', '--family', 'rf', '--seed', '3', '--trees', '7']
        )
        config = resolve_config(args)
        assert config.seed == 3
        assert config.params == FamilyParams(n_trees=7)
        assert 'out' not in config.echo()

    @patch('lateral_line_estimator.cli.logger')
    def test_missing_input_directory(self, mock_logger, tmp_path):
        """Test a missing input directory exits with the data error code."""
        code = run(['preprocess', '--in', str(tmp_path / 'absent'), '--out', str(tmp_path)])
        assert code == 3
        mock_logger.error.assert_called_once()
        assert 'SchemaError' in mock_logger.error.call_args[0][0]

    @patch.dict('os.environ', {'ALLE_THREADS': 'many'})
    def test_invalid_thread_environment(self, tmp_path, samples_csv):
        """Test a malformed worker count in the environment is an argument error."""
        code = run(['sensitivity', '--in', str(samples_csv), '--out', str(tmp_path / 'o')])
        assert code == 2

    @pytest.mark.parametrize('family', ['rf', 'bpnn'])
    def test_negative_seed(self, tmp_path, samples_csv, family):
        """Test a negative seed is an argument error."""
        argv = ['estimate', '--in', str(samples_csv), '--out', str(tmp_path / 'o')]
        assert run(argv + ['--family', family, '--seed', '-1']) == 2

    def test_echo_config(self, tmp_path, samples_csv, capsys):
        """Test the resolved configuration is printed as JSON."""
        out = tmp_path / 'out'
        argv = ['sensitivity', '--in', str(samples_csv), '--out', str(out)]
        assert run(argv + ['--echo-config']) == 0
        echoed = json.loads(capsys.readouterr().out)
        assert echoed['subcommand'] == 'sensitivity'
        assert echoed['criterion'] == 'c2'


class TestCliPipeline:
    """Test cases for running the pipeline steps end to end."""

    def test_sensitivity_reference_table(self, tmp_path):
        """Test the reference criteria give the reference orderings."""
        path = tmp_path / 'table.csv'
        export_sample_set(build_sample_set(reference_means(StateKind.D)), path)
        assert run(['sensitivity', '--in', str(path), '--out', str(tmp_path / 'out')]) == 0
        report = _report(tmp_path / 'out' / 'sensitivity.json')
        assert report['ordering_c1'] == [s.value for s in REFERENCE_ORDER_C1[StateKind.D]]
        assert report['ordering_c2'] == [s.value for s in REFERENCE_ORDER_C2[StateKind.D]]
        assert (tmp_path / 'out' / 'sensitivity.txt').exists()

    def test_generate_preprocess_sensitivity(self, tmp_path, generator_payload):
        """Test synthetic recordings recover their ground truth ordering."""
        config = tmp_path / 'generator.json'
        config.write_text(json.dumps(generator_payload), encoding='utf-8')
        raw, prepared, out = tmp_path / 'raw', tmp_path / 'prepared', tmp_path / 'out'
        assert run(['generate', '--config', str(config), '--out', str(raw)]) == 0
        assert run(['preprocess', '--in', str(raw), '--out', str(prepared)]) == 0
        assert (prepared / 'samples.csv').exists()
        assert _report(prepared / 'preprocess.json')['n'] == 7 * 5 * 250
        assert run(['sensitivity', '--in', str(prepared), '--out', str(out)]) == 0
        truth = json.loads((raw / 'ground_truth.json').read_text(encoding='utf-8'))
        assert _report(out / 'sensitivity.json')['ordering_c2'] == truth['ordering_c2']

    def test_generate_bad_config(self, tmp_path):
        """Test an unreadable generator config is an argument error."""
        code = run(['generate', '--config', str(tmp_path / 'absent.json'), '--out', str(tmp_path)])
        assert code == 2

    def test_unwritable_output(self, tmp_path, generator_payload):
        """Test generate and preprocess report an unwritable output as a data error."""
        config = tmp_path / 'generator.json'
        config.write_text(json.dumps(generator_payload), encoding='utf-8')
        blocker = tmp_path / 'blocker'
        blocker.write_text('', encoding='utf-8')
        assert run(['generate', '--config', str(config), '--out', str(blocker / 'raw')]) == 3
        raw = tmp_path / 'raw'
        assert run(['generate', '--config', str(config), '--out', str(raw)]) == 0
        assert run(['preprocess', '--in', str(raw), '--out', str(blocker / 'prepared')]) == 3

    def test_train_and_importance(self, tmp_path, samples_csv, linear_set):
        """Test a trained forest feeds the importance step."""
        model_dir, imp_dir = tmp_path / 'model', tmp_path / 'importance'
        common = ['--in', str(samples_csv), '--seed', '5', '--threads', '1']
        train = ['train', '--family', 'rf', '--trees', '10', '--out', str(model_dir)]
        assert run(train + common) == 0
        assert (model_dir / 'oob.csv').exists()
        assert _report(model_dir / 'train.json')['m'] == 9
        importance = ['importance', '--model', str(model_dir / 'model.json')]
        assert run(importance + ['--out', str(imp_dir)] + common) == 0
        report = _report(imp_dir / 'importance.json')
        assert report['n_trees'] == 10
        assert sorted(report['ranking']) == sorted(s.value for s in linear_set.sensors)

    def test_importance_needs_forest(self, tmp_path, samples_csv):
        """Test importance on a linear model is rejected."""
        common = ['--in', str(samples_csv), '--seed', '5']
        assert run(['train', '--family', 'reg', '--out', str(tmp_path / 'm')] + common) == 0
        model = str(tmp_path / 'm' / 'model.json')
        assert run(['importance', '--model', model, '--out', str(tmp_path / 'i')] + common) == 2

    def test_train_sensor_prefix(self, tmp_path, samples_csv):
        """Test a numeric sensor selection takes a prefix of the ordering."""
        argv = ['train', '--in', str(samples_csv), '--out', str(tmp_path / 'm'), '--seed', '1']
        assert run(argv + ['--family', 'reg', '--sensors', '2']) == 0
        assert _report(tmp_path / 'm' / 'train.json')['sensors'] == ['P0', 'PL1']
        assert run(argv + ['--family', 'reg', '--sensors', '10']) == 2
        assert run(argv + ['--family', 'reg', '--sensors', 'P0,XX']) == 2

    def test_train_is_worker_independent(self, tmp_path, samples_csv):
        """Test the worker count does not change the model."""
        argv = ['train', '--in', str(samples_csv), '--family', 'rf', '--trees', '8', '--seed', '2']
        assert run(argv + ['--out', str(tmp_path / 'a'), '--threads', '1']) == 0
        assert run(argv + ['--out', str(tmp_path / 'b'), '--threads', '8']) == 0
        first = (tmp_path / 'a' / 'model.json').read_bytes()
        assert first == (tmp_path / 'b' / 'model.json').read_bytes()

    @pytest.mark.parametrize(
        'argv, files',
        [
            (['sweep', '--family', 'rf', '--trees', '5'], ['curve.json', 'curve.csv']),
            (
                ['sweep', '--family', 'bpnn', '--grid', 'hidden', '--iterations', '10'],
                ['sweep.json'],
            ),
            (
                ['estimate', '--family', 'rf', '--trees', '10'],
                ['estimate.json', 'predictions.csv'],
            ),
            pytest.param(
                ['compare', '--trees', '5', '--iterations', '10'],
                ['compare.json', 'compare.csv'],
                marks=pytest.mark.slow,
            ),
        ],
    )
    def test_reports_are_worker_independent(self, tmp_path, samples_csv, argv, files):
        """Test one and eight workers write identical reports."""
        common = ['--in', str(samples_csv), '--seed', '3']
        assert run(argv + common + ['--out', str(tmp_path / 'a'), '--threads', '1']) == 0
        assert run(argv + common + ['--out', str(tmp_path / 'b'), '--threads', '8']) == 0
        for name in files:
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_importance_is_worker_independent(self, tmp_path, samples_csv):
        """Test the importance report does not depend on the worker count."""
        common = ['--in', str(samples_csv), '--seed', '6']
        train = ['train', '--family', 'rf', '--trees', '12', '--out', str(tmp_path / 'm')]
        assert run(train + common) == 0
        importance = ['importance', '--model', str(tmp_path / 'm' / 'model.json')] + common
        assert run(importance + ['--out', str(tmp_path / 'a'), '--threads', '1']) == 0
        assert run(importance + ['--out', str(tmp_path / 'b'), '--threads', '8']) == 0
        first = (tmp_path / 'a' / 'importance.json').read_bytes()
        assert first == (tmp_path / 'b' / 'importance.json').read_bytes()

    def test_estimate_is_reproducible(self, tmp_path, samples_csv):
        """Test two estimation runs give byte-identical reports."""
        argv = ['estimate', '--in', str(samples_csv), '--family', 'rf', '--seed', '4']
        argv += ['--trees', '20']
        assert run(argv + ['--out', str(tmp_path / 'a')]) == 0
        assert run(argv + ['--out', str(tmp_path / 'b')]) == 0
        for name in ('estimate.json', 'estimate.txt', 'predictions.csv'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()
        report = _report(tmp_path / 'a' / 'estimate.json')
        assert report['n'] == 56
        assert report['r2'] > 0.9

    def test_network_sweep(self, tmp_path, samples_csv):
        """Test a hidden node sweep leaves timings out of the JSON report."""
        argv = ['sweep', '--in', str(samples_csv), '--out', str(tmp_path), '--seed', '1']
        assert run(argv + ['--family', 'bpnn', '--grid', 'hidden', '--iterations', '10']) == 0
        assert 'train_seconds' not in _report(tmp_path / 'sweep.json')
        assert 'train_seconds' in (tmp_path / 'sweep.csv').read_text(encoding='utf-8')
        assert run(argv + ['--family', 'rf', '--grid', 'hidden']) == 2

    def test_m_sweep(self, tmp_path, samples_csv):
        """Test the M-sweep writes one curve row per sensor."""
        argv = ['sweep', '--in', str(samples_csv), '--out', str(tmp_path), '--seed', '1']
        assert run(argv + ['--family', 'reg']) == 0
        curve = _report(tmp_path / 'curve.json')
        assert len(curve['r2']) == 9
        assert curve['ordering'][0] == 'P0'

    @pytest.mark.slow
    def test_compare(self, tmp_path, samples_csv):
        """Test the comparison grid covers every family, ordering and M."""
        argv = ['compare', '--in', str(samples_csv), '--out', str(tmp_path), '--seed', '1']
        assert run(argv + ['--trees', '10', '--iterations', '20']) == 0
        matrix = _report(tmp_path / 'compare.json')
        assert len(matrix['cells']) == 4 * 2 * 9
        assert {b['family'] for b in matrix['best']} == {'rf', 'bpnn', 'svr', 'reg'}
