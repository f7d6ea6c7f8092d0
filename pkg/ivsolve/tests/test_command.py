import csv
import io
import json

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

import manage
from ivsolve import intervals
from ivsolve.bench import SCHEMA_VERSION, get_suite
from ivsolve.expressions import parse_system
from ivsolve.intervals import Interval
from ivsolve.models import SolveRun


def run(*args):
    out, err = io.StringIO(), io.StringIO()
    call_command('ivsolve', *args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


# ==================== solve ====================

def test_solve_writes_json_report():
    out, _ = run('solve', '--model', 'sqrt2', '--method', 'bisection', '--eps', '0.1')
    document = json.loads(out)
    assert document['schema_version'] == SCHEMA_VERSION
    assert document['N_keep'] >= 1


def test_solve_writes_csv_report():
    out, _ = run('solve', '--model', 'hill', '--n', '2', '--method', 'subdivision', '--m', '1', '--format', 'csv')
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]['N_proc'] == '1'


def test_solve_unknown_model_path():
    with pytest.raises(CommandError) as excinfo:
        run('solve', '--model', 'no/such/model.ivs', '--method', 'bisection')
    assert excinfo.value.returncode == 1


def test_solve_budget_exceeded_still_reports():
    out, err = io.StringIO(), io.StringIO()
    with pytest.raises(CommandError) as excinfo:
        call_command('ivsolve', 'solve', '--model', 'hill', '--n', '2', '--method', 'bisection',
                     '--eps', '1e-3', '--max-boxes', '20', stdout=out, stderr=err)
    assert excinfo.value.returncode == 2
    document = json.loads(out.getvalue())
    assert document['budget_exceeded'] is True
    assert document['N_proc'] == 20


@pytest.mark.parametrize('args', [
    ['--method', 'newton', '--l', '3'],
    ['--method', 'icp', '--m', '4', '--l', '3', '--nit', '4'],
])
def test_solve_rejects_misplaced_contraction_count(args):
    with pytest.raises(CommandError) as excinfo:
        run('solve', '--model', 'sumprod', *args)
    assert excinfo.value.returncode == 1


def test_solve_output_file(tmp_path):
    path = tmp_path / 'nested' / 'report.json'
    out, err = run('solve', '--model', 'sqrt2', '--method', 'newton', '--output', str(path))
    assert out == ''
    assert '✓ Report written to' in err
    assert json.loads(path.read_text())['method'] == 'newton'


def test_solve_save_uses_report_dir(tmp_path, settings):
    settings.IVSOLVE_REPORT_DIR = str(tmp_path)
    run('solve', '--model', 'sqrt2', '--method', 'krawczyk', '--format', 'csv', '--save')
    assert (tmp_path / 'sqrt2_krawczyk.csv').exists()


@pytest.mark.django_db
def test_solve_record_saves_run():
    _, err = run('solve', '--model', 'sumprod', '--method', 'bisection', '--eps', '0.25', '--record')
    run_row = SolveRun.objects.get()
    assert run_row.source == 'cli'
    assert run_row.status == 'completed'
    assert run_row.config['method'] == 'bisection'
    assert str(run_row.id) in err


# ==================== models ====================

def test_models_lists_registry():
    out, _ = run('models')
    names = [line.split()[0] for line in out.splitlines()]
    assert 'hill' in names
    assert 'wta' in names


def test_models_prints_parseable_model():
    out, _ = run('models', 'hill', '--n', '2')
    model = parse_system(out)
    assert model.n == 2


def test_manage_entry_point_dispatches_to_ivsolve(capsys):
    manage.main(['manage.py', 'ivsolve', 'models'])
    names = [line.split()[0] for line in capsys.readouterr().out.splitlines()]
    assert 'hill' in names


# ==================== check ====================

def test_check_passes():
    out, _ = run('check', '--seed', '7')
    lines = out.splitlines()
    assert lines[0].startswith('✓ containment')
    assert all(line.startswith('✓') for line in lines)


def test_check_reports_failed_property(monkeypatch):
    exact_mul = intervals.mul

    def shrunk_mul(a, b):
        lo, hi = exact_mul(a, b)
        if hi - lo <= 0.0:
            return Interval(lo, hi)
        return Interval(lo + (hi - lo) / 10, hi - (hi - lo) / 10)

    monkeypatch.setattr(intervals, 'mul', shrunk_mul)
    with pytest.raises(CommandError) as excinfo:
        run('check', '--seed', '7')
    assert excinfo.value.returncode == 1
    assert 'containment' in str(excinfo.value)


# ==================== bench ====================

def test_bench_unknown_suite():
    with pytest.raises(CommandError) as excinfo:
        run('bench', 'table99')
    assert excinfo.value.returncode == 1


@pytest.mark.django_db
def test_bench_enqueue_creates_pending_runs(redis_client):
    cells = get_suite('table7').cells
    out, _ = run('bench', 'table7', '--enqueue')
    assert redis_client.rpush.call_count == len(cells)
    assert SolveRun.objects.filter(status='pending', source='queue', suite='table7').count() == len(cells)
    assert f"✓ Queued {len(cells)} of {len(cells)} cells from table7" in out

    job = json.loads(redis_client.rpush.call_args_list[0].args[1])
    assert job['suite'] == 'table7'
    assert SolveRun.objects.filter(id=job['run_id']).exists()


@pytest.mark.django_db
def test_bench_enqueue_skips_long_cells(redis_client):
    cells = get_suite('table6').cells
    short = [c for c in cells if not c.long]
    _, err = run('bench', 'table6', '--enqueue')
    assert redis_client.rpush.call_count == len(short)
    assert 'Skipping long cell' in err


# ==================== queue-status ====================

@pytest.mark.django_db
def test_queue_status(redis_client):
    redis_client.llen.side_effect = [3, 1, 2, 0]
    out, _ = run('queue-status', '--runs', '5')
    data = json.loads(out)
    assert data['queue']['pending_cells'] == 3
    assert data['queue']['total_cells'] == 6
    assert data['runs'] == []
