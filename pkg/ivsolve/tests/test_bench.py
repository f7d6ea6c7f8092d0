import csv
import io
import json

import pytest

from ivsolve.bench import (
    CSV_COLUMNS,
    RUN_CSV_COLUMNS,
    SCHEMA_VERSION,
    BenchCell,
    BenchSuite,
    CostModelInputs,
    PublishedCounts,
    cost_inputs_for,
    factorial_growth_check,
    get_suite,
    predict_linalg_cost,
    predict_space,
    predict_workload,
    run_cell,
    run_suite,
    write_csv,
    write_json,
    write_run_csv,
    write_run_json,
)
from ivsolve.exceptions import InvalidConfig, MissingParameter, UnknownSuite
from ivsolve.intervals import INF, Box
from ivsolve.serializers import BoxField
from ivsolve.solvers import Method, SolverConfig, solve
from ivsolve.systems import get_model, hill_network, sum_product_example


def cell(method, label='small', model='sumprod', n=None, **settings):
    return BenchCell(suite='unit', label=label, model=model, n=n, method=Method.parse(method), **settings)


@pytest.fixture
def small_suite():
    return BenchSuite('unit', 'sumprod smoke suite', [
        cell('bisection', epsilon=0.25),
        cell('subdivision', m=8),
        cell('icp', m=4, n_it=3),
        cell('newton', epsilon=0.25),
    ])


def rows_without_time(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    for row in rows:
        row.pop('wall_time_s')
    return rows


# ==================== Cost model ====================

def test_predict_subdivision():
    ci = CostModelInputs(method='subdivision', n=2, k=3, m=100)
    assert predict_workload(ci) == 10000 * 3


def test_predict_bisection():
    ci = CostModelInputs(method='bisection', n=2, k=3, vol_x0=100.0, epsilon=1.0)
    assert predict_workload(ci) == (3 + 2) * 100


def test_predict_newton_scalar():
    ci = CostModelInputs(method='newton', n=1, k=2, vol_x0=1.0, epsilon=1.0, n_it=1)
    # C_F + C_J + C_inv
    assert predict_workload(ci) == 2 + 2 + 1


def test_predict_requires_method_inputs():
    with pytest.raises(MissingParameter):
        predict_workload(CostModelInputs(method='icp', n=2, k=3, m=10))
    with pytest.raises(MissingParameter):
        predict_space(CostModelInputs(method='newton', n=2, k=3, vol_x0=1.0, epsilon=0.1))


def test_predict_space():
    assert predict_space(CostModelInputs(method='subdivision', n=3, k=1, m=4)) == 64
    assert predict_space(CostModelInputs(method='bisection', n=2, k=1, vol_x0=1.0, epsilon=0.5)) == 4


def test_cost_inputs_follow_model_and_config():
    ci = cost_inputs_for(hill_network(2), SolverConfig(method='subdivision', m=10))
    assert (ci.n, ci.m, ci.vol_x0) == (2, 10, 100.0)
    assert ci.k == hill_network(2).op_count()


def test_predict_linalg_cost():
    assert predict_linalg_cost('det', 4) == {'muls': 40, 'divs': 0}
    assert predict_linalg_cost('adjugate', 3) == {'muls': 9 * 2, 'divs': 0}
    assert predict_linalg_cost('inverse', 2) == {'muls': 2 + 4 * 0, 'divs': 4}
    with pytest.raises(InvalidConfig):
        predict_linalg_cost('lu', 3)


def test_factorial_growth_matches_recurrence():
    rows = factorial_growth_check(max_n=7)
    assert all(row['matches'] for row in rows)
    assert [row['expected_muls'] for row in rows[:4]] == [0, 2, 9, 40]
    assert rows[6]['expected_muls'] / rows[5]['expected_muls'] == pytest.approx(7, rel=0.01)
    with pytest.raises(InvalidConfig):
        factorial_growth_check(max_n=8)


# ==================== Suites ====================

def test_table4_layout():
    suite = get_suite('table4')
    assert len(suite.cells) == 10
    assert {c.label for c in suite.cells} == {'V1', 'V2'}
    assert [c.method for c in suite.cells[:5]] == list(Method)
    assert suite.cells[7].setting_label == 'm=50, l=5'


def test_long_cells_are_flagged():
    flags = [c.long for c in get_suite('table6').cells]
    assert flags == [True, True, True, False, False]
    assert not any(c.long for c in get_suite('table7').cells)


def test_unknown_suite():
    with pytest.raises(UnknownSuite):
        get_suite('table99')


def test_repetitions_are_validated():
    with pytest.raises(InvalidConfig):
        get_suite('table7', repetitions=0)
    with pytest.raises(InvalidConfig):
        BenchSuite('x', 'bad', repetitions=0)


def test_job_payload_rebuilds_cell():
    original = get_suite('table4').cells[6]
    rebuilt = BenchCell.from_job(original.as_job())
    assert rebuilt.config() == original.config()
    assert rebuilt.build_model() == original.build_model()


# ==================== Running ====================

def test_run_suite_reports_every_cell(small_suite):
    outcome = run_suite(small_suite)
    assert [r.status for r in outcome.results] == ['ok'] * 4
    assert not outcome.failed and not outcome.budget_exceeded
    grid = outcome.results[1]
    assert grid.report.N_proc == 64
    assert grid.report.counters.F_evals == grid.report.N_proc
    assert grid.measured_over_predicted <= 1.0


def test_empty_suite():
    outcome = run_suite(BenchSuite('empty', 'nothing'))
    assert outcome.results == []
    assert write_csv(outcome.results) == ','.join(CSV_COLUMNS) + '\n'


def test_failing_and_over_budget_cells_do_not_abort():
    suite = BenchSuite('unit', 'mixed', [
        cell('bisection', model='no_such_model', epsilon=0.1),
        cell('bisection', model='hill', n=2, epsilon=1e-3),
        cell('subdivision', m=4),
    ])
    outcome = run_suite(suite, max_boxes=100)
    assert [r.status for r in outcome.results] == ['failed', 'budget_exceeded', 'ok']
    assert 'no_such_model' in outcome.results[0].error
    assert outcome.failed and outcome.budget_exceeded


def test_long_cells_need_allow_long():
    long_cell = BenchCell(
        suite='unit', label='X0', model='sumprod', n=None, method=Method.SUBDIVISION, m=2,
        published=get_suite('table6').cells[0].published,
    )
    outcome = run_suite(BenchSuite('unit', 'long', [long_cell]))
    assert outcome.results[0].status == 'skipped'
    outcome = run_suite(BenchSuite('unit', 'long', [long_cell]), allow_long=True)
    assert outcome.results[0].status == 'ok'


def test_run_cell_with_repetitions_keeps_counters():
    single = run_cell(cell('subdivision', m=8))
    repeated = run_cell(cell('subdivision', m=8), repetitions=3)
    assert repeated.report.counters == single.report.counters
    assert repeated.report.wall_time_s >= 0.0


# ==================== Reports ====================

def test_ratios_against_published_counts():
    result = run_cell(cell('subdivision', m=8, published=PublishedCounts(N_proc=32, N_keep=4, avg_iter=2.0)))
    assert result.N_proc_over_published == 2.0
    assert result.N_keep_over_published == result.report.N_keep / 4
    assert result.avg_iter_over_published == 0.0

    missing = run_cell(cell('subdivision', m=8, published=PublishedCounts(N_proc=64, N_keep=0)))
    assert missing.N_proc_over_published == 1.0
    assert missing.N_keep_over_published is None
    assert missing.avg_iter_over_published is None

    row = next(csv.DictReader(io.StringIO(write_csv([result, missing]))))
    assert float(row['N_keep_over_published']) == result.N_keep_over_published
    assert float(row['avg_iter_over_published']) == 0.0


def test_csv_is_deterministic_apart_from_time(small_suite):
    first = write_csv(run_suite(small_suite).results)
    second = write_csv(run_suite(small_suite).results)
    assert first.splitlines()[0] == ','.join(CSV_COLUMNS)
    assert rows_without_time(first) == rows_without_time(second)


def test_csv_row_contents(small_suite):
    rows = list(csv.DictReader(io.StringIO(write_csv(run_suite(small_suite).results))))
    assert rows[1]['method'] == 'subdivision'
    assert rows[1]['setting'] == 'm=8'
    assert rows[1]['N_proc'] == '64'
    assert rows[1]['published_N_proc'] == ''
    assert list(rows[0])[-1] == 'wall_time_s'


def test_suite_json_document(small_suite):
    outcome = run_suite(small_suite)
    document = json.loads(write_json(outcome))
    assert document['schema_version'] == SCHEMA_VERSION
    assert document['suite'] == 'unit'
    assert len(document['results']) == 4
    report = document['results'][0]['report']
    assert report['config']['setting'] == 'eps=0.25'
    assert 'boxes' not in report
    assert document['results'][0]['published'] is None

    with_boxes = json.loads(write_json(outcome, include_boxes=True))
    boxes = with_boxes['results'][0]['report']['boxes']
    assert len(boxes) == outcome.results[0].report.N_keep
    assert all(len(box) == 2 and len(box[0]) == 2 for box in boxes)


def test_run_reports():
    report = solve(sum_product_example(), SolverConfig(method='bisection', epsilon=0.5))
    rows = list(csv.reader(io.StringIO(write_run_csv(report))))
    assert tuple(rows[0]) == RUN_CSV_COLUMNS
    assert dict(zip(rows[0], rows[1]))['N_keep'] == str(report.N_keep)

    document = json.loads(write_run_json(report, include_boxes=True))
    assert document['schema_version'] == SCHEMA_VERSION
    assert document['counters']['F_evals'] == report.N_proc
    assert document['boxes'][0] == [list(c) for c in report.retained[0]]


def test_unbounded_values_serialize_as_null():
    assert BoxField().to_representation(Box([(-INF, 1.0)])) == [[None, 1.0]]


# ==================== Experiment-scale runs ====================

@pytest.mark.slow
def test_bisection_work_is_sublinear_in_volume():
    v1 = solve(get_model('hill', n=2), SolverConfig(method='bisection', epsilon=1e-3))
    v2 = solve(get_model('hill', n=2, domain=(0.0, 20.0)), SolverConfig(method='bisection', epsilon=1e-3))
    assert v2.N_proc / v1.N_proc <= 1.5


@pytest.mark.slow
def test_table5_ordering():
    outcome = run_suite(get_suite('table5'))
    by_method = {r.cell.method: r.report for r in outcome.results}
    assert by_method[Method.NEWTON].N_proc < by_method[Method.SUBDIVISION].N_proc
    assert by_method[Method.ICP].N_keep <= by_method[Method.SUBDIVISION].N_keep


@pytest.mark.slow
def test_table7_grid_identities():
    outcome = run_suite(get_suite('table7'))
    by_method = {r.cell.method: r.report for r in outcome.results}
    assert by_method[Method.SUBDIVISION].N_proc == 100
    assert by_method[Method.ICP].N_proc == 25
