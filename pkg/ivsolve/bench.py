"""
Benchmark harness: named reproduction suites, worst-case cost predictors,
and CSV / JSON report writers.

Counters are the acceptance currency. Wall time is recorded for context and
always sits in the last CSV column so runs can be diffed without it.
"""
import csv
import io
import logging
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidConfig, IvsolveError, MissingParameter, UnknownSuite
from .intervals import counting
from .linalg import det_laplace, laplace_det_mul_count, random_interval_matrix
from .solvers import Method, SolverConfig, setting_label, solve
from .systems import get_model

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 'ivsolve.bench/1'

# Cells whose published N_proc is above this need allow_long
LONG_CELL_THRESHOLD = 1_000_000

CSV_COLUMNS = (
    'suite', 'cell', 'method', 'model', 'n', 'setting',
    'N_proc', 'N_keep', 'avg_iter',
    'F_evals', 'J_evals', 'inversions', 'contractor_calls', 'interval_ops',
    'adds', 'subs', 'muls', 'divs', 'comparisons', 'hulled_divisions',
    'peak_worklist', 'peak_retained',
    'predicted_ops', 'measured_over_predicted',
    'published_N_proc', 'published_N_keep', 'published_avg_iter',
    'N_proc_over_published', 'N_keep_over_published', 'avg_iter_over_published',
    'status', 'wall_time_s',
)


# ==================== Cost model ====================

@dataclass
class CostModelInputs:
    method: Method
    n: int
    k: int
    vol_x0: float = None
    epsilon: float = None
    m: int = None
    n_it: int = None
    c: float = 1.0
    diam_x0: float = None

    def __post_init__(self):
        self.method = Method.parse(self.method)

    def require(self, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise MissingParameter(f"{self.method.value} prediction needs {', '.join(missing)}")


def predict_workload(ci):
    """
    Worst-case operation count for one run.

    C_F = c k, C_J = c k n^2, an interval inverse costs c n^3 and one
    contractor sweep (forward plus backward pass) costs 2 C_F.
    """
    n, c = ci.n, ci.c
    C_F = c * ci.k
    C_J = c * ci.k * n * n
    if ci.method == Method.BISECTION:
        ci.require('vol_x0', 'epsilon')
        return (C_F + n) * ci.vol_x0 / ci.epsilon ** n
    if ci.method == Method.SUBDIVISION:
        ci.require('m')
        return ci.m ** n * C_F
    if ci.method == Method.ICP:
        ci.require('m', 'n_it')
        return ci.m ** n * ci.n_it * (2 * C_F + n)
    ci.require('vol_x0', 'epsilon', 'n_it')
    leaves = ci.vol_x0 / ci.epsilon ** n
    if ci.method == Method.NEWTON:
        return ci.n_it * (C_F + C_J + c * n ** 3) * leaves
    return ci.n_it * (C_F + C_J + n ** 3) * leaves


def predict_space(ci):
    """Worst-case number of boxes held at once."""
    if ci.method in (Method.SUBDIVISION, Method.ICP):
        ci.require('m')
        return ci.m ** ci.n
    ci.require('vol_x0', 'epsilon')
    leaves = ci.vol_x0 / ci.epsilon ** ci.n
    if ci.method == Method.BISECTION:
        return leaves
    ci.require('diam_x0')
    return leaves + ci.n ** 2 * math.log2(max(ci.diam_x0 / ci.epsilon, 1.0))


def predict_linalg_cost(kind, n):
    """Interval multiplications (and divisions) of the cofactor routines."""
    if n < 1:
        raise InvalidConfig('n must be at least 1')
    if kind == 'det':
        return {'muls': laplace_det_mul_count(n), 'divs': 0}
    minor = laplace_det_mul_count(n - 1) if n > 1 else 0
    if kind == 'adjugate':
        return {'muls': n * n * minor, 'divs': 0}
    if kind == 'inverse':
        return {'muls': laplace_det_mul_count(n) + n * n * minor, 'divs': n * n}
    raise InvalidConfig(f"Unknown linear-algebra routine '{kind}'")


def cost_inputs_for(model, cfg, convention='weighted'):
    return CostModelInputs(
        method=cfg.method,
        n=model.n,
        k=model.op_count(convention),
        vol_x0=model.X0.volume(),
        epsilon=cfg.epsilon,
        m=cfg.m,
        n_it=cfg.n_it,
        diam_x0=max(model.X0.widths()),
    )


def factorial_growth_check(max_n=7, seed=0):
    """det_laplace multiplication counts against M(n) = n (M(n-1) + 1)."""
    if not 1 <= max_n <= 7:
        raise InvalidConfig('max_n must be between 1 and 7')
    rng = np.random.default_rng(seed)
    rows = []
    for n in range(1, max_n + 1):
        A = random_interval_matrix(rng, n)
        with counting() as counters:
            det_laplace(A)
        measured = counters.muls // 4
        expected = laplace_det_mul_count(n)
        rows.append({'n': n, 'measured_muls': measured, 'expected_muls': expected, 'matches': measured == expected})
    return rows


# ==================== Suites ====================

@dataclass(frozen=True)
class PublishedCounts:
    N_proc: int
    N_keep: int
    avg_iter: float = None
    time_s: float = None


@dataclass(frozen=True)
class BenchCell:
    suite: str
    label: str
    model: str
    n: int
    method: Method
    domain: tuple = None
    epsilon: float = 1e-3
    m: int = None
    n_it: int = None
    published: PublishedCounts = None

    @property
    def long(self):
        return self.published is not None and self.published.N_proc > LONG_CELL_THRESHOLD

    @property
    def setting_label(self):
        return setting_label(self.method, self.epsilon, self.m, self.n_it)

    @property
    def name(self):
        return f"{self.method.value}/{self.label}"

    def config(self, max_boxes=None, seed=0):
        return SolverConfig(
            method=self.method, epsilon=self.epsilon, m=self.m, n_it=self.n_it,
            max_boxes=max_boxes, seed=seed,
        )

    def build_model(self):
        return get_model(self.model, n=self.n, domain=self.domain)

    def as_job(self):
        """Plain dict for the bench queue."""
        return {
            'suite': self.suite, 'label': self.label, 'model': self.model, 'n': self.n,
            'method': self.method.value, 'domain': list(self.domain) if self.domain else None,
            'epsilon': self.epsilon, 'm': self.m, 'n_it': self.n_it,
        }

    @classmethod
    def from_job(cls, job):
        return cls(
            suite=job['suite'], label=job['label'], model=job['model'], n=job['n'],
            method=Method.parse(job['method']),
            domain=tuple(job['domain']) if job.get('domain') else None,
            epsilon=job['epsilon'], m=job.get('m'), n_it=job.get('n_it'),
        )


@dataclass
class BenchSuite:
    name: str
    description: str
    cells: list = field(default_factory=list)
    repetitions: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise InvalidConfig('repetitions must be at least 1')


def _cells(suite, model, n, label, domain, rows):
    cells = []
    for method, settings, reference in rows:
        cells.append(BenchCell(
            suite=suite, label=label, model=model, n=n, method=method, domain=domain,
            published=PublishedCounts(*reference), **settings,
        ))
    return cells


def _table4():
    v1 = [
        (Method.BISECTION, {'epsilon': 1e-3}, (485497, 235585, None, 4.7)),
        (Method.SUBDIVISION, {'m': 100}, (10000, 43, None, 0.095)),
        (Method.ICP, {'m': 50, 'n_it': 5}, (2500, 11, 1.02, 0.033)),
        (Method.NEWTON, {'epsilon': 1e-3}, (103, 5, 2.22, 0.003)),
        (Method.KRAWCZYK, {'epsilon': 1e-3}, (103, 5, 4.22, 0.004)),
    ]
    v2 = [
        (Method.BISECTION, {'epsilon': 1e-3}, (494709, 240289, None, 4.8)),
        (Method.SUBDIVISION, {'m': 100}, (10000, 13, None, 0.095)),
        (Method.ICP, {'m': 50, 'n_it': 5}, (2500, 7, 1.02, 0.035)),
        (Method.NEWTON, {'epsilon': 1e-3}, (119, 7, 2.60, 0.0035)),
        (Method.KRAWCZYK, {'epsilon': 1e-3}, (119, 7, 4.60, 0.0045)),
    ]
    cells = _cells('table4', 'hill', 2, 'V1', (0.0, 10.0), v1) + _cells('table4', 'hill', 2, 'V2', (0.0, 20.0), v2)
    return BenchSuite('table4', 'Hill n=2 on V1=[0,10]^2 and V2=[0,20]^2', cells)


def _table5():
    rows = [
        (Method.BISECTION, {'epsilon': 1e-2}, (13771, 3774, None, 0.4)),
        (Method.SUBDIVISION, {'m': 5}, (3125, 31, None, 0.063)),
        (Method.ICP, {'m': 5, 'n_it': 5}, (3125, 1, 1.0, 0.12)),
        (Method.NEWTON, {'epsilon': 1e-2}, (1361, 1, 1.33, 0.21)),
        (Method.KRAWCZYK, {'epsilon': 1e-2}, (1361, 1, 9.4, 0.42)),
    ]
    return BenchSuite('table5', 'Hill n=5 on [0,10]^5', _cells('table5', 'hill', 5, 'X0', None, rows))


def _table6():
    rows = [
        (Method.BISECTION, {'epsilon': 1e-1}, (5749985, 322103, None, 1476.6551)),
        (Method.SUBDIVISION, {'m': 5}, (9765625, 1025, None, 340.5)),
        (Method.ICP, {'m': 5, 'n_it': 5}, (9765625, 3, 1.0, 729.0)),
        (Method.NEWTON, {'epsilon': 1e-2}, (330277, 50, 1.075, 102.62)),
        (Method.KRAWCZYK, {'epsilon': 1e-2}, (330277, 3, 2.0, 109.5)),
    ]
    return BenchSuite('table6', 'Hill n=10 on [0,10]^10', _cells('table6', 'hill', 10, 'X0', None, rows))


def _table7():
    eps = 0.02
    rows = [
        (Method.BISECTION, {'epsilon': eps}, (123, 9, None, 0.0005)),
        (Method.SUBDIVISION, {'m': 10}, (100, 9, None, 0.0004)),
        (Method.ICP, {'m': 5, 'n_it': 5}, (25, 3, 1.12, 0.0003)),
        (Method.NEWTON, {'epsilon': eps}, (65, 4, 1.0, 0.0010)),
        (Method.KRAWCZYK, {'epsilon': eps}, (65, 4, 7.75, 0.0026)),
    ]
    return BenchSuite('table7', 'WTA n=2 on [0,2]^2', _cells('table7', 'wta', 2, 'X0', None, rows))


def _table8():
    eps = 0.02
    rows = [
        (Method.BISECTION, {'epsilon': eps}, (19458141, 7882977, None, 137.8984)),
        (Method.SUBDIVISION, {'m': 10}, (100000, 323, None, 0.7166)),
        (Method.ICP, {'m': 10, 'n_it': 10}, (100000, 243, 1.0, 35.8382)),
        (Method.NEWTON, {'epsilon': eps}, (19457249, 7882977, 1.0, 523.6390)),
        (Method.KRAWCZYK, {'epsilon': eps}, (19457249, 7882977, 96.2, 449.2722)),
    ]
    return BenchSuite('table8', 'WTA n=5 on [0,2]^5', _cells('table8', 'wta', 5, 'X0', None, rows))


def _table9():
    eps = 0.2
    rows = [
        (Method.BISECTION, {'epsilon': eps}, (87640737, 25887072, None, 1342.3153)),
        (Method.SUBDIVISION, {'m': 5}, (9765625, 10449, None, 87.3882)),
        (Method.ICP, {'m': 5, 'n_it': 5}, (9765625, 1024, 1.0, 638.7728)),
        (Method.NEWTON, {'epsilon': eps}, (87640737, 25887072, 0.0, 4043.2741)),
        (Method.KRAWCZYK, {'epsilon': eps}, (87640737, 25887072, 0.0, 4149.7953)),
    ]
    return BenchSuite('table9', 'WTA n=10 on [0,2]^10', _cells('table9', 'wta', 10, 'X0', None, rows))


SUITES = {
    'table4': _table4,
    'table5': _table5,
    'table6': _table6,
    'table7': _table7,
    'table8': _table8,
    'table9': _table9,
}


def get_suite(name, repetitions=1):
    if repetitions < 1:
        raise InvalidConfig('repetitions must be at least 1')
    try:
        suite = SUITES[name]()
    except KeyError:
        raise UnknownSuite(f"Unknown suite '{name}' (available: {', '.join(SUITES)})")
    suite.repetitions = repetitions
    return suite


# ==================== Running ====================

@dataclass
class CellResult:
    cell: BenchCell
    status: str
    report: object = None
    predicted_ops: float = None
    error: str = None

    @property
    def measured_over_predicted(self):
        if self.report is None or not self.predicted_ops:
            return None
        return self.report.counters.interval_ops / self.predicted_ops

    def _over_published(self, name):
        published = self.cell.published
        if self.report is None or published is None or not getattr(published, name):
            return None
        return getattr(self.report, name) / getattr(published, name)

    @property
    def N_proc_over_published(self):
        return self._over_published('N_proc')

    @property
    def N_keep_over_published(self):
        return self._over_published('N_keep')

    @property
    def avg_iter_over_published(self):
        return self._over_published('avg_iter')


@dataclass
class SuiteResult:
    suite: BenchSuite
    results: list = field(default_factory=list)

    @property
    def budget_exceeded(self):
        return any(r.status == 'budget_exceeded' for r in self.results)

    @property
    def failed(self):
        return any(r.status == 'failed' for r in self.results)


def run_cell(cell, repetitions=1, max_boxes=None, seed=0):
    """Run one cell; with repetitions > 1 a warm-up run is discarded and the median time kept."""
    model = cell.build_model()
    cfg = cell.config(max_boxes=max_boxes, seed=seed)
    if repetitions > 1:
        solve(model, cfg)
    reports = [solve(model, cfg) for _ in range(repetitions)]
    report = reports[-1]
    report.wall_time_s = statistics.median(r.wall_time_s for r in reports)
    predicted = predict_workload(cost_inputs_for(model, cfg))
    status = 'budget_exceeded' if report.budget_exceeded else 'ok'
    return CellResult(cell=cell, status=status, report=report, predicted_ops=predicted)


def run_suite(suite, allow_long=False, max_boxes=None, seed=0):
    """Run every cell in order; a failing or over-budget cell never aborts the suite."""
    outcome = SuiteResult(suite=suite)
    for cell in suite.cells:
        if cell.long and not allow_long:
            logger.info(f"Skipping long cell {suite.name}:{cell.name} (needs allow_long)")
            outcome.results.append(CellResult(cell=cell, status='skipped'))
            continue
        try:
            result = run_cell(cell, repetitions=suite.repetitions, max_boxes=max_boxes, seed=seed)
        except IvsolveError as exc:
            logger.error(f"✗ {suite.name}:{cell.name} failed: {exc}")
            result = CellResult(cell=cell, status='failed', error=str(exc))
        else:
            r = result.report
            logger.info(
                f"✓ {suite.name}:{cell.name} N_proc={r.N_proc} N_keep={r.N_keep} "
                f"avg_iter={r.avg_iter:.3f} status={result.status}"
            )
        outcome.results.append(result)
    return outcome


# ==================== Report writers ====================

def _fmt(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def result_row(result):
    cell, report = result.cell, result.report
    published = cell.published
    row = {
        'suite': cell.suite, 'cell': cell.label, 'method': cell.method.value,
        'model': cell.model, 'n': cell.n, 'setting': cell.setting_label,
        'predicted_ops': result.predicted_ops,
        'measured_over_predicted': result.measured_over_predicted,
        'published_N_proc': published.N_proc if published else None,
        'published_N_keep': published.N_keep if published else None,
        'published_avg_iter': published.avg_iter if published else None,
        'N_proc_over_published': result.N_proc_over_published,
        'N_keep_over_published': result.N_keep_over_published,
        'avg_iter_over_published': result.avg_iter_over_published,
        'status': result.status,
    }
    if report is not None:
        counters = report.counters
        row.update({
            'N_proc': report.N_proc, 'N_keep': report.N_keep, 'avg_iter': report.avg_iter,
            'F_evals': counters.F_evals, 'J_evals': counters.J_evals,
            'inversions': counters.inversions, 'contractor_calls': counters.contractor_calls,
            'interval_ops': counters.interval_ops, 'adds': counters.adds, 'subs': counters.subs,
            'muls': counters.muls, 'divs': counters.divs, 'comparisons': counters.comparisons,
            'hulled_divisions': counters.hulled_divisions,
            'peak_worklist': report.peak_worklist, 'peak_retained': report.peak_retained,
            'wall_time_s': report.wall_time_s,
        })
    return row


def write_csv(results, stream=None):
    """One row per cell in CSV_COLUMNS order. Returns the text when no stream is given."""
    target = stream if stream is not None else io.StringIO()
    writer = csv.writer(target, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for result in results:
        row = result_row(result)
        writer.writerow([_fmt(row.get(column)) for column in CSV_COLUMNS])
    if stream is None:
        return target.getvalue()
    return None


def write_json(suite_result, include_boxes=False):
    from rest_framework.renderers import JSONRenderer

    from .serializers import SuiteResultSerializer

    data = SuiteResultSerializer(suite_result, context={'include_boxes': include_boxes}).data
    return JSONRenderer().render(data).decode('utf-8')


RUN_CSV_COLUMNS = (
    'method', 'model', 'n', 'setting',
    'N_proc', 'N_keep', 'avg_iter',
    'F_evals', 'J_evals', 'inversions', 'contractor_calls', 'interval_ops',
    'adds', 'subs', 'muls', 'divs', 'comparisons', 'hulled_divisions',
    'peak_worklist', 'peak_retained', 'budget_exceeded', 'wall_time_s',
)


def write_run_csv(report, stream=None):
    """A single solver run as a header plus one row."""
    target = stream if stream is not None else io.StringIO()
    row = dict(report.counters.as_dict())
    row.update({
        'method': report.method.value, 'model': report.model, 'n': report.n,
        'setting': report.config.setting_label(),
        'N_proc': report.N_proc, 'N_keep': report.N_keep, 'avg_iter': report.avg_iter,
        'peak_worklist': report.peak_worklist, 'peak_retained': report.peak_retained,
        'budget_exceeded': report.budget_exceeded, 'wall_time_s': report.wall_time_s,
    })
    writer = csv.writer(target, lineterminator='\n')
    writer.writerow(RUN_CSV_COLUMNS)
    writer.writerow([_fmt(row.get(column)) for column in RUN_CSV_COLUMNS])
    if stream is None:
        return target.getvalue()
    return None


def write_run_json(report, include_boxes=False):
    from rest_framework.renderers import JSONRenderer

    from .serializers import RunDocumentSerializer

    data = RunDocumentSerializer(report, context={'include_boxes': include_boxes}).data
    return JSONRenderer().render(data).decode('utf-8')
