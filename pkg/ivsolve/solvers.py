"""
Enclosure algorithms for all steady states of f(x, u) = 0 over X0 and U.

Five methods share one report format:

* ``bisection``    recursive bisection with the inclusion test
* ``subdivision``  uniform m**n grid filtered by the inclusion test
* ``icp``          uniform grid, each box contracted by the HC4 contractor
* ``newton``       interval Newton steps, bisecting when the Jacobian is not regular
* ``krawczyk``     Krawczyk steps with a midpoint-inverse preconditioner

The adaptive methods walk an explicit LIFO worklist (left half first) and
bisect the widest axis. Counters are collected with ``intervals.counting``;
a run that hits ``max_boxes`` stops and is flagged instead of raising.
"""
import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

from .conf import get_setting
from .contractor import contract_system
from .exceptions import (
    BudgetExceeded,
    DegenerateAxis,
    InvalidConfig,
    PivotContainsZero,
    SingularEnclosure,
    SingularMatrix,
)
from .expressions import eval_jacobian, eval_system, zero_in
from .intervals import Box, OpCounters, bisect, box_diam, contains_zero, counting, iter_subdivision, suspended
from .linalg import (
    det_gauss,
    identity_matrix,
    inverse_gauss,
    mat_sub,
    mat_vec,
    mid_matrix,
    real_inverse,
    real_mat_interval_mat,
    real_mat_vec,
    vec_add,
    vec_sub,
)

logger = logging.getLogger(__name__)


class Method(str, Enum):
    BISECTION = 'bisection'
    SUBDIVISION = 'subdivision'
    ICP = 'icp'
    NEWTON = 'newton'
    KRAWCZYK = 'krawczyk'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace('+', '_').replace('-', '_')
        key = METHOD_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ', '.join(m.value for m in cls)
            raise InvalidConfig(f"Unknown method '{value}' (choose from {choices})")


METHOD_ALIASES = {
    'subdivision_filter': 'subdivision',
    'filter': 'subdivision',
    'constraint_propagation': 'icp',
    'contractor': 'icp',
}

GRID_METHODS = (Method.SUBDIVISION, Method.ICP)
ITERATIVE_METHODS = (Method.ICP, Method.NEWTON, Method.KRAWCZYK)

DEFAULT_EPSILON = 1e-3
DEFAULT_ICP_ITERATIONS = 5
DEFAULT_NEWTON_ITERATIONS = 100


def setting_label(method, epsilon, m, n_it):
    """Short label in the style of the experiment tables (``eps=0.001``, ``m=100``)."""
    if method == Method.SUBDIVISION:
        return f"m={m}"
    if method == Method.ICP:
        return f"m={m}, l={n_it}"
    return f"eps={epsilon:g}"


@dataclass
class SolverConfig:
    """
    Settings for one solver run.

    ``epsilon`` is the target box width for bisection, Newton and Krawczyk;
    every iterative method also stops its inner loop once a step shrinks
    the box diameter by less than epsilon / 10. ``m`` is the number of grid
    cells per axis and ``n_it`` the per-box iteration cap (``l`` for ICP).
    """
    method: Method
    epsilon: float = DEFAULT_EPSILON
    m: int = None
    n_it: int = None
    max_boxes: int = None
    seed: int = 0

    def __post_init__(self):
        self.method = Method.parse(self.method)
        if self.max_boxes is None:
            self.max_boxes = int(get_setting('IVSOLVE_MAX_BOXES'))
        if self.n_it is None and self.method in ITERATIVE_METHODS:
            self.n_it = DEFAULT_ICP_ITERATIONS if self.method == Method.ICP else DEFAULT_NEWTON_ITERATIONS
        self.validate()

    def validate(self):
        if self.epsilon is None or not self.epsilon > 0:
            raise InvalidConfig(f"epsilon must be positive, got {self.epsilon!r}")
        if self.method in GRID_METHODS:
            if self.m is None:
                raise InvalidConfig(f"Method '{self.method.value}' needs the grid parameter m")
            if int(self.m) != self.m or self.m < 1:
                raise InvalidConfig(f"m must be a positive integer, got {self.m!r}")
        if self.method in ITERATIVE_METHODS and (int(self.n_it) != self.n_it or self.n_it < 1):
            raise InvalidConfig(f"The iteration cap must be a positive integer, got {self.n_it!r}")
        if self.max_boxes < 1:
            raise InvalidConfig('max_boxes must be at least 1')

    @property
    def icp_l(self):
        return self.n_it

    @property
    def tolerance(self):
        return self.epsilon / 10.0

    def setting_label(self):
        return setting_label(self.method, self.epsilon, self.m, self.n_it)

    def as_dict(self):
        data = asdict(self)
        data['method'] = self.method.value
        return data


@dataclass
class RunReport:
    method: Method
    model: str
    n: int
    config: SolverConfig
    N_proc: int = 0
    N_keep: int = 0
    avg_iter: float = 0.0
    retained: list = field(default_factory=list)
    counters: OpCounters = field(default_factory=OpCounters)
    wall_time_s: float = 0.0
    budget_exceeded: bool = False
    peak_worklist: int = 0
    peak_retained: int = 0

    @property
    def tolerance(self):
        return self.config.tolerance

    @property
    def hulled_divisions(self):
        return self.counters.hulled_divisions

    def union_contains(self, x):
        return any(box.contains_point(x) for box in self.retained)

    def raise_for_budget(self):
        if self.budget_exceeded:
            raise BudgetExceeded(
                f"{self.method.value} on {self.model} stopped at {self.N_proc} boxes "
                f"(max_boxes={self.config.max_boxes})",
                report=self,
            )
        return self


class _Run:
    """Mutable bookkeeping shared by the method loops."""

    def __init__(self, model, cfg):
        self.model = model
        self.cfg = cfg
        self.retained = []
        self.N_proc = 0
        self.iterations = 0
        self.peak_worklist = 0
        self.peak_retained = 0
        self.budget_exceeded = False

    def over_budget(self):
        if self.N_proc >= self.cfg.max_boxes:
            if not self.budget_exceeded:
                logger.debug(f"Budget of {self.cfg.max_boxes} boxes reached for {self.model.name}")
            self.budget_exceeded = True
            return True
        return False

    def keep(self, X):
        self.retained.append(X)
        if len(self.retained) > self.peak_retained:
            self.peak_retained = len(self.retained)

    def split(self, stack, X):
        """Push the halves of X (left on top); a box too thin to split is retained."""
        try:
            left, right = bisect(X, X.widest_axis())
        except DegenerateAxis:
            self.keep(X)
            return
        stack.append(right)
        stack.append(left)
        if len(stack) > self.peak_worklist:
            self.peak_worklist = len(stack)


# ==================== Bisection ====================

def _bisection(run):
    model, eps = run.model, run.cfg.epsilon
    stack = [model.X0]
    run.peak_worklist = 1
    while stack:
        if run.over_budget():
            break
        X = stack.pop()
        run.N_proc += 1
        if not zero_in(eval_system(model, X)):
            continue
        if box_diam(X) <= eps:
            run.keep(X)
            continue
        run.split(stack, X)


# ==================== Grid methods ====================

def _grid_gate(run):
    """True when the grid should be processed; the X0 test is not counted."""
    with suspended():
        feasible = zero_in(eval_system(run.model, run.model.X0))
    if not feasible:
        return False
    total = run.cfg.m ** run.model.n
    if total > run.cfg.max_boxes:
        logger.debug(f"Grid of {total} boxes exceeds max_boxes={run.cfg.max_boxes}")
        run.budget_exceeded = True
        return False
    return True


def _subdivision(run):
    if not _grid_gate(run):
        return
    model = run.model
    for box in iter_subdivision(model.X0, run.cfg.m):
        run.N_proc += 1
        if zero_in(eval_system(model, box)):
            run.keep(box)


def _icp(run):
    if not _grid_gate(run):
        return
    model, tol, limit = run.model, run.cfg.tolerance, run.cfg.n_it
    for box in iter_subdivision(model.X0, run.cfg.m):
        run.N_proc += 1
        current = box
        for _ in range(limit):
            run.iterations += 1
            result = contract_system(model, current)
            current = result.box
            if current.is_empty or result.width_reduction <= tol:
                break
        if not current.is_empty:
            run.keep(current)


# ==================== Newton / Krawczyk ====================

def _regular_jacobian(J):
    """0 not in det(J), decided by Gaussian elimination."""
    try:
        return not contains_zero(det_gauss(J))
    except PivotContainsZero:
        return False


def _newton_operator(J):
    Jinv = inverse_gauss(J)

    def step(model, X):
        x0 = Box.point(X.midpoint())
        return vec_sub(x0, mat_vec(Jinv, eval_system(model, x0)))

    return step


def _krawczyk_operator(J):
    Y = real_inverse(mid_matrix(J))
    E = mat_sub(identity_matrix(J.n), real_mat_interval_mat(Y, J))

    def step(model, X):
        x0 = Box.point(X.midpoint())
        centre = vec_sub(x0, real_mat_vec(Y, eval_system(model, x0)))
        return vec_add(centre, mat_vec(E, vec_sub(X, x0)))

    return step


def _iterate(run, X, step):
    current = X
    for _ in range(run.cfg.n_it):
        run.iterations += 1
        new = current.intersect(step(run.model, current))
        if new.is_empty:
            return new
        decrease = box_diam(current) - box_diam(new)
        current = new
        if decrease < run.cfg.tolerance:
            break
    return current


def _operator_method(run, make_operator):
    model, eps = run.model, run.cfg.epsilon
    stack = [model.X0]
    run.peak_worklist = 1
    while stack:
        if run.over_budget():
            break
        X = stack.pop()
        run.N_proc += 1
        if not zero_in(eval_system(model, X)):
            continue
        J = eval_jacobian(model, X)
        step = None
        if _regular_jacobian(J):
            try:
                step = make_operator(J)
            except (SingularEnclosure, SingularMatrix):
                step = None
        if step is not None:
            result = _iterate(run, X, step)
            if not result.is_empty:
                run.keep(result)
        elif box_diam(X) > eps:
            run.split(stack, X)
        else:
            run.keep(X)


def _newton(run):
    _operator_method(run, _newton_operator)


def _krawczyk(run):
    _operator_method(run, _krawczyk_operator)


_DISPATCH = {
    Method.BISECTION: _bisection,
    Method.SUBDIVISION: _subdivision,
    Method.ICP: _icp,
    Method.NEWTON: _newton,
    Method.KRAWCZYK: _krawczyk,
}


def solve(model, cfg):
    """Run ``cfg.method`` on ``model`` and return its RunReport."""
    run = _Run(model, cfg)
    started = time.perf_counter()
    with counting() as counters:
        _DISPATCH[cfg.method](run)
    elapsed = time.perf_counter() - started

    retained = sorted(run.retained, key=Box.lower_corner)
    report = RunReport(
        method=cfg.method,
        model=model.name,
        n=model.n,
        config=cfg,
        N_proc=run.N_proc,
        N_keep=len(retained),
        avg_iter=(run.iterations / run.N_proc) if run.N_proc else 0.0,
        retained=retained,
        counters=counters,
        wall_time_s=elapsed,
        budget_exceeded=run.budget_exceeded,
        peak_worklist=run.peak_worklist,
        peak_retained=run.peak_retained,
    )
    logger.info(
        f"{cfg.method.value} on {model.name} (n={model.n}, {cfg.setting_label()}): "
        f"N_proc={report.N_proc} N_keep={report.N_keep} avg_iter={report.avg_iter:.3f} "
        f"time={elapsed:.3f}s{' [budget exceeded]' if run.budget_exceeded else ''}"
    )
    return report


def solve_bisection(model, cfg):
    return solve(model, _with_method(cfg, Method.BISECTION))


def solve_subdivision_filter(model, cfg):
    return solve(model, _with_method(cfg, Method.SUBDIVISION))


def solve_icp(model, cfg):
    return solve(model, _with_method(cfg, Method.ICP))


def solve_newton(model, cfg):
    return solve(model, _with_method(cfg, Method.NEWTON))


def solve_krawczyk(model, cfg):
    return solve(model, _with_method(cfg, Method.KRAWCZYK))


def _with_method(cfg, method):
    if cfg.method != method:
        raise InvalidConfig(f"Config is for '{cfg.method.value}', not '{method.value}'")
    return cfg
