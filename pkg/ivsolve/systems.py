"""
Built-in systems: the Hill regulatory ring, the winner-take-all transcription
network, and small systems with analytically known roots.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .exceptions import UnknownModel
from .expressions import ParamVar, StateVar, SystemModel, parse_system
from .intervals import Box, Interval

logger = logging.getLogger(__name__)

HILL_COEFFICIENT = 10
HILL_ALPHA = ('3.8', '4.2')
HILL_GAMMA = ('0.95', '1.05')

# (name, lower, upper); the order is the parameter order of the model
WTA_PARAMETERS = (
    ('Dtot', '1.98', '2.02'),
    ('Etot', '0.099', '0.101'),
    ('KM', '0.0099', '0.0101'),
    ('KMp', '0.099', '0.101'),
    ('kcat', '0.0297', '0.0303'),
    ('kcatp', '0.01188', '0.01212'),
    ('kdeff', '0.00198', '0.00202'),
    ('KA', '0.99', '1.01'),
)


def _state_names(n):
    return tuple(f"x{i}" for i in range(1, n + 1))


def hill_network(n=2, lo=0.0, hi=10.0):
    """
    f_i = 0.5 + alpha_i / (1 + x_{i-1}^10) - gamma * x_i on a ring (x_0 is x_n).

    Parameters are alpha_1..alpha_n in [3.8, 4.2] and gamma in [0.95, 1.05].
    """
    if n < 2:
        raise UnknownModel('The Hill network needs n >= 2')
    x = [StateVar(i) for i in range(n)]
    alpha = [ParamVar(i) for i in range(n)]
    gamma = ParamVar(n)
    equations = tuple(
        0.5 + alpha[i] / (1 + x[i - 1] ** HILL_COEFFICIENT) - gamma * x[i]
        for i in range(n)
    )
    U = Box([Interval.from_decimal(*HILL_ALPHA)] * n + [Interval.from_decimal(*HILL_GAMMA)])
    return SystemModel(
        name=f"hill_{n}",
        states=_state_names(n),
        params=tuple(f"alpha{i}" for i in range(1, n + 1)) + ('gamma',),
        equations=equations,
        X0=Box.uniform(lo, hi, n),
        U=U,
    )


def wta_network(n=2, lo=0.0, hi=2.0):
    """
    Winner-take-all network of n DNA switches sharing RNA polymerase.

    With s_i = x_i / (KA + x_i), ON_i = Dtot * s_i and OFF_i = Dtot * KA / (KA + x_i):

        L   = sum_j (ON_j / KM + OFF_j / KMp)
        Ld  = sum_j x_j
        f_i = Etot / (1 + L) * (kcat / KM * ON_i + kcatp / KMp * OFF_i) - kdeff * x_i / (1 + Ld)

    The degradation enzyme's total, turnover and Michaelis constant are folded
    into ``kdeff``, with the degradation Michaelis constant normalised to 1.
    """
    if n < 1:
        raise UnknownModel('The WTA network needs n >= 1')
    x = [StateVar(i) for i in range(n)]
    Dtot, Etot, KM, KMp, kcat, kcatp, kdeff, KA = (ParamVar(i) for i in range(len(WTA_PARAMETERS)))
    on = [Dtot * x[i] / (KA + x[i]) for i in range(n)]
    off = [Dtot * KA / (KA + x[i]) for i in range(n)]
    load = on[0] / KM + off[0] / KMp
    load_d = x[0]
    for j in range(1, n):
        load = load + (on[j] / KM + off[j] / KMp)
        load_d = load_d + x[j]
    equations = tuple(
        Etot / (1 + load) * (kcat / KM * on[i] + kcatp / KMp * off[i]) - kdeff * x[i] / (1 + load_d)
        for i in range(n)
    )
    return SystemModel(
        name=f"wta_{n}",
        states=_state_names(n),
        params=tuple(name for name, _, _ in WTA_PARAMETERS),
        equations=equations,
        X0=Box.uniform(lo, hi, n),
        U=Box([Interval.from_decimal(a, b) for _, a, b in WTA_PARAMETERS]),
    )


# ==================== Known-root systems ====================

def sqrt_two():
    x = StateVar(0)
    return SystemModel(
        name='sqrt2', states=('x',), params=(), equations=(x ** 2 - 2,),
        X0=Box([(0.0, 2.0)]), known_roots=((math.sqrt(2.0),),),
    )


def linear_pair():
    x1, x2 = StateVar(0), StateVar(1)
    return SystemModel(
        name='linear2', states=('x1', 'x2'), params=(),
        equations=(2 * x1 + x2 - 3, x1 - x2),
        X0=Box.uniform(-5.0, 5.0, 2), known_roots=((1.0, 1.0),),
    )


def decoupled_quadratics(constants=(1.0, 4.0, 9.0)):
    """x_i^2 = c_i; only the sign patterns inside X0 are listed as known roots."""
    xs = [StateVar(i) for i in range(len(constants))]
    X0 = Box([(-4.0, 4.0), (-1.0, 3.0), (0.5, 4.0)][:len(constants)])
    roots = [()]
    for c, component in zip(constants, X0):
        r = math.sqrt(c)
        choices = [v for v in (-r, r) if component.lo <= v <= component.hi]
        roots = [prefix + (v,) for prefix in roots for v in choices]
    return SystemModel(
        name=f"quadratics{len(constants)}",
        states=_state_names(len(constants)), params=(),
        equations=tuple(x ** 2 - c for x, c in zip(xs, constants)),
        X0=X0, known_roots=tuple(roots),
    )


def sum_product_example():
    """(x1 + x2, x1 * (1 + x2)): roots (0, 0) and (1, -1)."""
    x1, x2 = StateVar(0), StateVar(1)
    return SystemModel(
        name='sumprod', states=('x1', 'x2'), params=(),
        equations=(x1 + x2, x1 * (1 + x2)),
        X0=Box.uniform(-2.0, 2.0, 2), known_roots=((0.0, 0.0), (1.0, -1.0)),
    )


def known_root_suite():
    return [sqrt_two(), linear_pair(), decoupled_quadratics(), sum_product_example()]


# ==================== Registry ====================

@dataclass(frozen=True)
class ModelFactory:
    name: str
    description: str
    builder: object
    default_n: int = None

    @property
    def takes_n(self):
        return self.default_n is not None

    def build(self, n=None, domain=None):
        if self.takes_n:
            n = self.default_n if n is None else n
            if domain is not None:
                return self.builder(n, *domain)
            return self.builder(n)
        model = self.builder()
        if domain is not None:
            model = model.with_domain(Box.uniform(domain[0], domain[1], model.n))
        return model


MODEL_REGISTRY = {
    factory.name: factory
    for factory in (
        ModelFactory('hill', 'Hill regulatory ring, h=10, X0=[0,10]^n', hill_network, default_n=2),
        ModelFactory('wta', 'Winner-take-all transcription network, X0=[0,2]^n', wta_network, default_n=2),
        ModelFactory('sqrt2', 'x^2 - 2 on [0,2]', sqrt_two),
        ModelFactory('linear2', 'Linear 2x2 system with root (1,1)', linear_pair),
        ModelFactory('quadratics3', 'Decoupled x_i^2 = c_i, c = (1,4,9)', decoupled_quadratics),
        ModelFactory('sumprod', '(x1 + x2, x1 (1 + x2)) on [-2,2]^2', sum_product_example),
    )
}


def get_model(name, n=None, domain=None):
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError:
        raise UnknownModel(f"Unknown model '{name}' (built-ins: {', '.join(sorted(MODEL_REGISTRY))})")
    return factory.build(n=n, domain=domain)


def load_model(source, n=None, domain=None):
    """A built-in model by name, or a model DSL file by path."""
    if source in MODEL_REGISTRY:
        return get_model(source, n=n, domain=domain)
    path = Path(source)
    if not path.is_file():
        raise UnknownModel(f"'{source}' is neither a built-in model nor a readable model file")
    model = parse_system(path.read_text(encoding='utf-8'))
    logger.info(f"Loaded model {model.name} from {path}")
    if domain is not None:
        model = model.with_domain(Box.uniform(domain[0], domain[1], model.n))
    return model
