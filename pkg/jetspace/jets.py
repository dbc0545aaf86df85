"""
k-jet equations of a surface singularity and their wedge expansions.

A k-jet through the origin is x(t) = a_1 t + ... + a_k t^k (same for y with
b_j, z with c_j). Substituting into F and reading off the coefficient of t^l
gives f_l. Restricting to the arcs of one exceptional divisor kills the
coefficients below its orders mu(x), mu(y), mu(z).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from jetspace.coeff_field import GaussianRational, ONE
from jetspace.errors import (DepthExhaustedError, JetspaceError, TruncationOrderError,
                             UnsupportedPatternError)
from jetspace.multipoly import (COORDINATE_OF, FAMILY_OF, Polynomial, VariableId, WeightVector,
                                aux_var, collect, is_weighted_homogeneous, jet_var, leading_form,
                                monomial_degree, monomial_exponent, parse_polynomial,
                                partial_derivative, substitute, weighted_order)

T = aux_var('t')
S = aux_var('s')
COORDINATES = ('x', 'y', 'z')


@dataclass
class SurfaceEquation:
    F: Polynomial
    text: str = ""

    def __post_init__(self):
        allowed = {aux_var(name) for name in COORDINATES}
        stray = self.F.variables() - allowed
        if stray:
            raise JetspaceError(f"surface equation may only use x, y, z; found {sorted(map(str, stray))}",
                                stage="fixture")
        for m in self.F.terms:
            if monomial_degree(m) < 2:
                raise JetspaceError("surface equation must have no constant or linear part", stage="fixture")
        if not self.text:
            self.text = self.F.to_text()

    @classmethod
    def from_text(cls, text: str) -> 'SurfaceEquation':
        return cls(parse_polynomial(text), text)

    def mu_weights(self, mu: Tuple[int, int, int]) -> WeightVector:
        return WeightVector({aux_var(name): Fraction(w) for name, w in zip(COORDINATES, mu)})

    def exponent_triples(self) -> List[Tuple[Tuple[int, int, int], GaussianRational]]:
        x, y, z = (aux_var(name) for name in COORDINATES)
        return [((monomial_exponent(m, x), monomial_exponent(m, y), monomial_exponent(m, z)), c)
                for m, c in self.F.terms.items()]


@dataclass
class DivisorRecord:
    name: str
    mu: Tuple[int, int, int]
    test_orders: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.mu = tuple(int(v) for v in self.mu)
        if len(self.mu) != 3 or any(v < 1 for v in self.mu):
            raise JetspaceError(f"divisor {self.name}: mu must be three positive integers", stage="fixture")
        for fn, order in self.test_orders.items():
            if int(order) < 0:
                raise JetspaceError(f"divisor {self.name}: negative order for {fn}", stage="fixture")

    def mu_of(self, family: str) -> int:
        return self.mu['abc'.index(family)]

    def vanishing_variables(self) -> List[VariableId]:
        killed = []
        for family in 'abc':
            killed.extend(jet_var(family, n) for n in range(1, self.mu_of(family)))
        return killed

    def first_variables(self) -> List[VariableId]:
        """a_mu(x), b_mu(y), c_mu(z): the first coefficients allowed to be nonzero."""
        return [jet_var(family, self.mu_of(family)) for family in 'abc']

    def to_dict(self) -> Dict:
        return {"name": self.name, "mu": list(self.mu), "test_orders": dict(self.test_orders)}

    @classmethod
    def from_dict(cls, data: Dict) -> 'DivisorRecord':
        return cls(data["name"], tuple(data["mu"]), dict(data.get("test_orders", {})))


@dataclass
class JetSystem:
    surface: SurfaceEquation
    k: int
    equations: List[Polynomial]
    start: Tuple[int, int, int] = (1, 1, 1)

    @property
    def order(self) -> int:
        return len(self.equations)

    def f(self, l: int) -> Polynomial:
        if l < 1 or l > self.order:
            raise IndexError(f"f_{l} outside 1..{self.order}")
        return self.equations[l - 1]


@dataclass
class FamilySystem:
    divisor: DivisorRecord
    k: int
    o_i: int
    o_ik: int
    reduced: Dict[int, Polynomial]
    vanishing: List[VariableId]

    def equation(self, j: int) -> Polynomial:
        return self.reduced[j]

    def within_k(self) -> Dict[int, Polynomial]:
        return {j: p for j, p in self.reduced.items() if j <= self.k}

    def ideal_generators(self) -> List[Polynomial]:
        """Generators of I_ik: the killed coefficients and f_{i,o_i}..f_{i,o_ik}."""
        return [Polynomial.variable(v) for v in self.vanishing] + [self.reduced[j] for j in sorted(self.reduced)]

    def ring_variables(self) -> List[VariableId]:
        return [jet_var(family, n) for family in 'abc' for n in range(1, self.k + 1)]


def jet_series(family: str, k: int, start: int = 1, parameter: VariableId = T) -> Polynomial:
    return sum((Polynomial.variable(jet_var(family, n)) * Polynomial.variable(parameter) ** n
                for n in range(start, k + 1)), Polynomial())


def expand_jet(eq: SurfaceEquation, k: int, order: Optional[int] = None,
               start: Tuple[int, int, int] = (1, 1, 1)) -> JetSystem:
    """Coefficients f_1..f_order of F(x(t), y(t), z(t)) with k-term series.

    `start` drops the series coefficients below the given indices, which
    gives the family equations f_ij directly.
    """
    if k < 1:
        raise TruncationOrderError("k must be at least 1")
    order = k if order is None else order
    assignment = {aux_var(coord): jet_series(family, k, first)
                  for coord, family, first in zip(COORDINATES, 'abc', start)}
    composed = substitute(eq.F, assignment, truncate=(T, order))
    by_power = collect(composed, T)
    equations = [by_power.get(l, Polynomial()) for l in range(1, order + 1)]
    return JetSystem(eq, k, equations, tuple(start))


def contact_orders(eq: SurfaceEquation, d: DivisorRecord, k: int) -> Tuple[int, int]:
    """o_i = weighted order of F under mu; o_ik = k plus the smallest one-step shift.

    A shift for a coordinate only counts on monomials that contain it.
    """
    o_i = int(weighted_order(eq.F, eq.mu_weights(d.mu)))
    shifts = []
    for exponents, _ in eq.exponent_triples():
        base = sum(e * m for e, m in zip(exponents, d.mu))
        for position, e in enumerate(exponents):
            if e >= 1:
                shifts.append(base - d.mu[position])
    return o_i, k + min(shifts)


def reduce_to_family(js: JetSystem, d: DivisorRecord) -> FamilySystem:
    o_i, o_ik = contact_orders(js.surface, d, js.k)
    if js.k < o_i:
        raise TruncationOrderError(f"k < o_i ({js.k} < {o_i}) for divisor {d.name}")
    killed = {v: Polynomial() for v in d.vanishing_variables()}
    if js.order >= o_ik and js.start == (1, 1, 1):
        reduced = {j: substitute(js.f(j), killed) for j in range(o_i, o_ik + 1)}
    else:
        direct = expand_jet(js.surface, js.k, o_ik, d.mu)
        reduced = {j: direct.f(j) for j in range(o_i, o_ik + 1)}
    return FamilySystem(d, js.k, o_i, o_ik, reduced, d.vanishing_variables())


def family_system(eq: SurfaceEquation, d: DivisorRecord, k: int) -> FamilySystem:
    o_i, o_ik = contact_orders(eq, d, k)
    if k < o_i:
        raise TruncationOrderError(f"k < o_i ({k} < {o_i}) for divisor {d.name}")
    direct = expand_jet(eq, k, o_ik, d.mu)
    reduced = {j: direct.f(j) for j in range(o_i, o_ik + 1)}
    return FamilySystem(d, k, o_i, o_ik, reduced, d.vanishing_variables())


def jet_leading_form(eq: SurfaceEquation, d: DivisorRecord) -> Polynomial:
    """mu-leading form of F rewritten in a_mu(x), b_mu(y), c_mu(z); equals f_{i,o_i}."""
    lead = leading_form(eq.F, eq.mu_weights(d.mu))
    renaming = {aux_var(coord): Polynomial.variable(jet_var(family, d.mu_of(family)))
                for coord, family in zip(COORDINATES, 'abc')}
    return substitute(lead, renaming)


def leading_derivatives(fs: FamilySystem) -> List[Polynomial]:
    lead = fs.reduced[fs.o_i]
    return [partial_derivative(lead, v) for v in fs.divisor.first_variables()]


def jet_grading_check(js: JetSystem) -> bool:
    """Every f_l is weighted homogeneous of degree l and uses no index above l."""
    for l, f_l in enumerate(js.equations, start=1):
        if not f_l:
            continue
        grading = WeightVector.jet_grading(f_l.variables())
        homogeneous, degree = is_weighted_homogeneous(f_l, grading)
        if not homogeneous or degree != l:
            return False
        if any(v.primary > l for v in f_l.variables()):
            return False
    return True


def verify_recursion(fs: FamilySystem, i: Optional[int] = None) -> bool:
    """Check f_{r+i} = sum over first variables of d(f_r)/dv * v_{+i} + S_{r+i}.

    S_{r+i} may only involve a_l..a_{l+i-1}, b_m..b_{m+i-1}, c_n..c_{n+i-1}.
    """
    r = fs.o_i
    steps = range(1, max(fs.reduced) - r + 1) if i is None else [i]
    f_r = fs.reduced[r]
    for step in steps:
        if step == 0:
            continue
        if r + step not in fs.reduced:
            return False
        linear = Polynomial()
        for v in fs.divisor.first_variables():
            shifted = Polynomial.variable(jet_var(v.family, v.primary + step))
            linear = linear + partial_derivative(f_r, v) * shifted
        remainder = fs.reduced[r + step] - linear
        for v in remainder.variables():
            if v.primary > fs.divisor.mu_of(v.family) + step - 1:
                return False
    return True


# Leading-form factorization

@dataclass
class Factorization:
    polynomial: Polynomial
    factors: List[Tuple[Polynomial, int]]
    unit: GaussianRational = ONE
    supported: bool = True
    verified: bool = False

    def product(self) -> Polynomial:
        result = Polynomial.constant(self.unit)
        for factor, multiplicity in self.factors:
            result = result * factor ** multiplicity
        return result

    def to_dict(self) -> Dict:
        return {
            "polynomial": str(self.polynomial),
            "factors": [[str(f), m] for f, m in self.factors],
            "unit": str(self.unit),
            "supported": self.supported,
            "verified": self.verified,
        }


def factor_leading_form(p: Polynomial) -> Factorization:
    """Split c*v^2 + d*w^(2e) as c*(v + q)(v - q) with q = sqrt(-d/c) * w^e.

    Anything else comes back unfactored with supported=False.
    """
    unfactored = Factorization(p, [(p, 1)], ONE, supported=False, verified=True)
    if len(p.terms) != 2:
        return unfactored
    (m1, c1), (m2, c2) = sorted(p.terms.items(), key=lambda item: [v.rank for v, _ in item[0]], reverse=True)
    for (mv, cv), (mw, cw) in (((m1, c1), (m2, c2)), ((m2, c2), (m1, c1))):
        if len(mv) != 1 or len(mw) != 1 or mv[0][1] != 2 or mw[0][1] % 2:
            continue
        root = (-cw / cv).sqrt()
        if root is None:
            continue
        v = Polynomial.variable(mv[0][0])
        q = Polynomial.variable(mw[0][0]) ** (mw[0][1] // 2) * root
        result = Factorization(p, [(v + q, 1), (v - q, 1)], cv)
        result.verified = result.product() == p
        return result
    return unfactored


def verify_factorization(p: Polynomial, factors: List[Tuple[Polynomial, int]],
                         unit: GaussianRational = ONE) -> Factorization:
    claimed = Factorization(p, list(factors), unit, supported=True)
    claimed.verified = claimed.product() == p
    if not claimed.verified:
        raise UnsupportedPatternError(f"claimed factorization does not multiply back to {p}")
    return claimed


# Wedges

@dataclass
class WedgeExpansion:
    k: int
    depth: int
    divisor: DivisorRecord
    weights: Dict[VariableId, int]
    coefficients: Dict[Tuple[int, int], Polynomial]
    series: Dict[VariableId, Polynomial] = field(default_factory=dict)
    replaced: Set[VariableId] = field(default_factory=set)

    def coefficient(self, u: int, v: int) -> Polynomial:
        return self.coefficients.get((u, v), Polynomial())

    def equations(self) -> List[int]:
        return sorted({u for u, _ in self.coefficients})

    def leading_renaming(self) -> Dict[VariableId, Polynomial]:
        """A_{n,w_n} -> a_n for every free series starting at s^{w_n}."""
        return {jet_var(v.family, v.primary, self.weights.get(v, 0)): Polynomial.variable(v)
                for v in self.series if v not in self.replaced}

    def expand(self, p: Polynomial) -> Dict[int, Polynomial]:
        """s-coefficients of an extra relation p(a, b, c) along the same series."""
        composed = substitute(p, self.series, truncate=(S, self.depth))
        return {power: coeff for power, coeff in collect(composed, S).items() if coeff}


def wedge_series(v: VariableId, start: int, depth: int) -> Polynomial:
    return sum((Polynomial.variable(jet_var(v.family, v.primary, p)) * Polynomial.variable(S) ** p
                for p in range(start, depth + 1)), Polynomial())


def expand_wedge(eq: SurfaceEquation, divisor: DivisorRecord, k: int, depth: int,
                 weights: Optional[Dict[VariableId, int]] = None,
                 zero: Iterable[VariableId] = (),
                 overrides: Optional[Dict[VariableId, Polynomial]] = None,
                 constant: Iterable[VariableId] = (),
                 equations: Optional[Iterable[int]] = None,
                 family: Optional[FamilySystem] = None,
                 extra: Iterable[VariableId] = ()) -> WedgeExpansion:
    """Substitute a_n -> sum_{p >= w_n} A_{n,p} s^p into the family equations.

    `overrides` replace whole series by expressions in other series, `s`
    and free symbols (normalizations, rewrites); `constant` variables keep only
    their s^0 coefficient; `zero` variables are dropped. `extra` variables get
    a series even when no selected equation uses them.
    """
    if depth < 1:
        raise JetspaceError("wedge depth must be at least 1", stage="jets")
    weights = dict(weights or {})
    overrides = dict(overrides or {})
    zero = set(zero)
    constant = set(constant)
    fs = family or family_system(eq, divisor, k)
    wanted = sorted(equations) if equations is not None else [u for u in sorted(fs.reduced) if u <= k]

    variables: Set[VariableId] = set(extra)
    for u in wanted:
        variables |= fs.reduced[u].variables()
    for expression in overrides.values():
        variables |= {v for v in expression.variables() if v.is_jet}

    series: Dict[VariableId, Polynomial] = {}
    for v in sorted(variables | set(weights)):
        if v in zero or v in overrides:
            continue
        if v in constant:
            series[v] = Polynomial.variable(jet_var(v.family, v.primary, weights.get(v, 0))) * \
                Polynomial.variable(S) ** weights.get(v, 0)
        else:
            series[v] = wedge_series(v, weights.get(v, 0), depth)
    for v in zero:
        series[v] = Polynomial()
    for v, expression in overrides.items():
        series[v] = substitute(expression, {w: p for w, p in series.items() if w not in overrides},
                               truncate=(S, depth))

    coefficients: Dict[Tuple[int, int], Polynomial] = {}
    for u in wanted:
        composed = substitute(fs.reduced[u], series, truncate=(S, depth))
        for power, coeff in collect(composed, S).items():
            if coeff:
                coefficients[(u, power)] = coeff
    return WedgeExpansion(k, depth, divisor, weights, coefficients, series, set(zero) | set(overrides))


def _modulo_zero(p: Polynomial, J: Iterable[VariableId]) -> Polynomial:
    killed = {v: Polynomial() for v in J}
    return substitute(p, killed) if killed else p


def extract_g_theta(we: WedgeExpansion, u: int, J: Iterable[VariableId] = ()) -> Tuple[int, Polynomial]:
    """First s-coefficient of equation u that survives setting J to zero."""
    J = list(J)
    for v in range(0, we.depth + 1):
        coeff = _modulo_zero(we.coefficient(u, v), J)
        if coeff:
            return v, coeff
    raise DepthExhaustedError(f"equation {u}: every coefficient up to s^{we.depth} vanishes; raise the depth")


def extract_next(we: WedgeExpansion, u: int, J: Iterable[VariableId] = ()) -> Tuple[int, Polynomial]:
    """The coefficient right after g_theta, needed when g_theta alone is degenerate."""
    theta, _ = extract_g_theta(we, u, J)
    if theta + 1 > we.depth:
        raise DepthExhaustedError(f"equation {u}: s^{theta + 1} lies beyond depth {we.depth}")
    return theta + 1, _modulo_zero(we.coefficient(u, theta + 1), J)


def coordinate_variable(family: str) -> VariableId:
    return aux_var(COORDINATE_OF[family])


def family_of_coordinate(name: str) -> str:
    return FAMILY_OF[name]
