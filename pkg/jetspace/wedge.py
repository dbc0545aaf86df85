"""
Wedge stage: dominant s-weights, leading systems and their refutation.

A wedge whose special arc is the generic arc of N_j and whose generic arc
lies in N_i substitutes series a_n(s) = sum_{p >= w_n} A_{n,p} s^p into the
family equations of E_i. Every s-coefficient must vanish. The weight layer
decides which monomials can carry the lowest s-order (the minimum has to be
attained at least twice); the algebra layer collects the first surviving
coefficients g_theta and shows that they have no admissible common zero.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import ceil, lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from jetspace.coeff_field import GaussianRational, ZERO, parse_gaussian
from jetspace.config import EngineBudget, status
from jetspace.errors import BudgetExceededError, CaseScriptError, DepthExhaustedError, JetspaceError
from jetspace.fourier_motzkin import (Constraint, LinearForm, equal, feasible, form_text, form_value,
                                      is_feasible, less, parse_constraint, parse_form, positivity,
                                      uncovered)
from jetspace.groebner import buchberger
from jetspace.jets import (S, DivisorRecord, FamilySystem, SurfaceEquation, expand_wedge, extract_g_theta,
                           extract_next, family_system)
from jetspace.multipoly import (GREVLEX, Polynomial, VariableId, WeightVector, aux_var, collect, evaluate,
                                parse_polynomial, parse_variable, substitute, weighted_order)

DEFAULT_DEPTH_CAP = 48
GRID_NUMERATORS = (0, 1, 2, 3)
GRID_DENOMINATORS = (1, 2, 3)


class Verdict(Enum):
    UNSAT = "unsat"
    SAT = "sat"
    INCONCLUSIVE = "inconclusive"


class BranchOutcome(Enum):
    CLOSED_MONOMIAL = "closed-monomial"
    CLOSED_REFUTED = "closed-refuted"
    CLOSED_WEIGHTS = "closed-weights"
    CLOSED_PROJECTIVE = "closed-projective"
    OPEN = "open"

    @property
    def closed(self) -> bool:
        return self is not BranchOutcome.OPEN


class ClosureKind(Enum):
    MONOMIAL = "monomial"
    REFUTE = "refute"
    PROJECTIVE = "projective"
    WEIGHTS = "weights"


class OrderKind(Enum):
    """How a branch fixes the s-order of one series."""
    EXACT = "exact"            # leading coefficient nonzero
    BOUND = "bound"            # lower bound only, leading coefficient may vanish
    NORMALIZED = "normalized"  # the series is s^w
    REWRITTEN = "rewritten"    # replaced by an expression in other series


# Weight layer

@dataclass(frozen=True)
class CandidateOrder:
    """One possible s-order of an equation: a linear form and how many monomials share it."""

    form: Tuple[Tuple[str, Fraction], ...]
    multiplicity: int

    @property
    def linear(self) -> LinearForm:
        return dict(self.form)

    @property
    def label(self) -> str:
        return form_text(self.linear)


def _frozen(form: LinearForm) -> Tuple[Tuple[str, Fraction], ...]:
    return tuple(sorted((name, Fraction(c)) for name, c in form.items() if c))


def _group(forms: Iterable[LinearForm]) -> List[CandidateOrder]:
    counts: Dict[Tuple[Tuple[str, Fraction], ...], int] = {}
    for form in forms:
        key = _frozen(form)
        counts[key] = counts.get(key, 0) + 1
    orders = [CandidateOrder(key, n) for key, n in counts.items()]
    return sorted(orders, key=lambda o: o.label)


@dataclass
class WeightConstraintSystem:
    constraints: List[Constraint] = field(default_factory=list)

    def extended(self, extra: Iterable[Constraint]) -> 'WeightConstraintSystem':
        return WeightConstraintSystem(self.constraints + list(extra))

    def is_consistent(self) -> bool:
        return is_feasible(self.constraints)

    def witness(self) -> Optional[Dict[str, Fraction]]:
        return feasible(self.constraints)

    def to_dict(self) -> Dict:
        return {"constraints": [str(c) for c in self.constraints]}


@dataclass
class WeightAlternative:
    """One way for equation u to attain its minimum: the attaining orders and the induced constraints."""

    u: int
    attaining: List[str]
    constraints: List[Constraint]


@dataclass
class DominantConfiguration:
    attaining: Dict[int, List[str]]
    system: WeightConstraintSystem
    witness: Dict[str, Fraction]

    def integral_witness(self) -> Dict[str, int]:
        """The witness scaled by a positive integer so every weight is integral."""
        if not self.witness:
            return {}
        scale = lcm(*(value.denominator for value in self.witness.values()))
        return {name: int(value * scale) for name, value in self.witness.items()}

    def to_dict(self) -> Dict:
        return {
            "attaining": {str(u): labels for u, labels in sorted(self.attaining.items())},
            "constraints": [str(c) for c in self.system.constraints],
            "witness": {name: str(value) for name, value in sorted(self.witness.items())},
        }


def default_symbols(source: DivisorRecord, target: DivisorRecord) -> List[str]:
    """Coefficients alive on the target family that vanish at s=0 on the source: mu_i <= n < mu_j."""
    names = []
    for family in 'abc':
        names.extend(f"{family}{n}" for n in range(target.mu_of(family), source.mu_of(family)))
    return names


@dataclass
class WedgeProblem:
    surface: SurfaceEquation
    source: DivisorRecord
    target: DivisorRecord
    k: int
    symbols: Optional[List[str]] = None
    nonzero: Optional[List[VariableId]] = None
    declared_forms: Dict[int, List[str]] = field(default_factory=dict)
    region: List[Constraint] = field(default_factory=list)
    depth_cap: int = DEFAULT_DEPTH_CAP
    _family: Optional[FamilySystem] = field(default=None, repr=False)

    def __post_init__(self):
        if self.k < 1:
            raise CaseScriptError("wedge truncation k must be positive")
        if self.symbols is None:
            self.symbols = default_symbols(self.source, self.target)
        if self.nonzero is None:
            self.nonzero = self.source.first_variables()
        self.declared_forms = {int(u): list(forms) for u, forms in self.declared_forms.items()}

    @property
    def family(self) -> FamilySystem:
        if self._family is None:
            self._family = family_system(self.surface, self.target, self.k)
        return self._family

    def equations(self) -> List[int]:
        return [u for u in sorted(self.family.reduced) if u <= self.k]

    def equation(self, u: int) -> Polynomial:
        if u not in self.family.reduced:
            raise CaseScriptError(f"no family equation f_{{{self.target.name},{u}}} at k={self.k}")
        return self.family.reduced[u]

    def base_constraints(self) -> List[Constraint]:
        return positivity(self.symbols) + list(self.region)

    def candidate_orders(self, u: int) -> List[CandidateOrder]:
        """Possible s-orders of equation u: declared forms, or one form per monomial of f_{iu}."""
        if u in self.declared_forms:
            return _group(parse_form(text) for text in self.declared_forms[u])
        forms = []
        for m in self.equation(u).terms:
            form: LinearForm = {}
            for v, e in m:
                name = str(v)
                if name in self.symbols:
                    form[name] = form.get(name, Fraction(0)) + e
            forms.append(form)
        return _group(forms)


def _alternatives(problem: WedgeProblem, u: int) -> List[WeightAlternative]:
    orders = problem.candidate_orders(u)
    found = []
    for size in range(1, len(orders) + 1):
        for chosen in combinations(orders, size):
            if sum(o.multiplicity for o in chosen) < 2:
                continue
            first = chosen[0].linear
            constraints = [equal(first, o.linear) for o in chosen[1:]]
            constraints += [less(first, o.linear) for o in orders if o not in chosen]
            found.append(WeightAlternative(u, [o.label for o in chosen], constraints))
    return found


def weight_constraints(problem: WedgeProblem, u: int) -> List[WeightAlternative]:
    """Feasible ways for f_{iu} to attain its minimal s-order at least twice."""
    base = problem.base_constraints()
    return [alt for alt in _alternatives(problem, u) if is_feasible(base + alt.constraints)]


def enumerate_configurations(problem: WedgeProblem, budget: Optional[EngineBudget] = None,
                             equations: Optional[Iterable[int]] = None,
                             cell: Sequence[Constraint] = (),
                             limit: Optional[int] = None) -> List[DominantConfiguration]:
    """All dominant configurations across `equations`, by branch and prune with exact feasibility.

    With `limit` the search stops once that many configurations are found.
    """
    budget = budget or EngineBudget()
    if not problem.symbols:
        return [DominantConfiguration({}, WeightConstraintSystem(), {})]
    wanted = sorted(equations) if equations is not None else problem.equations()
    choices = {u: _alternatives(problem, u) for u in wanted}
    ordering = sorted(wanted, key=lambda u: (len(choices[u]), u))
    base = problem.base_constraints() + list(cell)
    if not is_feasible(base):
        return []

    found: List[DominantConfiguration] = []
    explored = 0
    attaining: Dict[int, List[str]] = {}

    def visit(level: int, constraints: List[Constraint]):
        nonlocal explored
        if level == len(ordering):
            witness = feasible(constraints)
            found.append(DominantConfiguration(dict(attaining), WeightConstraintSystem(list(constraints)), witness))
            return
        u = ordering[level]
        for alt in choices[u]:
            if limit is not None and len(found) >= limit:
                return
            explored += 1
            if explored > budget.audit_nodes:
                raise BudgetExceededError(f"configuration search stopped after {explored - 1} branches",
                                          explored=explored - 1)
            combined = constraints + alt.constraints
            if not is_feasible(combined):
                continue
            attaining[u] = alt.attaining
            visit(level + 1, combined)
            del attaining[u]

    visit(0, base)
    status(f"{len(found)} dominant configuration(s) over f_{wanted} ({explored} branches)", "📊")
    return found


def attaining_sets(problem: WedgeProblem, witness: Dict[str, Fraction],
                   equations: Optional[Iterable[int]] = None) -> Dict[int, List[str]]:
    """Candidate orders reaching the minimum of each equation at a concrete weight point."""
    point = {name: Fraction(witness.get(name, 0)) for name in problem.symbols}
    result = {}
    for u in (sorted(equations) if equations is not None else problem.equations()):
        orders = problem.candidate_orders(u)
        values = {o.label: form_value(o.linear, point) for o in orders}
        low = min(values.values())
        result[u] = sorted(label for label, value in values.items() if value == low)
    return result


# Leading systems

@dataclass
class SeriesPlan:
    """Where each series starts and which series are replaced."""

    weights: Dict[VariableId, int] = field(default_factory=dict)
    kinds: Dict[VariableId, OrderKind] = field(default_factory=dict)
    overrides: Dict[VariableId, Polynomial] = field(default_factory=dict)
    zero: List[VariableId] = field(default_factory=list)
    constant: List[VariableId] = field(default_factory=list)

    def order_weights(self, variables: Iterable[VariableId]) -> WeightVector:
        table = {v: Fraction(self.weights.get(v, 0)) for v in variables if v != S}
        table[S] = Fraction(1)
        return WeightVector(table)

    def override_order(self, v: VariableId) -> int:
        expression = self.overrides[v]
        return int(ceil(weighted_order(expression, self.order_weights(expression.variables()))))

    def point(self) -> Dict[str, Fraction]:
        values = {str(v): Fraction(w) for v, w in self.weights.items()}
        for v in self.overrides:
            values[str(v)] = Fraction(self.override_order(v))
        return values

    def exact_variables(self) -> List[VariableId]:
        return [v for v, kind in self.kinds.items() if kind is OrderKind.EXACT]


@dataclass
class LeadingSystem:
    entries: List[Tuple[str, Polynomial]] = field(default_factory=list)
    thetas: Dict[int, int] = field(default_factory=dict)
    vanished: List[int] = field(default_factory=list)

    @property
    def polynomials(self) -> List[Polynomial]:
        return [p for _, p in self.entries if p]

    def to_dict(self) -> Dict:
        return {
            "entries": [{"label": label, "polynomial": str(p)} for label, p in self.entries],
            "thetas": {str(u): theta for u, theta in sorted(self.thetas.items())},
            "vanished": list(self.vanished),
        }


def _composed(p: Polynomial, plan: SeriesPlan) -> Polynomial:
    """p with zero and overridden series replaced at the level of jet symbols."""
    assignment = {v: Polynomial() for v in plan.zero}
    assignment.update(plan.overrides)
    return substitute(p, assignment) if assignment else p


def _leading_of_equation(problem: WedgeProblem, u: int, plan: SeriesPlan,
                         with_next: bool = False) -> Optional[Tuple[int, Polynomial, Optional[Polynomial]]]:
    composed = _composed(problem.equation(u), plan)
    if composed.is_zero():
        return None
    guess = int(ceil(weighted_order(composed, plan.order_weights(composed.variables()))))
    depth = max(1, guess + 2)
    while True:
        we = expand_wedge(problem.surface, problem.target, problem.k, depth, plan.weights, plan.zero,
                          plan.overrides, plan.constant, [u], problem.family)
        try:
            theta, g = extract_g_theta(we, u)
            following = extract_next(we, u)[1] if with_next else None
            break
        except DepthExhaustedError:
            if depth >= problem.depth_cap:
                raise
            depth = min(problem.depth_cap, depth + max(2, depth // 2))
    renaming = we.leading_renaming()
    renamed_next = substitute(following, renaming) if following is not None else None
    return theta, substitute(g, renaming), renamed_next


def _leading_of_relation(problem: WedgeProblem, relation: Polynomial, plan: SeriesPlan) -> Polynomial:
    composed = _composed(relation, plan)
    if composed.is_zero():
        return Polynomial()
    guess = int(ceil(weighted_order(composed, plan.order_weights(composed.variables()))))
    depth = max(1, guess + 2)
    while True:
        we = expand_wedge(problem.surface, problem.target, problem.k, depth, plan.weights, plan.zero,
                          plan.overrides, plan.constant, [], problem.family,
                          extra=[v for v in relation.variables() if v.is_jet])
        coefficients = we.expand(relation)
        if coefficients:
            return substitute(coefficients[min(coefficients)], we.leading_renaming())
        if depth >= problem.depth_cap:
            raise DepthExhaustedError(f"relation {relation}: no coefficient up to s^{depth}")
        depth = min(problem.depth_cap, depth + max(2, depth // 2))


def derive_leading_system(problem: WedgeProblem, plan: SeriesPlan, equations: Optional[Iterable[int]] = None,
                          target_relations: Sequence[Polynomial] = (),
                          source_equations: Sequence[Polynomial] = (),
                          next_for: Iterable[int] = ()) -> LeadingSystem:
    """g_theta of every selected family equation, leading coefficients of the target relations,
    optional (theta+1)-coefficients and the source equations on constant terms."""
    result = LeadingSystem()
    next_for = set(next_for)
    for u in (sorted(equations) if equations is not None else problem.equations()):
        leading = _leading_of_equation(problem, u, plan, with_next=u in next_for)
        if leading is None:
            result.vanished.append(u)
            continue
        theta, g, following = leading
        result.thetas[u] = theta
        result.entries.append((f"g{u}", g))
        if following is not None:
            result.entries.append((f"g{u}+1", following))
    for relation in target_relations:
        result.entries.append((f"rel {relation}", _leading_of_relation(problem, relation, plan)))
    for p in source_equations:
        result.entries.append((f"source {p}", p))
    return result


def leading_system(problem: WedgeProblem, cfg: DominantConfiguration,
                   source_equations: Sequence[Polynomial] = (),
                   equations: Optional[Iterable[int]] = None) -> List[Polynomial]:
    """g_theta_u at the configuration's witness weights, plus the source family equations."""
    weights = {parse_variable(name): w for name, w in cfg.integral_witness().items()}
    plan = SeriesPlan(weights, {v: OrderKind.EXACT for v in weights})
    wanted = equations if equations is not None else sorted(cfg.attaining)
    return derive_leading_system(problem, plan, wanted, source_equations=source_equations).polynomials


def tabulated_leading_form(problem: WedgeProblem, u: int, witness: Dict[str, Fraction]) -> Polynomial:
    """Terms of f_{iu} of minimal weight at the witness, read directly off the equation."""
    p = problem.equation(u)
    table = {v: Fraction(witness.get(str(v), 0)) for v in p.variables()}
    weights = WeightVector(table)
    low = weighted_order(p, weights)
    return Polynomial({m: c for m, c in p.terms.items() if weights.of_monomial(m) == low})


# Refutation

@dataclass
class RefutationCertificate:
    system: List[Polynomial]
    nonzero: List[Polynomial]
    verdict: Verdict = Verdict.INCONCLUSIVE
    substitutions: Dict[VariableId, Polynomial] = field(default_factory=dict)
    relations: List[Polynomial] = field(default_factory=list)
    exclusions: List[Polynomial] = field(default_factory=list)
    presolve: List[Tuple[VariableId, Polynomial]] = field(default_factory=list)
    basis: List[Polynomial] = field(default_factory=list)
    witness: Dict[VariableId, GaussianRational] = field(default_factory=dict)
    steps: int = 0
    unknown: Optional[str] = None
    note: str = ""

    def saturating_product(self) -> Polynomial:
        product = Polynomial.constant(1)
        for d in list(self.nonzero) + list(self.exclusions):
            product = product * d
        return product

    def to_dict(self) -> Dict:
        return {
            "system": [str(p) for p in self.system],
            "nonzero": [str(p) for p in self.nonzero],
            "substitutions": {str(v): str(p) for v, p in sorted(self.substitutions.items())},
            "relations": [str(p) for p in self.relations],
            "exclusions": [str(p) for p in self.exclusions],
            "saturating_product": str(self.saturating_product()),
            "presolve": [[str(v), str(p)] for v, p in self.presolve],
            "verdict": self.verdict.value,
            "basis": [str(b) for b in self.basis],
            "witness": {str(v): str(x) for v, x in sorted(self.witness.items())},
            "steps": self.steps,
            "unknown": self.unknown,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'RefutationCertificate':
        try:
            return cls(
                system=[parse_polynomial(p) for p in data["system"]],
                nonzero=[parse_polynomial(p) for p in data.get("nonzero", [])],
                verdict=Verdict(data["verdict"]),
                substitutions={parse_variable(v): parse_polynomial(p)
                               for v, p in data.get("substitutions", {}).items()},
                relations=[parse_polynomial(p) for p in data.get("relations", [])],
                exclusions=[parse_polynomial(p) for p in data.get("exclusions", [])],
                presolve=[(parse_variable(v), parse_polynomial(p)) for v, p in data.get("presolve", [])],
                basis=[parse_polynomial(p) for p in data.get("basis", [])],
                witness={parse_variable(v): parse_gaussian(x) for v, x in data.get("witness", {}).items()},
                steps=int(data.get("steps", 0)),
                unknown=data.get("unknown"),
                note=data.get("note", ""),
            )
        except (KeyError, ValueError) as error:
            raise CaseScriptError(f"malformed certificate: {error}")


def _linear_pivot(g: Polynomial) -> Optional[Tuple[VariableId, Polynomial]]:
    """A variable v with g = c*v + r, c a nonzero constant and v absent from r."""
    for v in sorted(g.variables(), reverse=True):
        if g.degree_in(v) != 1:
            continue
        parts = collect(g, v)
        c = parts[1]
        if c.is_constant():
            rest = parts.get(0, Polynomial())
            return v, rest.scale(-c.constant_coefficient().inverse())
    return None


def presolve(gens: Sequence[Polynomial], guards: Sequence[Polynomial]
             ) -> Tuple[List[Polynomial], List[Polynomial], List[Tuple[VariableId, Polynomial]]]:
    """Eliminate variables that appear linearly with a constant coefficient."""
    gens = [g for g in gens if g]
    guards = list(guards)
    log: List[Tuple[VariableId, Polynomial]] = []
    progress = True
    while progress:
        progress = False
        for g in gens:
            pick = _linear_pivot(g)
            if pick is None:
                continue
            v, expression = pick
            gens = [h for h in (substitute(h, {v: expression}) for h in gens if h is not g) if h]
            guards = [substitute(h, {v: expression}) for h in guards]
            log.append((v, expression))
            progress = True
            break
    return gens, guards, log


def _replay(log: Sequence[Tuple[VariableId, Polynomial]],
            point: Dict[VariableId, GaussianRational]) -> Dict[VariableId, GaussianRational]:
    full = dict(point)
    for v, expression in reversed(log):
        for w in expression.variables():
            full.setdefault(w, ZERO)
        full[v] = evaluate(expression, full)
    return full


def grid_values() -> List[GaussianRational]:
    """Gaussian rationals whose parts have numerator and denominator at most 3, smallest first."""
    reals = sorted({Fraction(sign * n, d) for n in GRID_NUMERATORS for d in GRID_DENOMINATORS for sign in (1, -1)},
                   key=lambda q: (abs(q), q.denominator, -q))
    values = [GaussianRational(re, im) for re in reals for im in reals]
    return sorted(values, key=lambda z: (abs(z.re) + abs(z.im), z.re.denominator + z.im.denominator,
                                         z.im != 0, -z.re, -z.im))


def search_witness(gens: Sequence[Polynomial], guards: Sequence[Polynomial],
                   node_budget: int) -> Tuple[Optional[Dict[VariableId, GaussianRational]], int]:
    """Depth-first grid search for a common zero of `gens` keeping every guard nonzero."""
    variables = set()
    for p in list(gens) + list(guards):
        variables |= p.variables()
    ordering = sorted(variables)
    position = {v: n for n, v in enumerate(ordering)}

    def ready(p: Polynomial) -> int:
        return max((position[v] for v in p.variables()), default=-1)

    checks: Dict[int, List[Tuple[Polynomial, bool]]] = {}
    for p in gens:
        checks.setdefault(ready(p), []).append((p, True))
    for p in guards:
        checks.setdefault(ready(p), []).append((p, False))

    point: Dict[VariableId, GaussianRational] = {}

    def passes(level: int) -> bool:
        for p, must_vanish in checks.get(level, []):
            value = evaluate(p, point)
            if must_vanish and value:
                return False
            if not must_vanish and not value:
                return False
        return True

    if not passes(-1):
        return None, 0
    values = grid_values()
    explored = 0

    def visit(level: int) -> bool:
        nonlocal explored
        if level == len(ordering):
            return True
        v = ordering[level]
        for value in values:
            explored += 1
            if explored > node_budget:
                return False
            point[v] = value
            if passes(level) and visit(level + 1):
                return True
        del point[v]
        return False

    found = visit(0)
    return (dict(point) if found else None), explored


def specialize(p: Polynomial, substitutions: Dict[VariableId, Polynomial]) -> Polynomial:
    """Apply substitutions until no substituted variable is left; they may refer to each other."""
    for _ in range(len(substitutions) + 1):
        if not p.variables() & set(substitutions):
            return p
        p = substitute(p, substitutions)
    raise CaseScriptError("substitutions refer to each other cyclically")


def homogeneity_weights(system: Sequence[Polynomial], unknowns: Sequence[Polynomial]) -> Optional[Dict[str, Fraction]]:
    """Positive weights on the unknowns making every polynomial weighted-homogeneous, if any exist.

    Variables other than the unknowns count with weight 0.
    """
    names = []
    for x in unknowns:
        if not (x.is_monomial() and len(x.variables()) == 1 and x.total_degree() == 1):
            raise CaseScriptError(f"projective unknown {x} is not a variable")
        names.append(str(next(iter(x.variables()))))
    constraints = positivity(names)
    for p in system:
        forms = []
        for m in p.terms:
            forms.append({str(v): Fraction(e) for v, e in m if str(v) in names})
        constraints += [equal(forms[0], other) for other in forms[1:]]
    return feasible(constraints)


def check_projective(system: Sequence[Polynomial], unknowns: Sequence[Polynomial],
                     substitutions: Dict[VariableId, Polynomial], relations: Sequence[Polynomial] = ()):
    """A specialization is usable only on the source variety and for a system homogeneous in the unknowns."""
    specialized = [specialize(p, substitutions) for p in system]
    for p, q in zip(system, specialized):
        if q.is_constant() and q:
            raise CaseScriptError(f"specialization leaves {p} as the nonzero constant {q}")
    unknown_vars = {v for x in unknowns for v in x.variables()}
    hit = unknown_vars & set(substitutions)
    if hit:
        raise CaseScriptError(f"projective unknowns may not be specialized: {sorted(map(str, hit))}")
    if homogeneity_weights([q for q in specialized if q] + list(relations), unknowns) is None:
        raise CaseScriptError("specialized system is not weighted-homogeneous in the unknowns")


def _decide(system: Sequence[Polynomial], nonzero: Sequence[Polynomial],
            substitutions: Dict[VariableId, Polynomial], relations: Sequence[Polynomial],
            exclusions: Sequence[Polynomial], budget: Optional[EngineBudget]) -> RefutationCertificate:
    budget = budget or EngineBudget()
    cert = RefutationCertificate(list(system), list(nonzero), Verdict.INCONCLUSIVE, dict(substitutions),
                                 list(relations), list(exclusions))
    original_gens = [specialize(p, substitutions) for p in system] + list(relations)
    original_guards = [specialize(p, substitutions) for p in list(nonzero) + list(exclusions)]
    gens, guards, log = presolve(original_gens, original_guards)
    cert.presolve = log

    if any(d.is_zero() for d in guards):
        cert.verdict = Verdict.UNSAT
        cert.basis = [Polynomial.constant(1)]
        cert.note = "a required nonzero factor vanishes after presolve"
        return cert

    factors = [d for d in guards if not d.is_constant()]
    markers = [aux_var('nz', n) for n in range(len(factors))]
    augmented = gens + [Polynomial.variable(u) * d - 1 for u, d in zip(markers, factors)]
    try:
        handle = buchberger(augmented, GREVLEX, budget)
    except BudgetExceededError as error:
        cert.steps = error.steps
        cert.note = f"budget exhausted: {error}"
        return cert
    cert.basis = handle.basis
    cert.steps = handle.steps
    if handle.is_unit():
        cert.verdict = Verdict.UNSAT
        return cert

    point, explored = search_witness(gens, guards, budget.audit_nodes)
    if point is None:
        cert.note = f"no grid witness in {explored} nodes"
        return cert
    full = _replay(log, point)
    for p in original_gens + original_guards:
        for v in p.variables():
            full.setdefault(v, ZERO)
    if all(not evaluate(p, full) for p in original_gens) and all(evaluate(d, full) for d in original_guards):
        cert.verdict = Verdict.SAT
        cert.witness = {v: x for v, x in full.items() if v in _variables(original_gens + original_guards)}
    else:
        cert.note = "grid point failed verification against the original system"
    return cert


def _variables(polys: Iterable[Polynomial]) -> set:
    found = set()
    for p in polys:
        found |= p.variables()
    return found


def refute(system: Sequence[Polynomial], nonzero: Sequence[Polynomial],
           budget: Optional[EngineBudget] = None) -> RefutationCertificate:
    """UNSAT when the system saturated by the product of `nonzero` is the unit ideal."""
    return _decide(system, nonzero, {}, [], [], budget)


def refute_with_specialization(system: Sequence[Polynomial], nonzero: Sequence[Polynomial],
                               substitutions: Dict[VariableId, Polynomial],
                               relations: Sequence[Polynomial] = (),
                               exclusions: Sequence[Polynomial] = (),
                               budget: Optional[EngineBudget] = None) -> RefutationCertificate:
    """refute after fixing parameters: substitutions, extra relations, and excluded factors."""
    return _decide(system, nonzero, substitutions, relations, exclusions, budget)


def refute_projective(system: Sequence[Polynomial], unknowns: Sequence[Polynomial],
                      substitutions: Dict[VariableId, Polynomial],
                      relations: Sequence[Polynomial] = (),
                      exclusions: Sequence[Polynomial] = (),
                      budget: Optional[EngineBudget] = None) -> List[RefutationCertificate]:
    """One certificate per homogeneous unknown, each assuming only that unknown is nonzero."""
    certificates = []
    for x in unknowns:
        cert = refute_with_specialization(system, [x], substitutions, relations, exclusions, budget)
        cert.unknown = str(x)
        certificates.append(cert)
    return certificates


def validate_certificate(cert: RefutationCertificate, budget: Optional[EngineBudget] = None) -> bool:
    """Recompute from the stored inputs and compare verdict, presolve log and basis."""
    again = _decide(cert.system, cert.nonzero, cert.substitutions, cert.relations, cert.exclusions, budget)
    if again.verdict is not cert.verdict:
        return False
    if [(str(v), str(p)) for v, p in again.presolve] != [(str(v), str(p)) for v, p in cert.presolve]:
        return False
    if cert.verdict is Verdict.UNSAT:
        return [str(b) for b in again.basis] == [str(b) for b in cert.basis]
    if cert.verdict is Verdict.SAT:
        gens = [specialize(p, cert.substitutions) for p in cert.system] + list(cert.relations)
        guards = [specialize(p, cert.substitutions) for p in list(cert.nonzero) + list(cert.exclusions)]
        try:
            return all(not evaluate(p, cert.witness) for p in gens) and \
                all(evaluate(d, cert.witness) for d in guards)
        except JetspaceError:
            return False
    return True


# Case scripts

def _polys(texts: Iterable[str]) -> List[Polynomial]:
    return [parse_polynomial(t) for t in texts]


@dataclass
class BranchScript:
    name: str
    closure: ClosureKind
    cell: List[str] = field(default_factory=list)
    weights: Dict[str, int] = field(default_factory=dict)
    bound: Dict[str, int] = field(default_factory=dict)
    normalize: Dict[str, int] = field(default_factory=dict)
    rewrite: Dict[str, str] = field(default_factory=dict)
    zero: List[str] = field(default_factory=list)
    constant: List[str] = field(default_factory=list)
    double_weights: bool = False
    equations: Optional[List[int]] = None
    target_relations: List[str] = field(default_factory=list)
    source_equations: List[str] = field(default_factory=list)
    extract_next: List[int] = field(default_factory=list)
    system: List[str] = field(default_factory=list)
    nonzero: Optional[List[str]] = None
    substitutions: Dict[str, str] = field(default_factory=dict)
    relations: List[str] = field(default_factory=list)
    exclusions: List[str] = field(default_factory=list)
    unknowns: List[str] = field(default_factory=list)
    expect: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.closure, str):
            try:
                self.closure = ClosureKind(self.closure)
            except ValueError:
                raise CaseScriptError(f"branch {self.name}: unknown closure {self.closure!r}")
        if self.closure is ClosureKind.PROJECTIVE and not self.unknowns:
            raise CaseScriptError(f"branch {self.name}: projective closure needs unknowns")
        if self.closure is ClosureKind.WEIGHTS and not self.equations:
            raise CaseScriptError(f"branch {self.name}: a weights closure must name its equations")
        specialized = self.substitutions or self.relations or self.exclusions
        if specialized and self.closure is not ClosureKind.PROJECTIVE:
            raise CaseScriptError(f"branch {self.name}: specializations are only allowed with a projective closure")
        if self.expect is not None and self.expect not in {o.value for o in BranchOutcome}:
            raise CaseScriptError(f"branch {self.name}: unknown expected outcome {self.expect!r}")

    def cell_constraints(self) -> List[Constraint]:
        return [parse_constraint(c) for c in self.cell]

    def plan(self) -> SeriesPlan:
        factor = 2 if self.double_weights else 1
        plan = SeriesPlan()
        for table, kind in ((self.weights, OrderKind.EXACT), (self.bound, OrderKind.BOUND)):
            for name, w in table.items():
                v = parse_variable(name)
                plan.weights[v] = int(w) * factor
                plan.kinds[v] = kind
        for name, w in self.normalize.items():
            v = parse_variable(name)
            plan.overrides[v] = Polynomial.variable(S) ** (int(w) * factor)
            plan.kinds[v] = OrderKind.NORMALIZED
        for name, text in self.rewrite.items():
            v = parse_variable(name)
            plan.overrides[v] = parse_polynomial(text)
            plan.kinds[v] = OrderKind.REWRITTEN
        plan.zero = [parse_variable(name) for name in self.zero]
        plan.constant = [parse_variable(name) for name in self.constant]
        return plan

    def to_dict(self) -> Dict:
        data = {"name": self.name, "closure": self.closure.value}
        for key in ("cell", "weights", "bound", "normalize", "rewrite", "zero", "constant", "target_relations",
                    "source_equations", "extract_next", "system", "substitutions", "relations", "exclusions",
                    "unknowns"):
            value = getattr(self, key)
            if value:
                data[key] = value
        if self.double_weights:
            data["double_weights"] = True
        if self.equations is not None:
            data["equations"] = self.equations
        if self.nonzero is not None:
            data["nonzero"] = self.nonzero
        if self.expect is not None:
            data["expect"] = self.expect
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'BranchScript':
        known = set(cls.__dataclass_fields__)
        stray = set(data) - known
        if stray:
            raise CaseScriptError(f"branch {data.get('name', '?')}: unknown fields {sorted(stray)}")
        if "name" not in data or "closure" not in data:
            raise CaseScriptError("branch needs a name and a closure")
        return cls(**data)


@dataclass
class AuditScript:
    equations: List[int]
    region: List[str] = field(default_factory=list)
    expect_configurations: Optional[int] = None

    def to_dict(self) -> Dict:
        data = {"equations": self.equations}
        if self.region:
            data["region"] = self.region
        if self.expect_configurations is not None:
            data["expect_configurations"] = self.expect_configurations
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'AuditScript':
        return cls(list(data["equations"]), list(data.get("region", [])), data.get("expect_configurations"))


@dataclass
class CaseScript:
    source: str
    target: str
    k: int
    branches: List[BranchScript]
    symbols: Optional[List[str]] = None
    forms: Dict[int, List[str]] = field(default_factory=dict)
    region: List[str] = field(default_factory=list)
    audit: Optional[AuditScript] = None
    note: str = ""

    def to_dict(self) -> Dict:
        data = {"source": self.source, "target": self.target, "k": self.k,
                "branches": [b.to_dict() for b in self.branches]}
        if self.symbols is not None:
            data["symbols"] = self.symbols
        if self.forms:
            data["forms"] = {str(u): forms for u, forms in sorted(self.forms.items())}
        if self.region:
            data["region"] = self.region
        if self.audit is not None:
            data["audit"] = self.audit.to_dict()
        if self.note:
            data["note"] = self.note
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'CaseScript':
        try:
            return cls(
                source=data["source"],
                target=data["target"],
                k=int(data["k"]),
                branches=[BranchScript.from_dict(b) for b in data.get("branches", [])],
                symbols=data.get("symbols"),
                forms={int(u): list(f) for u, f in data.get("forms", {}).items()},
                region=list(data.get("region", [])),
                audit=AuditScript.from_dict(data["audit"]) if data.get("audit") else None,
                note=data.get("note", ""),
            )
        except KeyError as error:
            raise CaseScriptError(f"case script missing field {error}")


def problem_for_case(surface: SurfaceEquation, source: DivisorRecord, target: DivisorRecord,
                     script: CaseScript) -> WedgeProblem:
    return WedgeProblem(surface, source, target, script.k, script.symbols, None, dict(script.forms),
                        [parse_constraint(c) for c in script.region])


# Running cases

@dataclass
class BranchReport:
    name: str
    outcome: BranchOutcome
    cell: List[str] = field(default_factory=list)
    system: Optional[LeadingSystem] = None
    nonzero: List[str] = field(default_factory=list)
    certificates: List[RefutationCertificate] = field(default_factory=list)
    configurations: Optional[int] = None
    detail: str = ""
    expected: Optional[str] = None

    @property
    def as_expected(self) -> bool:
        return self.expected is None or self.expected == self.outcome.value

    def to_dict(self) -> Dict:
        data = {"name": self.name, "outcome": self.outcome.value, "cell": self.cell, "detail": self.detail,
                "nonzero": self.nonzero, "certificates": [c.to_dict() for c in self.certificates]}
        if self.system is not None:
            data["system"] = self.system.to_dict()
        if self.configurations is not None:
            data["configurations"] = self.configurations
        if self.expected is not None:
            data["expected"] = self.expected
            data["as_expected"] = self.as_expected
        return data


@dataclass
class AuditReport:
    equations: List[int]
    configurations: List[DominantConfiguration] = field(default_factory=list)
    uncovered: List[List[str]] = field(default_factory=list)
    expected: Optional[int] = None
    complete: bool = True
    note: str = ""

    @property
    def covered(self) -> bool:
        return self.complete and not self.uncovered

    @property
    def as_expected(self) -> bool:
        return self.expected is None or self.expected == len(self.configurations)

    def to_dict(self) -> Dict:
        data = {"equations": self.equations, "configurations": [c.to_dict() for c in self.configurations],
                "count": len(self.configurations), "uncovered": self.uncovered, "covered": self.covered}
        if self.expected is not None:
            data["expected_count"] = self.expected
            data["as_expected"] = self.as_expected
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class CaseReport:
    source: str
    target: str
    branches: List[BranchReport] = field(default_factory=list)
    audit: Optional[AuditReport] = None

    @property
    def certified(self) -> bool:
        closed = bool(self.branches) and all(b.outcome.closed for b in self.branches)
        return closed and (self.audit is None or self.audit.covered)

    @property
    def verdict(self) -> str:
        return "certified" if self.certified else "open"

    def to_dict(self) -> Dict:
        data = {"source": self.source, "target": self.target, "verdict": self.verdict,
                "branches": [b.to_dict() for b in self.branches]}
        if self.audit is not None:
            data["audit"] = self.audit.to_dict()
        return data


def _check_cell(branch: BranchScript, plan: SeriesPlan):
    point = plan.point()
    for text, constraint in zip(branch.cell, branch.cell_constraints()):
        names = [name for name, _ in constraint.form if name]
        if names and all(name in point for name in names) and not constraint.holds(point):
            raise CaseScriptError(f"branch {branch.name}: weights {point} violate cell constraint {text}")


def _default_nonzero(problem: WedgeProblem, plan: SeriesPlan, system: LeadingSystem) -> List[Polynomial]:
    present = _variables(system.polynomials)
    chosen = [v for v in problem.nonzero if v in present]
    chosen += [v for v in plan.exact_variables() if v in present and v not in chosen]
    return [Polynomial.variable(v) for v in sorted(chosen)]


def _monomial_closure(system: LeadingSystem, nonzero: List[Polynomial]) -> Optional[str]:
    allowed = {next(iter(d.variables())) for d in nonzero if d.is_monomial() and len(d.variables()) == 1}
    for label, g in system.entries:
        if label.startswith('g') and g.is_monomial() and g.variables() <= allowed:
            return f"{label} = {g}"
    return None


def run_branch(problem: WedgeProblem, branch: BranchScript, budget: Optional[EngineBudget] = None) -> BranchReport:
    budget = budget or EngineBudget()
    report = BranchReport(branch.name, BranchOutcome.OPEN, list(branch.cell), expected=branch.expect)

    if branch.closure is ClosureKind.WEIGHTS:
        # an empty search only counts when the same equations admit configurations outside the cell
        stuck = [u for u in branch.equations if not weight_constraints(problem, u)]
        if stuck:
            report.detail = f"f_{stuck} cannot attain a minimum twice anywhere; the search is vacuous"
            return report
        try:
            if not enumerate_configurations(problem, budget, branch.equations, limit=1):
                report.detail = "no dominant configuration even without the cell; the search is vacuous"
                return report
            found = enumerate_configurations(problem, budget, branch.equations, branch.cell_constraints())
        except BudgetExceededError as error:
            report.detail = f"configuration search incomplete: {error}"
            return report
        report.configurations = len(found)
        if not found:
            report.outcome = BranchOutcome.CLOSED_WEIGHTS
            report.detail = "no dominant configuration inside the cell"
        else:
            report.detail = f"surviving configuration: {found[0].to_dict()['witness']}"
        return report

    plan = branch.plan()
    _check_cell(branch, plan)
    if branch.system:
        system = LeadingSystem([(f"e{n + 1}", p) for n, p in enumerate(_polys(branch.system))])
    else:
        system = derive_leading_system(problem, plan, branch.equations, _polys(branch.target_relations),
                                       _polys(branch.source_equations), branch.extract_next)
    report.system = system
    if branch.nonzero is not None:
        nonzero = _polys(branch.nonzero)
    else:
        nonzero = _default_nonzero(problem, plan, system)
    report.nonzero = [str(d) for d in nonzero]

    if branch.closure is ClosureKind.MONOMIAL:
        hit = _monomial_closure(system, nonzero)
        if hit:
            report.outcome = BranchOutcome.CLOSED_MONOMIAL
            report.detail = f"{hit} is a monomial in nonzero coefficients"
        else:
            report.detail = "no leading coefficient is a monomial in nonzero coefficients"
        return report

    substitutions = {parse_variable(v): parse_polynomial(p) for v, p in branch.substitutions.items()}
    if branch.closure is ClosureKind.REFUTE:
        cert = refute(system.polynomials, nonzero, budget)
        report.certificates = [cert]
        if cert.verdict is Verdict.UNSAT:
            report.outcome = BranchOutcome.CLOSED_REFUTED
        report.detail = f"verdict {cert.verdict.value}" + (f" ({cert.note})" if cert.note else "")
        return report

    unknowns = _polys(branch.unknowns)
    relations = _polys(branch.relations)
    check_projective(system.polynomials, unknowns, substitutions, relations)
    certificates = refute_projective(system.polynomials, unknowns, substitutions, relations,
                                     _polys(branch.exclusions), budget)
    report.certificates = certificates
    verdicts = {c.unknown: c.verdict.value for c in certificates}
    if all(c.verdict is Verdict.UNSAT for c in certificates):
        report.outcome = BranchOutcome.CLOSED_PROJECTIVE
        report.detail = "no nonzero projective solution"
    else:
        report.detail = f"verdicts per unknown: {verdicts}"
    return report


def audit_case(problem: WedgeProblem, script: CaseScript,
               budget: Optional[EngineBudget] = None) -> Optional[AuditReport]:
    """Enumerate configurations under the audit region and check they fall inside some branch cell."""
    if script.audit is None:
        return None
    audit = script.audit
    report = AuditReport(list(audit.equations), expected=audit.expect_configurations)
    region = [parse_constraint(c) for c in audit.region]
    try:
        report.configurations = enumerate_configurations(problem, budget, audit.equations, region)
    except BudgetExceededError as error:
        report.complete = False
        report.note = f"audit incomplete: {error}"
        return report
    cover = [b.cell_constraints() for b in script.branches]
    for cfg in report.configurations:
        for piece in uncovered(cfg.system.constraints, cover):
            report.uncovered.append([str(c) for c in piece])
    if not report.as_expected:
        report.note = (f"expected {audit.expect_configurations} configuration(s), "
                       f"found {len(report.configurations)}")
    return report


def run_noninclusion_case(problem: WedgeProblem, script: CaseScript,
                          budget: Optional[EngineBudget] = None, audit: bool = True) -> CaseReport:
    """Close every scripted branch; the case is certified only when all of them close
    and the audit, when one runs, finds every configuration inside some branch cell."""
    budget = budget or EngineBudget()
    report = CaseReport(script.source, script.target)
    status(f"Wedge case N_{script.source} not in N_{script.target}: {len(script.branches)} branch(es)")
    for branch in script.branches:
        outcome = run_branch(problem, branch, budget)
        icon = "✅" if outcome.outcome.closed else "❌"
        status(f"  branch {branch.name}: {outcome.outcome.value} ({outcome.detail})", icon)
        if not outcome.as_expected:
            status(f"  branch {branch.name}: expected {outcome.expected}", "⚠️")
        report.branches.append(outcome)
    if audit:
        report.audit = audit_case(problem, script, budget)
        if report.audit is not None:
            icon = "📊" if report.audit.covered else "⚠️"
            status(f"  audit over f_{report.audit.equations}: {len(report.audit.configurations)} configuration(s), "
                   f"{len(report.audit.uncovered)} uncovered piece(s)", icon)
            if not report.audit.as_expected:
                status(f"  audit: {report.audit.note}", "⚠️")
    status(f"Case ({script.source},{script.target}): {report.verdict}", "🎯")
    return report
