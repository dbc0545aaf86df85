"""
Buchberger engine over Q(i).

Polynomials are converted into a dense-exponent ring (a tuple of exponents
per monomial, generators sorted from most to least significant) for the
duration of a computation and converted back afterwards. The algorithm is
the improved Buchberger with the Gebauer-Moeller criteria and the normal
selection strategy; the result is the reduced, monic basis sorted by leading
monomial.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from jetspace.coeff_field import GaussianRational, ONE, ZERO
from jetspace.config import EngineBudget
from jetspace.errors import (BudgetExceededError, EmptyExclusionSetError, JetspaceError,
                             UnitIdealError)
from jetspace.jets import (DivisorRecord, FamilySystem, SurfaceEquation, expand_jet, factor_leading_form,
                           family_system, leading_derivatives)
from jetspace.multipoly import (GREVLEX, MonomialOrder, Polynomial, VariableId, aux_var, jet_var)

Exponents = Tuple[int, ...]
Dense = Dict[Exponents, GaussianRational]

EXPONENT_SEARCH_CAP = 64


class _Ring:
    """Dense exponent ring over a fixed, ordered list of generators."""

    def __init__(self, variables: Iterable[VariableId], order: MonomialOrder):
        self.order = order
        self.gens: List[VariableId] = sorted(set(variables), key=order.variable_key, reverse=True)
        self.index = {v: position for position, v in enumerate(self.gens)}
        self.n = len(self.gens)
        if order.kind == 'block':
            self.split = sum(1 for v in self.gens if v in order.block)
        else:
            self.split = 0
        self.zero = (0,) * self.n

    def key(self, m: Exponents):
        if self.order.kind == 'lex':
            return m
        if self.order.kind == 'grevlex':
            return (sum(m), tuple(-e for e in reversed(m)))
        head, tail = m[:self.split], m[self.split:]
        return ((sum(head), tuple(-e for e in reversed(head))),
                (sum(tail), tuple(-e for e in reversed(tail))))

    def to_dense(self, p: Polynomial) -> Dense:
        dense = {}
        for m, c in p.terms.items():
            exps = [0] * self.n
            for v, e in m:
                exps[self.index[v]] = e
            dense[tuple(exps)] = c
        return dense

    def from_dense(self, d: Dense) -> Polynomial:
        terms = {}
        order = sorted(range(len(self.gens)), key=lambda i: self.gens[i].rank)
        for exps, c in d.items():
            terms[tuple((self.gens[i], exps[i]) for i in order if exps[i])] = c
        return Polynomial(terms)

    def lm(self, d: Dense) -> Exponents:
        return max(d, key=self.key)


def _mono_mul(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


def _mono_div(a: Exponents, b: Exponents) -> Optional[Exponents]:
    out = tuple(x - y for x, y in zip(a, b))
    if any(e < 0 for e in out):
        return None
    return out


def _mono_lcm(a: Exponents, b: Exponents) -> Exponents:
    return tuple(max(x, y) for x, y in zip(a, b))


def _divides(a: Exponents, b: Exponents) -> bool:
    return all(x <= y for x, y in zip(a, b))


class _Counter:
    def __init__(self, budget: EngineBudget):
        self.budget = budget
        self.steps = 0

    def tick(self, basis_size: int = 0):
        self.steps += 1
        if self.steps > self.budget.steps:
            raise BudgetExceededError(f"reduction step budget {self.budget.steps} exceeded",
                                      steps=self.steps, basis_size=basis_size)
        if basis_size > self.budget.max_basis:
            raise BudgetExceededError(f"basis size cap {self.budget.max_basis} exceeded",
                                      steps=self.steps, basis_size=basis_size)


def _monic(ring: _Ring, d: Dense) -> Dense:
    c = d[ring.lm(d)]
    if c == ONE:
        return d
    inv = c.inverse()
    return {m: x * inv for m, x in d.items()}


def _rem(ring: _Ring, p: Dense, divisors: Sequence[Tuple[Exponents, Dense]], counter: _Counter) -> Dense:
    """Full reduction of p by monic divisors given as (leading monomial, poly)."""
    p = dict(p)
    remainder: Dense = {}
    while p:
        m = ring.lm(p)
        c = p[m]
        for lm_g, g in divisors:
            quotient = _mono_div(m, lm_g)
            if quotient is None:
                continue
            counter.tick()
            for mg, cg in g.items():
                mm = _mono_mul(mg, quotient)
                value = p.get(mm, ZERO) - c * cg
                if value:
                    p[mm] = value
                else:
                    p.pop(mm, None)
            break
        else:
            remainder[m] = c
            del p[m]
    return remainder


def _spoly(ring: _Ring, f: Dense, lm_f: Exponents, g: Dense, lm_g: Exponents) -> Dense:
    lcm = _mono_lcm(lm_f, lm_g)
    mf = _mono_div(lcm, lm_f)
    mg = _mono_div(lcm, lm_g)
    out: Dense = {}
    for m, c in f.items():
        out[_mono_mul(m, mf)] = c
    for m, c in g.items():
        mm = _mono_mul(m, mg)
        value = out.get(mm, ZERO) - c
        if value:
            out[mm] = value
        else:
            out.pop(mm, None)
    return out


def _freeze(d: Dense) -> frozenset:
    return frozenset(d.items())


def _buchberger(ring: _Ring, polys: List[Dense], counter: _Counter) -> List[Dense]:
    f: List[Dense] = [p for p in polys if p]
    if not f:
        return []

    # inter-reduce the input first
    f1 = [_monic(ring, p) for p in f]
    while True:
        f = f1
        f1 = []
        for position, p in enumerate(f):
            r = _rem(ring, p, [(ring.lm(q), q) for q in f[:position]], counter)
            if r:
                f1.append(_monic(ring, r))
        if [_freeze(p) for p in f] == [_freeze(p) for p in f1]:
            break

    lms: List[Exponents] = [ring.lm(p) for p in f]
    seen: Dict[frozenset, int] = {_freeze(p): position for position, p in enumerate(f)}

    def update(G: Set[int], B: Set[Tuple[int, int]], ih: int):
        mh = lms[ih]
        C = set(G)
        D = set()
        while C:
            ig = C.pop()
            mg = lms[ig]
            lcm_hg = _mono_lcm(mh, mg)

            def lcm_divides(ip):
                return _divides(_mono_lcm(mh, lms[ip]), lcm_hg)

            if _mono_mul(mh, mg) == lcm_hg or (
                    not any(lcm_divides(ipx) for ipx in C) and
                    not any(lcm_divides(pr[1]) for pr in D)):
                D.add((ih, ig))
        E = set()
        while D:
            ih2, ig = D.pop()
            if _mono_mul(mh, lms[ig]) != _mono_lcm(mh, lms[ig]):
                E.add((ih2, ig))
        B_new = set()
        while B:
            ig1, ig2 = B.pop()
            lcm12 = _mono_lcm(lms[ig1], lms[ig2])
            if not _divides(mh, lcm12) or _mono_lcm(lms[ig1], mh) == lcm12 or _mono_lcm(lms[ig2], mh) == lcm12:
                B_new.add((ig1, ig2))
        B_new |= E
        G_new = {ig for ig in G if not _divides(mh, lms[ig])}
        G_new.add(ih)
        return G_new, B_new

    F = set(range(len(f)))
    G: Set[int] = set()
    CP: Set[Tuple[int, int]] = set()
    while F:
        ih = min(F, key=lambda position: ring.key(lms[position]))
        F.remove(ih)
        G, CP = update(G, CP, ih)

    while CP:
        pair = min(CP, key=lambda pr: (ring.key(_mono_lcm(lms[pr[0]], lms[pr[1]])), pr))
        CP.remove(pair)
        ig1, ig2 = pair
        h = _spoly(ring, f[ig1], lms[ig1], f[ig2], lms[ig2])
        divisors = [(lms[g], f[g]) for g in sorted(G, key=lambda g: ring.key(lms[g]))]
        h = _rem(ring, h, divisors, counter)
        counter.tick(len(G))
        if not h:
            continue
        h = _monic(ring, h)
        frozen = _freeze(h)
        if frozen not in seen:
            seen[frozen] = len(f)
            f.append(h)
            lms.append(ring.lm(h))
        G, CP = update(G, CP, seen[frozen])

    reduced = []
    for ig in G:
        others = [(lms[g], f[g]) for g in G if g != ig]
        r = _rem(ring, f[ig], others, counter)
        if r:
            reduced.append(_monic(ring, r))
    reduced.sort(key=lambda d: ring.key(ring.lm(d)), reverse=True)
    return reduced


# Public API

@dataclass
class IdealHandle:
    """Generators plus a cached reduced Gröbner basis for `order`."""

    generators: List[Polynomial]
    order: MonomialOrder = GREVLEX
    basis: Optional[List[Polynomial]] = None
    ambient: Optional[Tuple[VariableId, ...]] = None
    steps: int = 0

    def __post_init__(self):
        self.generators = [g for g in self.generators if g]

    def variables(self) -> Tuple[VariableId, ...]:
        if self.ambient is not None:
            return self.ambient
        found = set()
        for g in self.generators:
            found |= g.variables()
        return tuple(sorted(found))

    def require_basis(self, budget: Optional[EngineBudget] = None) -> List[Polynomial]:
        if self.basis is None:
            computed = buchberger(self.generators, self.order, budget)
            self.basis = computed.basis
            self.steps = computed.steps
        return self.basis

    def is_unit(self) -> bool:
        basis = self.require_basis()
        return len(basis) == 1 and basis[0].is_constant() and not basis[0].is_zero()

    def to_dict(self) -> Dict:
        return {
            "generators": [str(g) for g in self.generators],
            "order": self.order.to_dict(),
            "basis": None if self.basis is None else [str(b) for b in self.basis],
        }


@dataclass
class SaturationResult:
    ideal: IdealHandle
    exponent_bound: Optional[int]
    aux: VariableId = field(default_factory=lambda: aux_var('u'))


def buchberger(gens: List[Polynomial], order: MonomialOrder = GREVLEX,
               budget: Optional[EngineBudget] = None) -> IdealHandle:
    counter = _Counter(budget or EngineBudget())
    variables = set()
    for g in gens:
        variables |= g.variables()
    ring = _Ring(variables, order)
    dense = [ring.to_dense(g) for g in gens if g]
    basis = _buchberger(ring, dense, counter)
    handle = IdealHandle(list(gens), order, [ring.from_dense(b) for b in basis])
    handle.steps = counter.steps
    return handle


def reduce_polynomial(p: Polynomial, basis: List[Polynomial], order: MonomialOrder = GREVLEX,
                      budget: Optional[EngineBudget] = None) -> Polynomial:
    counter = _Counter(budget or EngineBudget())
    variables = set(p.variables())
    for b in basis:
        variables |= b.variables()
    ring = _Ring(variables, order)
    divisors = []
    for b in basis:
        d = _monic(ring, ring.to_dense(b))
        divisors.append((ring.lm(d), d))
    return ring.from_dense(_rem(ring, ring.to_dense(p), divisors, counter))


def normal_form(p: Polynomial, I: IdealHandle, budget: Optional[EngineBudget] = None) -> Polynomial:
    return reduce_polynomial(p, I.require_basis(budget), I.order, budget)


def is_member(p: Polynomial, I: IdealHandle, budget: Optional[EngineBudget] = None) -> bool:
    return normal_form(p, I, budget).is_zero()


def is_unit_ideal(I: IdealHandle) -> bool:
    return I.is_unit()


def verify_basis(basis: List[Polynomial], order: MonomialOrder = GREVLEX) -> bool:
    """Buchberger criterion: every S-polynomial of the basis reduces to zero."""
    variables = set()
    for b in basis:
        variables |= b.variables()
    ring = _Ring(variables, order)
    counter = _Counter(EngineBudget())
    dense = [_monic(ring, ring.to_dense(b)) for b in basis]
    divisors = [(ring.lm(d), d) for d in dense]
    for a in range(len(dense)):
        for b in range(a + 1, len(dense)):
            s = _spoly(ring, dense[a], divisors[a][0], dense[b], divisors[b][0])
            if _rem(ring, s, divisors, counter):
                return False
    return True


def same_ideal(I: IdealHandle, J: IdealHandle) -> bool:
    return [str(b) for b in I.require_basis()] == [str(b) for b in J.require_basis()]


def eliminate(I: IdealHandle, kill: Iterable[VariableId], budget: Optional[EngineBudget] = None) -> IdealHandle:
    """I intersected with the subring free of `kill`, via a block order."""
    kill = frozenset(kill)
    if not kill:
        I.require_basis(budget)
        return I
    handle = buchberger(I.generators, MonomialOrder('block', kill), budget)
    kept = [b for b in handle.basis if not (b.variables() & kill)]
    ambient = None if I.ambient is None else tuple(v for v in I.ambient if v not in kill)
    result = IdealHandle(kept, GREVLEX, None, ambient)
    # the kept part is already a reduced basis for the restricted grevlex order
    result.basis = sorted(kept, key=lambda b: GREVLEX.key(b.leading_term(GREVLEX)[0]), reverse=True)
    result.steps = handle.steps
    return result


def _fresh_aux(I: IdealHandle, extra: Iterable[Polynomial], name: str) -> VariableId:
    used = set(I.variables())
    for p in extra:
        used |= p.variables()
    candidate = aux_var(name)
    suffix = 0
    while candidate in used:
        suffix += 1
        candidate = aux_var(name, suffix)
    return candidate


def saturate(I: IdealHandle, d: Polynomial, budget: Optional[EngineBudget] = None) -> SaturationResult:
    """(I : d^inf) via u*d - 1 and elimination of u; N found by membership search."""
    if d.is_zero():
        raise JetspaceError("cannot saturate by the zero polynomial", stage="groebner")
    if d.is_constant():
        I.require_basis(budget)
        return SaturationResult(I, 0)
    u = _fresh_aux(I, [d], 'u')
    augmented = IdealHandle(list(I.generators) + [Polynomial.variable(u) * d - 1], I.order, None, None)
    sat = eliminate(augmented, [u], budget)
    if I.ambient is not None:
        sat.ambient = I.ambient
    return SaturationResult(sat, saturation_exponent(I, sat, d, budget), u)


def saturation_exponent(I: IdealHandle, sat: IdealHandle, d: Polynomial,
                        budget: Optional[EngineBudget] = None) -> Optional[int]:
    """Smallest N <= 64 with d^N * g in I for every basis element g of sat."""
    I.require_basis(budget)
    worst = 0
    for g in sat.require_basis(budget):
        if is_member(g, I, budget):
            continue
        power = d
        for n in range(1, EXPONENT_SEARCH_CAP + 1):
            if is_member(power * g, I, budget):
                worst = max(worst, n)
                break
            power = power * d
        else:
            return None
    return worst


def ideal_sum(I: IdealHandle, extra: Iterable[Polynomial]) -> IdealHandle:
    return IdealHandle(list(I.generators) + list(extra), I.order, None, I.ambient)


def ideal_product_generators(gens: Sequence[Polynomial]) -> Polynomial:
    return reduce(lambda a, b: a * b, gens, Polynomial.constant(1))


def intersect(I: IdealHandle, J: IdealHandle, budget: Optional[EngineBudget] = None) -> IdealHandle:
    """I ∩ J = (t*I + (1 - t)*J) ∩ k[x]."""
    t = _fresh_aux(I, J.generators, 'w')
    tp = Polynomial.variable(t)
    gens = [tp * g for g in I.generators] + [(1 - tp) * g for g in J.generators]
    result = eliminate(IdealHandle(gens, I.order), [t], budget)
    result.ambient = I.ambient
    return result


def exact_divide(p: Polynomial, q: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
    """p / q when q divides p; raises otherwise."""
    if q.is_zero():
        raise JetspaceError("division by the zero polynomial", stage="groebner")
    variables = set(p.variables()) | set(q.variables())
    ring = _Ring(variables, order)
    dp, dq = ring.to_dense(p), ring.to_dense(q)
    lm_q = ring.lm(dq)
    inv = dq[lm_q].inverse()
    quotient: Dense = {}
    while dp:
        m = ring.lm(dp)
        step = _mono_div(m, lm_q)
        if step is None:
            raise JetspaceError(f"{q} does not divide {p}", stage="groebner")
        c = dp[m] * inv
        quotient[step] = quotient.get(step, ZERO) + c
        for mq, cq in dq.items():
            mm = _mono_mul(mq, step)
            value = dp.get(mm, ZERO) - c * cq
            if value:
                dp[mm] = value
            else:
                dp.pop(mm, None)
    return ring.from_dense(quotient)


def ideal_quotient(I: IdealHandle, f: Polynomial, budget: Optional[EngineBudget] = None) -> IdealHandle:
    """(I : f) = (1/f) * (I ∩ (f))."""
    meet = intersect(I, IdealHandle([f], I.order), budget)
    gens = [exact_divide(g, f) for g in meet.require_basis(budget)]
    result = IdealHandle(gens, I.order, None, I.ambient)
    result.require_basis(budget)
    return result


def saturate_by_quotients(I: IdealHandle, d: Polynomial, budget: Optional[EngineBudget] = None,
                          max_rounds: int = EXPONENT_SEARCH_CAP) -> IdealHandle:
    """Iterated colon I : d : d : ... until the basis stops changing."""
    current = IdealHandle(list(I.generators), I.order, None, I.ambient)
    current.require_basis(budget)
    for _ in range(max_rounds):
        following = ideal_quotient(current, d, budget)
        if same_ideal(current, following):
            return following
        current = following
    raise BudgetExceededError(f"iterated colon did not stabilize in {max_rounds} rounds")


def distinguished_ideal(I: IdealHandle, g_j: Polynomial, S_j: List[Polynomial],
                        budget: Optional[EngineBudget] = None) -> IdealHandle:
    """saturate(I + (g_j), prod S_j): contains g_j and avoids every element of S_j."""
    if not S_j:
        raise EmptyExclusionSetError("distinguished ideal needs a nonempty exclusion set S_j")
    return saturate(ideal_sum(I, [g_j]), ideal_product_generators(S_j), budget).ideal


def ideal_dimension(I: IdealHandle, budget: Optional[EngineBudget] = None) -> int:
    """Krull dimension from the largest variable set containing no leading monomial."""
    graded = I if I.order == GREVLEX else IdealHandle(I.generators, GREVLEX, None, I.ambient)
    basis = graded.require_basis(budget)
    if graded.is_unit():
        raise UnitIdealError("the unit ideal has no dimension")
    universe = list(I.variables())
    leading_supports = []
    for b in basis:
        m, _ = b.leading_term(GREVLEX)
        leading_supports.append(frozenset(v for v, _ in m))
    best = 0

    def extend(chosen: List[VariableId], start: int):
        nonlocal best
        best = max(best, len(chosen))
        if len(chosen) + (len(universe) - start) <= best:
            return
        for position in range(start, len(universe)):
            trial = chosen + [universe[position]]
            trial_set = frozenset(trial)
            if any(support <= trial_set for support in leading_supports):
                continue
            extend(trial, position + 1)

    extend([], 0)
    return best


def ideal_height(I: IdealHandle, budget: Optional[EngineBudget] = None) -> int:
    return len(I.variables()) - ideal_dimension(I, budget)


# Family ideals of a divisor

@dataclass
class TildeCheck:
    """I_ik against the elimination surrogate of the full jet ideal at bound K."""

    family: IdealHandle
    surrogate: IdealHandle
    bound: int
    contains_family: bool
    localized: Dict[str, bool] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.contains_family and all(self.localized.values())

    def to_dict(self) -> Dict:
        return {"bound": self.bound, "contains_family": self.contains_family,
                "localized": dict(sorted(self.localized.items())), "holds": self.holds}


def family_ideal(fs: FamilySystem) -> IdealHandle:
    """I_ik inside R_k: killed coefficients plus f_{i,o_i}..f_{i,o_ik}."""
    return IdealHandle(fs.ideal_generators(), GREVLEX, None, tuple(fs.ring_variables()))


def tilde_ideal_surrogate(eq: SurfaceEquation, d: DivisorRecord, k: int, K: int,
                          budget: Optional[EngineBudget] = None) -> TildeCheck:
    """(f_1..f_K + killed coefficients) ∩ R_k, compared with I_ik.

    Series carry K coefficients so f_1..f_K are complete; every variable of
    index above k is eliminated. The two ideals must agree after inverting
    each nonzero leading derivative.
    """
    fs = family_system(eq, d, k)
    if K < fs.o_ik:
        raise JetspaceError(f"surrogate bound K={K} is below o_ik={fs.o_ik}", stage="groebner")
    full = expand_jet(eq, K, K)
    gens = [Polynomial.variable(v) for v in d.vanishing_variables()] + [f for f in full.equations if f]
    above = [jet_var(family, n) for family in 'abc' for n in range(k + 1, K + 1)]
    surrogate = eliminate(IdealHandle(gens), above, budget)
    surrogate.ambient = tuple(fs.ring_variables())
    family = family_ideal(fs)
    contains = all(is_member(g, surrogate, budget) for g in family.generators)
    localized = {}
    for derivative in leading_derivatives(fs):
        if derivative.is_zero():
            continue
        left = saturate(family, derivative, budget).ideal
        right = saturate(surrogate, derivative, budget).ideal
        localized[str(derivative)] = same_ideal(left, right)
    return TildeCheck(family, surrogate, K, contains, localized)


def family_distinguished_ideals(fs: FamilySystem, budget: Optional[EngineBudget] = None) -> Dict[str, IdealHandle]:
    """One distinguished ideal per irreducible factor of f_{i,o_i}.

    The nonzero leading derivatives play the role of the linear coefficients;
    S_j keeps those outside (g_j).
    """
    factorization = factor_leading_form(fs.reduced[fs.o_i])
    I = family_ideal(fs)
    derivatives = [p for p in leading_derivatives(fs) if p]
    ideals = {}
    for g, _ in factorization.factors:
        principal = IdealHandle([g])
        S_j = [p for p in derivatives if not is_member(p, principal, budget)]
        ideals[str(g)] = distinguished_ideal(I, g, S_j, budget)
    return ideals
