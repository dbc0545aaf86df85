"""
Exact linear feasibility over Q for weight constraints.

Constraints are `form rel 0` with rel one of `==`, `<=`, `<`; forms map
symbol names to Fractions, with the constant stored under the empty key.
Feasibility is decided by Fourier-Motzkin elimination (equalities are
substituted first) and a witness is rebuilt by back-substitution.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import regex

from jetspace.errors import JetspaceError
from jetspace.multipoly import parse_polynomial

LinearForm = Dict[str, Fraction]
CONSTANT = ''

_RELATION = regex.compile(r'(==|<=|>=|<|>|=)')


def form_add(a: LinearForm, b: LinearForm, scale: Fraction = Fraction(1)) -> LinearForm:
    out = dict(a)
    for name, c in b.items():
        value = out.get(name, Fraction(0)) + scale * c
        if value:
            out[name] = value
        else:
            out.pop(name, None)
    return out


def form_scale(a: LinearForm, scale: Fraction) -> LinearForm:
    if not scale:
        return {}
    return {name: c * scale for name, c in a.items()}


def form_value(a: LinearForm, point: Dict[str, Fraction]) -> Fraction:
    return sum((c * (Fraction(1) if name == CONSTANT else point[name]) for name, c in a.items()), Fraction(0))


def form_variables(a: LinearForm) -> List[str]:
    return sorted(name for name in a if name != CONSTANT)


def form_text(a: LinearForm) -> str:
    pieces = []
    for name in form_variables(a) + ([CONSTANT] if CONSTANT in a else []):
        c = a[name]
        body = name if name else ""
        if name and c == 1:
            piece = body
        elif name and c == -1:
            piece = "-" + body
        elif name:
            piece = f"{c}*{body}"
        else:
            piece = str(c)
        pieces.append(piece)
    if not pieces:
        return "0"
    text = pieces[0]
    for piece in pieces[1:]:
        text += piece if piece.startswith('-') else "+" + piece
    return text


def parse_form(text: str) -> LinearForm:
    poly = parse_polynomial(text)
    form: LinearForm = {}
    for m, c in poly.terms.items():
        if not c.is_real():
            raise JetspaceError(f"weight forms need rational coefficients: {text!r}", stage="wedge")
        if not m:
            form[CONSTANT] = c.re
        elif len(m) == 1 and m[0][1] == 1:
            form[str(m[0][0])] = c.re
        else:
            raise JetspaceError(f"weight form is not linear: {text!r}", stage="wedge")
    return form


@dataclass(frozen=True)
class Constraint:
    form: Tuple[Tuple[str, Fraction], ...]
    rel: str

    @classmethod
    def make(cls, form: LinearForm, rel: str) -> 'Constraint':
        if rel not in ('==', '<=', '<'):
            raise JetspaceError(f"unknown relation {rel!r}", stage="wedge")
        return cls(tuple(sorted((n, Fraction(c)) for n, c in form.items() if c)), rel)

    @property
    def linear(self) -> LinearForm:
        return dict(self.form)

    def is_homogeneous(self) -> bool:
        return all(name != CONSTANT for name, _ in self.form)

    def holds(self, point: Dict[str, Fraction]) -> bool:
        value = form_value(self.linear, point)
        if self.rel == '==':
            return value == 0
        if self.rel == '<=':
            return value <= 0
        return value < 0

    def negate(self) -> List['Constraint']:
        """Disjunction equivalent to the negation."""
        form = self.linear
        if self.rel == '==':
            return [Constraint.make(form, '<'), Constraint.make(form_scale(form, Fraction(-1)), '<')]
        if self.rel == '<':
            return [Constraint.make(form_scale(form, Fraction(-1)), '<=')]
        return [Constraint.make(form_scale(form, Fraction(-1)), '<')]

    def normalized(self) -> 'Constraint':
        form = self.linear
        names = form_variables(form)
        if not names:
            return self
        lead = form[names[0]]
        scale = 1 / abs(lead)
        if self.rel == '==' and lead < 0:
            scale = -scale
        return Constraint.make(form_scale(form, scale), self.rel)

    def __str__(self):
        # print as lhs rel rhs with positive coefficients on both sides
        form = self.linear
        lhs = {n: c for n, c in form.items() if c > 0}
        rhs = {n: -c for n, c in form.items() if c < 0}
        return f"{form_text(lhs)} {self.rel} {form_text(rhs)}"


def parse_constraint(text: str) -> Constraint:
    """`2*c3 == 3*b2`, `a2 < c4`, `3*b2 >= 2*a1+2*a2`."""
    parts = _RELATION.split(text)
    if len(parts) != 3:
        raise JetspaceError(f"constraint needs exactly one relation: {text!r}", stage="wedge")
    left, rel, right = parts
    form = form_add(parse_form(left), parse_form(right), Fraction(-1))
    if rel in ('==', '='):
        return Constraint.make(form, '==')
    if rel in ('<=', '<'):
        return Constraint.make(form, rel)
    return Constraint.make(form_scale(form, Fraction(-1)), '<=' if rel == '>=' else '<')


def equal(a: LinearForm, b: LinearForm) -> Constraint:
    return Constraint.make(form_add(a, b, Fraction(-1)), '==')


def less(a: LinearForm, b: LinearForm) -> Constraint:
    return Constraint.make(form_add(a, b, Fraction(-1)), '<')


def positivity(symbols: Iterable[str]) -> List[Constraint]:
    return [Constraint.make({name: Fraction(-1)}, '<') for name in symbols]


def _trivial(c: Constraint) -> Optional[bool]:
    """True/False for constant constraints, None otherwise."""
    if any(name != CONSTANT for name, _ in c.form):
        return None
    value = dict(c.form).get(CONSTANT, Fraction(0))
    if c.rel == '==':
        return value == 0
    if c.rel == '<=':
        return value <= 0
    return value < 0


def _clean(constraints: Iterable[Constraint]) -> Optional[List[Constraint]]:
    out = []
    seen = set()
    for c in constraints:
        verdict = _trivial(c)
        if verdict is True:
            continue
        if verdict is False:
            return None
        c = c.normalized()
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _next_variable(current: List[Constraint], remaining: Set[str]) -> str:
    """Equality pivots first, then the variable producing the fewest combinations."""
    for c in current:
        if c.rel == '==':
            for name, _ in c.form:
                if name in remaining:
                    return name

    def cost(x: str) -> Tuple[int, str]:
        lowers = uppers = 0
        for c in current:
            a = dict(c.form).get(x)
            if a is None:
                continue
            if a > 0:
                uppers += 1
            else:
                lowers += 1
        return lowers * uppers - lowers - uppers, x

    return min(remaining, key=cost)


def feasible(constraints: Sequence[Constraint]) -> Optional[Dict[str, Fraction]]:
    """A rational point satisfying every constraint, or None when there is none."""
    current = _clean(constraints)
    if current is None:
        return None
    homogeneous = all(c.is_homogeneous() for c in current)
    remaining = set(name for c in current for name, _ in c.form if name != CONSTANT)
    stages = []
    while remaining:
        x = _next_variable(current, remaining)
        remaining.discard(x)
        pivot = next((c for c in current if c.rel == '==' and dict(c.form).get(x)), None)
        if pivot is not None:
            form = pivot.linear
            a = form.pop(x)
            expression = form_scale(form, -1 / a)
            stages.append(('eq', x, expression))
            rewritten = []
            for c in current:
                if c is pivot:
                    continue
                cf = c.linear
                coefficient = cf.pop(x, None)
                if coefficient:
                    cf = form_add(cf, expression, coefficient)
                rewritten.append(Constraint.make(cf, c.rel))
            current = _clean(rewritten)
            if current is None:
                return None
            continue
        lowers, uppers, rest = [], [], []
        for c in current:
            cf = c.linear
            a = cf.pop(x, None)
            if not a:
                rest.append(c)
                continue
            bound = form_scale(cf, -1 / a)
            strict = c.rel == '<'
            if c.rel == '==':
                lowers.append((bound, False))
                uppers.append((bound, False))
            elif a > 0:
                uppers.append((bound, strict))
            else:
                lowers.append((bound, strict))
        stages.append(('ineq', x, lowers, uppers))
        for lo, lo_strict in lowers:
            for hi, hi_strict in uppers:
                rest.append(Constraint.make(form_add(lo, hi, Fraction(-1)), '<' if lo_strict or hi_strict else '<='))
        current = _clean(rest)
        if current is None:
            return None

    point: Dict[str, Fraction] = {}
    for stage in reversed(stages):
        if stage[0] == 'eq':
            _, x, expression = stage
            point[x] = form_value(expression, point)
            continue
        _, x, lowers, uppers = stage
        lo = hi = None
        lo_strict = hi_strict = False
        for bound, strict in lowers:
            value = form_value(bound, point)
            if lo is None or value > lo or (value == lo and strict):
                lo, lo_strict = value, strict
        for bound, strict in uppers:
            value = form_value(bound, point)
            if hi is None or value < hi or (value == hi and strict):
                hi, hi_strict = value, strict
        if lo is not None and hi is not None:
            point[x] = lo if lo == hi else (lo + hi) / 2
        elif lo is not None:
            point[x] = lo + 1
        elif hi is not None:
            point[x] = hi - 1
        else:
            point[x] = Fraction(1)
    if homogeneous and point:
        # positive multiples of a solution of a homogeneous system are solutions; report the integral one
        scale = lcm(*(value.denominator for value in point.values()))
        point = {name: value * scale for name, value in point.items()}
    return point


def is_feasible(constraints: Sequence[Constraint]) -> bool:
    return feasible(constraints) is not None


def cell_difference(cell: Sequence[Constraint], removed: Sequence[Constraint]) -> List[List[Constraint]]:
    """cell minus removed = union over t of (cell, removed[:t], not removed[t]); feasible pieces only."""
    pieces = []
    prefix: List[Constraint] = []
    for c in removed:
        for negation in c.negate():
            piece = list(cell) + prefix + [negation]
            if is_feasible(piece):
                pieces.append(piece)
        prefix.append(c)
    return pieces


def uncovered(cell: Sequence[Constraint], cover: Sequence[Sequence[Constraint]]) -> List[List[Constraint]]:
    """Pieces of `cell` outside every cell of `cover`; empty means covered."""
    remaining = [list(cell)] if is_feasible(cell) else []
    for leaf in cover:
        following = []
        for piece in remaining:
            following.extend(cell_difference(piece, leaf))
        remaining = following
        if not remaining:
            break
    return remaining
