"""
Sparse multivariate polynomials over Q(i).

Variables are structured: jet coefficients a_n, b_n, c_n, wedge coefficients
a_n_p (second index is the power of s) and free auxiliary names such as x, t,
s, u or Z. A monomial is a tuple of (VariableId, exponent) pairs sorted by
variable rank; a Polynomial maps monomials to nonzero GaussianRationals.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

import regex

from jetspace.coeff_field import GaussianRational, I, ONE, ZERO
from jetspace.errors import (MissingAssignmentError, MissingWeightError,
                             PolynomialSyntaxError, ZeroPolynomialError)

FAMILIES = ('a', 'b', 'c', 'aux')
_FAMILY_ORDER = {name: position for position, name in enumerate(FAMILIES)}
# coordinate attached to each jet family
COORDINATE_OF = {'a': 'x', 'b': 'y', 'c': 'z'}
FAMILY_OF = {'x': 'a', 'y': 'b', 'z': 'c'}


@total_ordering
@dataclass(frozen=True)
class VariableId:
    family: str
    primary: int = 0
    secondary: Optional[int] = None
    aux_name: Optional[str] = None

    def __post_init__(self):
        if self.family not in _FAMILY_ORDER:
            raise ValueError(f"unknown variable family {self.family!r}")
        if self.family == 'aux':
            if not self.aux_name:
                raise ValueError("auxiliary variables need a name")
        elif self.primary < 1:
            raise ValueError(f"jet variable index must be positive, got {self.primary}")
        if self.secondary is not None and self.secondary < 0:
            raise ValueError("secondary index must be nonnegative")

    @cached_property
    def rank(self) -> Tuple[int, int, int, str]:
        return (_FAMILY_ORDER[self.family], self.primary,
                -1 if self.secondary is None else self.secondary, self.aux_name or "")

    def __lt__(self, other):
        if not isinstance(other, VariableId):
            return NotImplemented
        return self.rank < other.rank

    @property
    def is_jet(self) -> bool:
        return self.family != 'aux' and self.secondary is None

    @property
    def is_wedge(self) -> bool:
        return self.family != 'aux' and self.secondary is not None

    def jet(self) -> 'VariableId':
        """Drop the s-index: a2_3 -> a2."""
        return VariableId(self.family, self.primary)

    def __str__(self):
        if self.family == 'aux':
            base = self.aux_name
        else:
            base = f"{self.family}{self.primary}"
        if self.secondary is not None:
            return f"{base}_{self.secondary}"
        return base

    def __repr__(self):
        return f"VariableId({str(self)!r})"


def jet_var(family: str, n: int, p: Optional[int] = None) -> VariableId:
    return VariableId(family, n, p)


def aux_var(name: str, p: Optional[int] = None) -> VariableId:
    return VariableId('aux', 0, p, name)


_JET_NAME = regex.compile(r'^([abc])(\d+)(?:_(\d+))?$')
_AUX_NAME = regex.compile(r'^([A-Za-z][A-Za-z0-9]*?)(?:_(\d+))?$')


def parse_variable(name: str) -> VariableId:
    match = _JET_NAME.match(name)
    if match:
        secondary = int(match.group(3)) if match.group(3) is not None else None
        return VariableId(match.group(1), int(match.group(2)), secondary)
    match = _AUX_NAME.match(name)
    if not match or name == 'i':
        raise PolynomialSyntaxError("invalid variable name", name, 0)
    secondary = int(match.group(2)) if match.group(2) is not None else None
    return aux_var(match.group(1), secondary)


# Monomials

Monomial = Tuple[Tuple[VariableId, int], ...]
ONE_MONOMIAL: Monomial = ()


def monomial_from_dict(exponents: Dict[VariableId, int]) -> Monomial:
    return tuple(sorted(((v, e) for v, e in exponents.items() if e), key=lambda pair: pair[0].rank))


def monomial_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    result = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            result.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1.rank < v2.rank:
            result.append(m1[i])
            i += 1
        else:
            result.append(m2[j])
            j += 1
    result.extend(m1[i:])
    result.extend(m2[j:])
    return tuple(result)


def monomial_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def monomial_exponent(m: Monomial, v: VariableId) -> int:
    for var, e in m:
        if var == v:
            return e
    return 0


def monomial_divides(m1: Monomial, m2: Monomial) -> bool:
    exps = dict(m2)
    return all(exps.get(v, 0) >= e for v, e in m1)


def monomial_without(m: Monomial, v: VariableId) -> Monomial:
    return tuple(pair for pair in m if pair[0] != v)


def monomial_text(m: Monomial) -> str:
    return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in m)


# Monomial orders

@dataclass(frozen=True)
class MonomialOrder:
    """grevlex, lex, or a block order whose `block` variables are eliminated first."""

    kind: str = 'grevlex'
    block: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in ('grevlex', 'lex', 'block'):
            raise ValueError(f"unknown monomial order {self.kind!r}")
        if self.kind == 'block' and not self.block:
            raise ValueError("block order needs a nonempty block")

    def key(self, m: Monomial):
        if self.kind == 'grevlex':
            return _grevlex_key(m)
        if self.kind == 'lex':
            return tuple((v.rank, e) for v, e in reversed(m))
        inside = tuple(pair for pair in m if pair[0] in self.block)
        outside = tuple(pair for pair in m if pair[0] not in self.block)
        return (_grevlex_key(inside), _grevlex_key(outside))

    def variable_key(self, v: VariableId):
        """Ranking of single variables under this order (larger is more significant)."""
        if self.kind == 'block':
            return (v in self.block, v.rank)
        return (True, v.rank)

    def to_dict(self) -> Dict:
        return {"kind": self.kind, "block": sorted(str(v) for v in self.block)}

    @classmethod
    def from_dict(cls, data: Dict) -> 'MonomialOrder':
        return cls(data.get("kind", "grevlex"), frozenset(parse_variable(n) for n in data.get("block", [])))


def _grevlex_key(m: Monomial):
    return (monomial_degree(m), tuple((v.rank, -e) for v, e in m))


GREVLEX = MonomialOrder('grevlex')
LEX = MonomialOrder('lex')


# Polynomials

Coefficient = Union[int, Fraction, GaussianRational]


class Polynomial:
    __slots__ = ('terms', '_leading')

    def __init__(self, terms: Optional[Dict[Monomial, Coefficient]] = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                c = GaussianRational.coerce(c)
                if c:
                    clean[m] = c
        self.terms: Dict[Monomial, GaussianRational] = clean
        self._leading = {}

    @classmethod
    def _raw(cls, terms: Dict[Monomial, GaussianRational]) -> 'Polynomial':
        poly = cls.__new__(cls)
        poly.terms = terms
        poly._leading = {}
        return poly

    @classmethod
    def constant(cls, c: Coefficient) -> 'Polynomial':
        return cls({ONE_MONOMIAL: c})

    @classmethod
    def variable(cls, v: Union[VariableId, str]) -> 'Polynomial':
        if isinstance(v, str):
            v = parse_variable(v)
        return cls._raw({((v, 1),): ONE})

    @classmethod
    def monomial(cls, m: Monomial, c: Coefficient = 1) -> 'Polynomial':
        return cls({m: c})

    @classmethod
    def from_text(cls, text: str) -> 'Polynomial':
        return parse_polynomial(text)

    # inspection

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONOMIAL in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_coefficient(self) -> GaussianRational:
        return self.terms.get(ONE_MONOMIAL, ZERO)

    def coefficient(self, m: Monomial) -> GaussianRational:
        return self.terms.get(m, ZERO)

    def variables(self) -> frozenset:
        return frozenset(v for m in self.terms for v, _ in m)

    def total_degree(self) -> int:
        return max((monomial_degree(m) for m in self.terms), default=0)

    def degree_in(self, v: VariableId) -> int:
        return max((monomial_exponent(m, v) for m in self.terms), default=0)

    def leading_term(self, order: MonomialOrder = GREVLEX) -> Tuple[Monomial, GaussianRational]:
        if not self.terms:
            raise ZeroPolynomialError("zero polynomial has no leading term")
        cached = self._leading.get(order)
        if cached is None:
            m = max(self.terms, key=order.key)
            cached = (m, self.terms[m])
            self._leading[order] = cached
        return cached

    def monic(self, order: MonomialOrder = GREVLEX) -> 'Polynomial':
        _, c = self.leading_term(order)
        return self.scale(c.inverse())

    # arithmetic

    def __add__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for m, c in other.terms.items():
            s = terms.get(m, ZERO) + c
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
        return Polynomial._raw(terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return mul_truncated(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c: Coefficient) -> 'Polynomial':
        c = GaussianRational.coerce(c)
        if not c:
            return Polynomial()
        return Polynomial._raw({m: coeff * c for m, coeff in self.terms.items()})

    def mul_term(self, m: Monomial, c: GaussianRational) -> 'Polynomial':
        return Polynomial._raw({monomial_mul(mm, m): coeff * c for mm, coeff in self.terms.items()})

    # comparison

    def __eq__(self, other):
        other = _as_polynomial(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # text

    def sorted_terms(self, order: MonomialOrder = GREVLEX) -> List[Tuple[Monomial, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda item: order.key(item[0]), reverse=True)

    def to_text(self, order: MonomialOrder = GREVLEX) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms(order):
            pieces.append(_term_text(m, c))
        text = pieces[0]
        for piece in pieces[1:]:
            text += piece if piece.startswith('-') else "+" + piece
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polynomial({self.to_text()!r})"

    def __reduce__(self):
        return (parse_polynomial, (self.to_text(),))


def _term_text(m: Monomial, c: GaussianRational) -> str:
    if not m:
        return str(c)
    body = monomial_text(m)
    if c == 1:
        return body
    if c == -1:
        return "-" + body
    if c.needs_parens():
        return f"({c})*{body}"
    return f"{c}*{body}"


def _as_polynomial(value) -> Optional[Polynomial]:
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction, GaussianRational)):
        return Polynomial.constant(value)
    return None


def mul_truncated(p: Polynomial, q: Polynomial, var: Optional[VariableId] = None,
                  bound: Optional[int] = None) -> Polynomial:
    """Product p*q, dropping every term whose exponent of `var` exceeds `bound`."""
    terms: Dict[Monomial, GaussianRational] = {}
    truncate = var is not None and bound is not None
    if truncate:
        q_items = [(m, c, monomial_exponent(m, var)) for m, c in q.terms.items()]
    else:
        q_items = [(m, c, 0) for m, c in q.terms.items()]
    for m1, c1 in p.terms.items():
        d1 = monomial_exponent(m1, var) if truncate else 0
        if truncate and d1 > bound:
            continue
        for m2, c2, d2 in q_items:
            if truncate and d1 + d2 > bound:
                continue
            m = monomial_mul(m1, m2)
            s = terms.get(m, ZERO) + c1 * c2
            if s:
                terms[m] = s
            else:
                terms.pop(m, None)
    return Polynomial._raw(terms)


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    if op == 'add':
        return p + q
    if op == 'sub':
        return p - q
    if op == 'mul':
        return p * q
    raise ValueError(f"unknown polynomial operation {op!r}")


def var_poly(name: str) -> Polynomial:
    return Polynomial.variable(parse_variable(name))


# Substitution and calculus

def substitute(p: Polynomial, assignment: Dict[VariableId, Polynomial],
               truncate: Optional[Tuple[VariableId, int]] = None) -> Polynomial:
    """Compose p with `assignment`; unassigned variables are left in place.

    `truncate=(v, n)` drops every term of degree > n in v while multiplying,
    which is how series are substituted without materializing high powers.
    """
    var, bound = truncate if truncate else (None, None)
    images = {v: _as_polynomial(img) for v, img in assignment.items()}
    powers: Dict[Tuple[VariableId, int], Polynomial] = {}

    def power(v: VariableId, e: int) -> Polynomial:
        key = (v, e)
        if key not in powers:
            if e == 1:
                powers[key] = images[v]
            else:
                powers[key] = mul_truncated(power(v, e - 1), images[v], var, bound)
        return powers[key]

    result: Dict[Monomial, GaussianRational] = {}
    for m, c in p.terms.items():
        kept = []
        image = Polynomial.constant(c)
        for v, e in m:
            if v in images:
                image = mul_truncated(image, power(v, e), var, bound)
                if not image:
                    break
            else:
                kept.append((v, e))
        if not image:
            continue
        if kept:
            image = mul_truncated(image, Polynomial._raw({tuple(kept): ONE}), var, bound)
        for mm, cc in image.terms.items():
            s = result.get(mm, ZERO) + cc
            if s:
                result[mm] = s
            else:
                result.pop(mm, None)
    return Polynomial._raw(result)


def partial_derivative(p: Polynomial, v: VariableId) -> Polynomial:
    terms: Dict[Monomial, GaussianRational] = {}
    for m, c in p.terms.items():
        e = monomial_exponent(m, v)
        if not e:
            continue
        reduced = tuple((w, f - 1) if w == v else (w, f) for w, f in m)
        reduced = tuple(pair for pair in reduced if pair[1])
        terms[reduced] = terms.get(reduced, ZERO) + c * e
    return Polynomial(terms)


def collect(p: Polynomial, v: VariableId) -> Dict[int, Polynomial]:
    """Split p = sum_k coeff_k * v^k and return {k: coeff_k}."""
    buckets: Dict[int, Dict[Monomial, GaussianRational]] = {}
    for m, c in p.terms.items():
        e = monomial_exponent(m, v)
        buckets.setdefault(e, {})[monomial_without(m, v)] = c
    return {e: Polynomial._raw(terms) for e, terms in buckets.items()}


def evaluate(p: Polynomial, point: Dict[VariableId, Coefficient]) -> GaussianRational:
    total = ZERO
    values = {v: GaussianRational.coerce(x) for v, x in point.items()}
    for m, c in p.terms.items():
        term = c
        for v, e in m:
            if v not in values:
                raise MissingAssignmentError(f"no value for variable {v}")
            term = term * values[v] ** e
        total = total + term
    return total


def restrict(p: Polynomial, keep: Callable[[Monomial], bool]) -> Polynomial:
    return Polynomial._raw({m: c for m, c in p.terms.items() if keep(m)})


# Weighted gradings

@dataclass
class WeightVector:
    weights: Dict[VariableId, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = {v: Fraction(w) for v, w in self.weights.items()}

    @classmethod
    def from_names(cls, named: Dict[str, Union[int, Fraction, str]]) -> 'WeightVector':
        return cls({parse_variable(name): Fraction(w) for name, w in named.items()})

    @classmethod
    def jet_grading(cls, variables: Iterable[VariableId]) -> 'WeightVector':
        """wt(a_j) = wt(b_j) = wt(c_j) = j."""
        return cls({v: Fraction(v.primary) for v in variables if v.family != 'aux'})

    def weight(self, v: VariableId) -> Fraction:
        try:
            return self.weights[v]
        except KeyError:
            raise MissingWeightError(f"no weight assigned to {v}")

    def of_monomial(self, m: Monomial) -> Fraction:
        return sum((self.weight(v) * e for v, e in m), Fraction(0))

    def to_dict(self) -> Dict[str, str]:
        return {str(v): str(w) for v, w in sorted(self.weights.items(), key=lambda item: item[0].rank)}


def weighted_order(p: Polynomial, w: WeightVector) -> Fraction:
    if not p:
        raise ZeroPolynomialError("weighted order of the zero polynomial")
    return min(w.of_monomial(m) for m in p.terms)


def leading_form(p: Polynomial, w: WeightVector) -> Polynomial:
    order = weighted_order(p, w)
    return restrict(p, lambda m: w.of_monomial(m) == order)


def is_weighted_homogeneous(p: Polynomial, w: WeightVector) -> Tuple[bool, Optional[Fraction]]:
    if not p:
        return True, None
    degrees = {w.of_monomial(m) for m in p.terms}
    if len(degrees) == 1:
        return True, degrees.pop()
    return False, None


# Text grammar

_TOKEN = regex.compile(r'\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()]))')


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        position = 0
        while position < len(text):
            if text[position:].strip() == "":
                break
            match = _TOKEN.match(text, position)
            if not match or match.end() == position:
                raise PolynomialSyntaxError("unexpected character", text, position)
            kind = match.lastgroup
            self.tokens.append((kind, match.group(kind), match.start(kind)))
            position = match.end()
        self.index = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def take(self) -> Tuple[str, str, int]:
        token = self.peek()
        if token is None:
            raise PolynomialSyntaxError("unexpected end of input", self.text, len(self.text))
        self.index += 1
        return token

    def expect(self, op: str):
        kind, value, column = self.take()
        if kind != 'op' or value != op:
            raise PolynomialSyntaxError(f"expected {op!r}", self.text, column)

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise PolynomialSyntaxError("empty expression", self.text, 0)
        result = self.expression()
        token = self.peek()
        if token is not None:
            raise PolynomialSyntaxError("trailing input", self.text, token[2])
        return result

    def expression(self) -> Polynomial:
        result = self.term()
        while True:
            token = self.peek()
            if token and token[0] == 'op' and token[1] in '+-':
                self.take()
                rhs = self.term()
                result = result + rhs if token[1] == '+' else result - rhs
            else:
                return result

    def term(self) -> Polynomial:
        result = self.unary()
        while True:
            token = self.peek()
            if token and token[0] == 'op' and token[1] == '*':
                self.take()
                result = result * self.unary()
            elif token and token[0] == 'op' and token[1] == '/':
                self.take()
                divisor = self.unary()
                if not divisor.is_constant() or not divisor:
                    raise PolynomialSyntaxError("division only by nonzero constants", self.text, token[2])
                result = result.scale(divisor.constant_coefficient().inverse())
            else:
                return result

    def unary(self) -> Polynomial:
        token = self.peek()
        if token and token[0] == 'op' and token[1] in '+-':
            self.take()
            operand = self.unary()
            return -operand if token[1] == '-' else operand
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        token = self.peek()
        if token and token[0] == 'op' and token[1] in ('^', '**'):
            self.take()
            kind, value, column = self.take()
            if kind != 'num':
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", self.text, column)
            return base ** int(value)
        return base

    def atom(self) -> Polynomial:
        kind, value, column = self.take()
        if kind == 'num':
            return Polynomial.constant(int(value))
        if kind == 'name':
            if value == 'i':
                return Polynomial.constant(I)
            try:
                return Polynomial.variable(parse_variable(value))
            except (PolynomialSyntaxError, ValueError):
                raise PolynomialSyntaxError("invalid variable name", self.text, column)
        if value == '(':
            inner = self.expression()
            self.expect(')')
            return inner
        raise PolynomialSyntaxError(f"unexpected {value!r}", self.text, column)


def parse_polynomial(text: str) -> Polynomial:
    """Parse `+ - * / ^` expressions over integers, `i` and named variables."""
    return _Parser(text).parse()
