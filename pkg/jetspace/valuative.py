"""
Valuative stage: order tables, witnesses, residual pairs, Lipman vectors.

A test function f with ord_{E_j} f < ord_{E_i} f shows that the arc family
of E_j is not contained in the closure of the family of E_i. Pairs with no
such witness are residual and go to the wedge stage.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

import pandas as pd
import regex

from jetspace.errors import FixtureError, NotNegativeDefiniteError
from jetspace.jets import DivisorRecord

Pair = Tuple[str, str]  # (source j, target i): the claim N_j not inside N_i


class TaskStatus(Enum):
    PROVED_VALUATIVE = "proved-valuative"
    REQUIRES_WEDGE = "requires-wedge"
    PROVED_WEDGE = "proved-wedge"
    PROVED_BY_SYMMETRY = "proved-by-symmetry"
    OPEN = "open"


@dataclass
class OrderTable:
    divisors: List[DivisorRecord]
    test_functions: List[str]

    def __post_init__(self):
        names = [d.name for d in self.divisors]
        if len(set(names)) != len(names):
            raise FixtureError("duplicate divisor names")
        for d in self.divisors:
            missing = [f for f in self.test_functions if f not in d.test_orders]
            if missing:
                raise FixtureError(f"divisor {d.name} has no order for {', '.join(missing)}")

    def names(self) -> List[str]:
        return [d.name for d in self.divisors]

    def divisor(self, name: str) -> DivisorRecord:
        for d in self.divisors:
            if d.name == name:
                return d
        raise FixtureError(f"unknown divisor {name}")

    def order(self, name: str, f: str) -> int:
        return int(self.divisor(name).test_orders[f])

    def to_frame(self) -> pd.DataFrame:
        rows = {d.name: [int(d.test_orders[f]) for f in self.test_functions] for d in self.divisors}
        return pd.DataFrame.from_dict(rows, orient='index', columns=self.test_functions)


@dataclass
class NonInclusionTask:
    source: str
    target: str
    status: TaskStatus
    witness: Optional[str] = None
    representative: Optional[Pair] = None
    certificate: Optional[str] = None

    @property
    def pair(self) -> Pair:
        return (self.source, self.target)

    def to_dict(self) -> Dict:
        data = {"pair": pair_label(self.pair), "source": self.source, "target": self.target,
                "status": self.status.value}
        if self.witness is not None:
            data["witness"] = self.witness
        if self.representative is not None:
            data["representative"] = pair_label(self.representative)
        if self.certificate is not None:
            data["certificate"] = self.certificate
        return data


def pair_label(pair: Pair) -> str:
    return f"({_short(pair[0])},{_short(pair[1])})"


def _short(name: str) -> str:
    digits = regex.search(r'\d+$', name)
    return digits.group(0) if digits else name


def parse_pair(text: str, table: OrderTable) -> Pair:
    """Accept `4,1`, `(4,1)` or `E4,E1`; digits are matched to divisor names."""
    parts = [p.strip() for p in text.strip().strip('()').split(',')]
    if len(parts) != 2:
        raise FixtureError(f"pair must look like J,I: {text!r}")
    resolved = []
    for part in parts:
        matches = [n for n in table.names() if n == part or _short(n) == part]
        if not matches:
            raise FixtureError(f"unknown divisor {part!r} in pair {text!r}")
        resolved.append(matches[0])
    return resolved[0], resolved[1]


def valuative_check(t: OrderTable, i: str, j: str) -> Optional[str]:
    """First test function with ord_{E_i} f < ord_{E_j} f; proves N_i not inside N_j."""
    for f in t.test_functions:
        if t.order(i, f) < t.order(j, f):
            return f
    return None


def _symmetric_pair(pair: Pair, symmetry: Dict[str, str]) -> Pair:
    return (symmetry.get(pair[0], pair[0]), symmetry.get(pair[1], pair[1]))


def symmetry_map(declarations: Sequence[Sequence[str]]) -> Dict[str, str]:
    """[["E2","E3"], ["E4","E5"]] -> involution swapping each declared couple."""
    mapping: Dict[str, str] = {}
    for couple in declarations:
        if len(couple) != 2:
            raise FixtureError(f"symmetry entries swap exactly two divisors: {couple}")
        a, b = couple
        mapping[a] = b
        mapping[b] = a
    return mapping


def residual_pairs(t: OrderTable, symmetry: Optional[Dict[str, str]] = None) -> Tuple[List[Pair], List[Pair]]:
    """All residual (j, i) pairs, and one representative per symmetry orbit.

    The representative minimizes (target, source) in table order.
    """
    symmetry = symmetry or {}
    position = {name: index for index, name in enumerate(t.names())}
    full = [(j, i) for i in t.names() for j in t.names()
            if j != i and valuative_check(t, j, i) is None]
    full.sort(key=lambda pair: (position[pair[1]], position[pair[0]]))
    reduced = []
    for pair in full:
        image = _symmetric_pair(pair, symmetry)
        if image not in full:
            reduced.append(pair)
            continue
        best = min(pair, image, key=lambda p: (position[p[1]], position[p[0]]))
        if best == pair:
            reduced.append(pair)
    return full, reduced


def classify_pairs(t: OrderTable, symmetry: Optional[Dict[str, str]] = None) -> List[NonInclusionTask]:
    symmetry = symmetry or {}
    full, reduced = residual_pairs(t, symmetry)
    tasks = []
    for i in t.names():
        for j in t.names():
            if i == j:
                continue
            witness = valuative_check(t, j, i)
            if witness is not None:
                tasks.append(NonInclusionTask(j, i, TaskStatus.PROVED_VALUATIVE, witness=witness))
            elif (j, i) in reduced:
                tasks.append(NonInclusionTask(j, i, TaskStatus.REQUIRES_WEDGE))
            else:
                image = _symmetric_pair((j, i), symmetry)
                tasks.append(NonInclusionTask(j, i, TaskStatus.REQUIRES_WEDGE, representative=image))
    return tasks


def partial_order(t: OrderTable, functions: Optional[Sequence[str]] = None) -> Set[Pair]:
    """E_i < E_j when ord_i f <= ord_j f for every test function, strictly for one."""
    functions = list(t.test_functions if functions is None else functions)
    if not functions:
        return set()
    relation = set()
    for i in t.names():
        for j in t.names():
            if i == j:
                continue
            lower = all(t.order(i, f) <= t.order(j, f) for f in functions)
            strict = any(t.order(i, f) < t.order(j, f) for f in functions)
            if lower and strict:
                relation.add((i, j))
    for i, j in relation:
        if (j, i) in relation:
            raise FixtureError(f"order relation is not antisymmetric on {i}, {j}")
    return relation


def hasse_edges(relation: Set[Pair]) -> Set[Pair]:
    """Cover relations of a strict partial order."""
    elements = {x for pair in relation for x in pair}
    return {(a, b) for a, b in relation
            if not any((a, c) in relation and (c, b) in relation for c in elements)}


def partial_order_frame(t: OrderTable, functions: Optional[Sequence[str]] = None) -> pd.DataFrame:
    relation = partial_order(t, functions)
    names = t.names()
    cells = [["<" if (a, b) in relation else (">" if (b, a) in relation else ("=" if a == b else "|"))
              for b in names] for a in names]
    return pd.DataFrame(cells, index=names, columns=names)


# Lipman cone

@dataclass
class IntersectionMatrix:
    entries: List[List[int]]
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise FixtureError("intersection matrix must be square")
        if any(self.entries[a][b] != self.entries[b][a] for a in range(n) for b in range(n)):
            raise FixtureError("intersection matrix must be symmetric")
        if not self.names:
            self.names = [f"E{q + 1}" for q in range(n)]

    @property
    def size(self) -> int:
        return len(self.entries)

    def apply(self, m: Sequence[int]) -> List[int]:
        return [sum(row[s] * m[s] for s in range(self.size)) for row in self.entries]

    @classmethod
    def from_graph(cls, names: List[str], self_intersections: Dict[str, int],
                   edges: Sequence[Sequence[str]]) -> 'IntersectionMatrix':
        position = {name: q for q, name in enumerate(names)}
        entries = [[0] * len(names) for _ in names]
        for name, value in self_intersections.items():
            entries[position[name]][position[name]] = int(value)
        for a, b in edges:
            entries[position[a]][position[b]] = 1
            entries[position[b]][position[a]] = 1
        return cls(entries, list(names))


def leading_minors(M: IntersectionMatrix) -> List[Fraction]:
    """Determinants of the leading principal submatrices, by exact elimination."""
    minors = []
    for size in range(1, M.size + 1):
        rows = [[Fraction(M.entries[r][c]) for c in range(size)] for r in range(size)]
        det = Fraction(1)
        for col in range(size):
            pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
            if pivot is None:
                det = Fraction(0)
                break
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = -det
            det *= rows[col][col]
            for r in range(col + 1, size):
                factor = rows[r][col] / rows[col][col]
                for c in range(col, size):
                    rows[r][c] -= factor * rows[col][c]
        minors.append(det)
    return minors


def is_negative_definite(M: IntersectionMatrix) -> bool:
    return all((-1) ** (q + 1) * minor > 0 for q, minor in enumerate(leading_minors(M)))


def lipman_vector(M: IntersectionMatrix) -> List[int]:
    """Least positive m with M*m <= 0: start at all ones, bump any q with (M*m)_q > 0."""
    if not is_negative_definite(M):
        raise NotNegativeDefiniteError("intersection matrix is not negative definite")
    m = [1] * M.size
    while True:
        image = M.apply(m)
        bump = next((q for q, value in enumerate(image) if value > 0), None)
        if bump is None:
            return m
        m[bump] += 1


def in_lipman_cone(M: IntersectionMatrix, m: Sequence[int]) -> bool:
    return all(v > 0 for v in m) and all(value <= 0 for value in M.apply(m))
