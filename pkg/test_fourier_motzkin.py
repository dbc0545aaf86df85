#!/usr/bin/env python3
"""
Test script for exact linear feasibility and cell differences
"""

import random
import sys
import os
from fractions import Fraction

# Add the current directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from jetspace.errors import JetspaceError
from jetspace.fourier_motzkin import (Constraint, cell_difference, equal, feasible, is_feasible, less, parse_constraint,
                                      parse_form, positivity, uncovered)

C = parse_constraint


def test_parse_constraint():
    print("🧪 Constraint parsing")
    c = C("2*c3 == 3*b2")
    assert c.rel == '==' and c.holds({"c3": Fraction(3), "b2": Fraction(2)})
    assert C("a2 >= b3").holds({"a2": Fraction(2), "b3": Fraction(2)}), ">= is kept non-strict"
    assert not C("a2 > b3").holds({"a2": Fraction(2), "b3": Fraction(2)}), "> is strict"
    assert C("3*b2 >= 2*a1+2*a2").holds({"b2": Fraction(2), "a1": Fraction(2), "a2": Fraction(1)})
    assert parse_form("2*a1+c4") == {"a1": Fraction(2), "c4": Fraction(1)}
    for bad in ("a1 < b2 < c3", "a1^2 < b2", "a1 + b2"):
        try:
            C(bad)
            assert False, f"{bad!r} should be rejected"
        except JetspaceError:
            pass
    print("✅ Constraint parsing passed")


def test_feasible_with_witness():
    print("🧪 Feasibility and witnesses")
    system = positivity(["b2", "c3"]) + [C("2*c3 == 3*b2")]
    point = feasible(system)
    assert point is not None, "2*c3 = 3*b2 has positive solutions"
    assert all(c.holds(point) for c in system), f"witness {point} violates the system"
    assert all(v.denominator == 1 for v in point.values()), "homogeneous witnesses are scaled to integers"

    assert not is_feasible([C("a1 < b2"), C("b2 < a1")]), "strict cycle is infeasible"
    assert not is_feasible([C("a1 <= b2"), C("b2 <= c3"), C("c3 < a1")])
    assert is_feasible([C("a1 <= b2"), C("b2 <= a1")]), "a1 = b2 satisfies both"
    assert not is_feasible(positivity(["a1"]) + [C("a1 <= 0")])
    print("✅ Feasibility and witnesses passed")


def test_random_systems_agree_with_witness():
    """Every witness satisfies its system; infeasible verdicts survive a grid search"""
    print("🧪 Random systems")
    rng = random.Random(5)
    names = ["x", "y", "z"]
    for _ in range(80):
        constraints = []
        for _ in range(rng.randint(1, 5)):
            form = {name: Fraction(rng.randint(-3, 3)) for name in names}
            form[''] = Fraction(rng.randint(-4, 4))
            constraints.append(Constraint.make(form, rng.choice(['<', '<=', '=='])))
        point = feasible(constraints)
        if point is not None:
            full = {name: point.get(name, Fraction(0)) for name in names}
            assert all(c.holds(full) for c in constraints), f"witness {full} fails {list(map(str, constraints))}"
        else:
            grid = [Fraction(n, 2) for n in range(-10, 11)]
            for x in grid:
                for y in grid:
                    for z in grid:
                        sample = {"x": x, "y": y, "z": z}
                        assert not all(c.holds(sample) for c in constraints), \
                            f"declared infeasible but {sample} satisfies {list(map(str, constraints))}"
    print("✅ Random systems passed")


def test_equal_and_less_builders():
    print("🧪 Form comparisons")
    a, b = {"a1": Fraction(2), "c4": Fraction(1)}, {"a1": Fraction(2), "a2": Fraction(2)}
    assert equal(a, b).holds({"a1": Fraction(1), "a2": Fraction(1), "c4": Fraction(2)})
    assert less(a, b).holds({"a1": Fraction(1), "a2": Fraction(1), "c4": Fraction(1)})
    print("✅ Form comparisons passed")


def test_cell_difference_and_cover():
    print("🧪 Cell differences")
    cell = positivity(["a2", "c4"])
    pieces = cell_difference(cell, [C("c4 == 2*a2")])
    assert len(pieces) == 2, "removing a hyperplane leaves the two open sides"
    assert not uncovered(cell, [[C("c4 < 2*a2")], [C("c4 > 2*a2")], [C("c4 == 2*a2")]]), \
        "three sides cover the quadrant"
    left = uncovered(cell, [[C("c4 < 2*a2")], [C("c4 > 2*a2")]])
    assert left, "the line c4 = 2*a2 stays uncovered"
    point = feasible(left[0])
    assert point["c4"] == 2 * point["a2"], f"uncovered piece should be the line, got {point}"
    assert uncovered([C("a2 < 0")] + cell, [[]]) == [], "an infeasible cell is trivially covered"
    print("✅ Cell differences passed")


def test_homogeneous_witness_scaling():
    """Homogeneous systems get an integral witness; inhomogeneous ones keep the exact rational point"""
    print("🧪 Witness scaling")
    system = positivity(["a2", "b3", "c5"]) + [C("3*b3 == 2*a2 + c5"), C("c5 < a2")]
    point = feasible(system)
    assert point is not None and all(v.denominator == 1 for v in point.values()), f"witness {point}"
    for factor in (Fraction(1, 2), Fraction(3), Fraction(7, 5)):
        scaled = {name: value * factor for name, value in point.items()}
        assert all(c.holds(scaled) for c in system), f"{factor} * {point} leaves the cone"
    half = feasible([C("2*a1 == 1")])
    assert half == {"a1": Fraction(1, 2)}, f"an inhomogeneous witness is not rescaled: {half}"
    print("✅ Witness scaling passed")


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 TESTING LINEAR FEASIBILITY")
    print("=" * 60)
    test_parse_constraint()
    test_feasible_with_witness()
    test_random_systems_agree_with_witness()
    test_equal_and_less_builders()
    test_cell_difference_and_cover()
    test_homogeneous_witness_scaling()
    print("\n🎯 All linear feasibility tests passed")
