#!/usr/bin/env python3
"""
Test script for the valuative stage on the E6 fixture
"""

import sys
import os

# Add the current directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from jetspace.cases import Fixture
from jetspace.errors import FixtureError, NotNegativeDefiniteError
from jetspace.jets import DivisorRecord
from jetspace.valuative import (IntersectionMatrix, OrderTable, TaskStatus, classify_pairs, hasse_edges,
                                in_lipman_cone, is_negative_definite, lipman_vector, pair_label, parse_pair,
                                partial_order, partial_order_frame, residual_pairs, symmetry_map, valuative_check)

FIXTURE = Fixture.load()


def _labels(pairs):
    return [pair_label(p) for p in pairs]


def test_order_table():
    print("🧪 Order table")
    t = FIXTURE.table
    assert t.names() == ["E1", "E2", "E3", "E4", "E5", "E6"]
    frame = t.to_frame()
    assert frame.shape == (6, 5), f"table shape {frame.shape}"
    assert frame.loc["E6", "z"] == 6 and frame.loc["E2", "z-i*x^2"] == 4
    assert t.order("E4", "z+i*x^2") == 4
    print("✅ Order table passed")


def test_valuative_witnesses():
    """ord_{E_j} f < ord_{E_i} f proves N_j not inside N_i"""
    print("🧪 Valuative witnesses")
    t = FIXTURE.table
    assert valuative_check(t, "E1", "E4") == "y", "E1 has the smaller y-order"
    assert valuative_check(t, "E2", "E1") == "x"
    assert valuative_check(t, "E4", "E1") is None, "E4 is never below E1"
    assert valuative_check(t, "E1", "E2") == "z-i*x^2", "only z-i*x^2 separates E1 from E2"
    print("✅ Valuative witnesses passed")


def test_residual_pairs():
    print("🧪 Residual pairs")
    full, reduced = residual_pairs(FIXTURE.table, FIXTURE.symmetry)
    assert _labels(full) == ["(4,1)", "(5,1)", "(6,1)", "(4,2)", "(5,2)", "(6,2)",
                             "(4,3)", "(5,3)", "(6,3)", "(6,4)", "(6,5)"], f"full list {_labels(full)}"
    assert _labels(reduced) == ["(4,1)", "(6,1)", "(4,2)", "(5,2)", "(6,2)", "(6,4)"], \
        f"reduced list {_labels(reduced)}"
    without_symmetry = residual_pairs(FIXTURE.table)[1]
    assert len(without_symmetry) == 11, "no symmetry leaves every residual pair"
    print("✅ Residual pairs passed")


def test_classification():
    print("🧪 Task classification")
    tasks = classify_pairs(FIXTURE.table, FIXTURE.symmetry)
    assert len(tasks) == 30, "6 divisors give 30 ordered pairs"
    valuative = [task for task in tasks if task.status == TaskStatus.PROVED_VALUATIVE]
    assert len(valuative) == 19, f"{len(valuative)} pairs proved valuatively"
    assert all(task.witness for task in valuative), "every valuative task names its test function"
    mirrored = {pair_label(task.pair): pair_label(task.representative) for task in tasks if task.representative}
    assert mirrored == {"(5,1)": "(4,1)", "(4,3)": "(5,2)", "(5,3)": "(4,2)", "(6,3)": "(6,2)",
                        "(6,5)": "(6,4)"}, f"representatives {mirrored}"
    data = tasks[0].to_dict()
    assert data["status"] in {status.value for status in TaskStatus}
    print("✅ Task classification passed")


def test_partial_order():
    print("🧪 Partial order of the divisors")
    relation = partial_order(FIXTURE.table)
    assert ("E1", "E4") in relation and ("E2", "E5") in relation and ("E4", "E6") in relation
    assert ("E1", "E2") not in relation and ("E2", "E1") not in relation, "E1 and E2 are incomparable"
    assert ("E4", "E5") not in relation and ("E5", "E4") not in relation
    edges = hasse_edges(relation)
    assert ("E1", "E6") not in edges, "E1 < E6 passes through E4"
    assert len(edges) == 8, f"cover relations {sorted(edges)}"
    coarse = partial_order(FIXTURE.table, ["x", "y", "z"])
    assert ("E2", "E1") in coarse, "on x, y, z alone E2 sits below E1"
    frame = partial_order_frame(FIXTURE.table)
    assert frame.loc["E1", "E4"] == "<" and frame.loc["E4", "E1"] == ">" and frame.loc["E1", "E2"] == "|"
    print("✅ Partial order passed")


def test_symmetry_and_pairs():
    print("🧪 Symmetry and pair parsing")
    mapping = symmetry_map([["E2", "E3"], ["E4", "E5"]])
    assert mapping == {"E2": "E3", "E3": "E2", "E4": "E5", "E5": "E4"}
    assert parse_pair("4,1", FIXTURE.table) == ("E4", "E1")
    assert parse_pair("(E6,E2)", FIXTURE.table) == ("E6", "E2")
    for bad in ("4", "9,1"):
        try:
            parse_pair(bad, FIXTURE.table)
            assert False, f"{bad!r} should be rejected"
        except FixtureError:
            pass
    try:
        symmetry_map([["E2", "E3", "E4"]])
        assert False, "a symmetry entry swaps two divisors"
    except FixtureError:
        pass
    print("✅ Symmetry and pair parsing passed")


def test_lipman_vector():
    print("🧪 Lipman vector")
    M = FIXTURE.intersection
    assert is_negative_definite(M), "the E6 configuration is negative definite"
    m = lipman_vector(M)
    assert m == [2, 1, 1, 2, 2, 3], f"fundamental cycle {m}"
    assert in_lipman_cone(M, m) and not in_lipman_cone(M, [1] * 6)
    try:
        lipman_vector(IntersectionMatrix([[-1, 1], [1, -1]]))
        assert False, "a semi-definite matrix has no Lipman vector"
    except NotNegativeDefiniteError:
        pass
    try:
        IntersectionMatrix([[-2, 1], [0, -2]])
        assert False, "asymmetric matrices are rejected"
    except FixtureError:
        pass
    print("✅ Lipman vector passed")


def test_missing_orders():
    print("🧪 Incomplete order tables")
    try:
        OrderTable([DivisorRecord("E1", (1, 1, 1), {"x": 1})], ["x", "y"])
        assert False, "a missing order must be rejected"
    except FixtureError as e:
        assert "y" in str(e), f"message should name the missing function: {e}"
    try:
        OrderTable([DivisorRecord("E1", (1, 1, 1), {"x": 1}), DivisorRecord("E1", (1, 1, 1), {"x": 1})], ["x"])
        assert False, "duplicate divisor names must be rejected"
    except FixtureError:
        pass
    print("✅ Incomplete order tables passed")


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 TESTING VALUATIVE STAGE")
    print("=" * 60)
    test_order_table()
    test_valuative_witnesses()
    test_residual_pairs()
    test_classification()
    test_partial_order()
    test_symmetry_and_pairs()
    test_lipman_vector()
    test_missing_orders()
    print("\n🎯 All valuative tests passed")
