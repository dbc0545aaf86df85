#!/usr/bin/env python3
"""
Test script for weight configurations, leading systems, refutation and the scripted E6 cases
"""

import sys
import os
from dataclasses import replace
from fractions import Fraction
from typing import Dict, Optional

# Add the current directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from jetspace.cases import Fixture
from jetspace.config import EngineBudget
from jetspace.errors import CaseScriptError
from jetspace.jets import S, family_system
from jetspace.multipoly import (Polynomial, WeightVector, collect, leading_form, parse_polynomial, parse_variable,
                                substitute)
from jetspace.wedge import (AuditScript, BranchOutcome, BranchScript, ClosureKind, RefutationCertificate, Verdict,
                            check_projective, default_symbols, enumerate_configurations, homogeneity_weights,
                            leading_system, presolve, problem_for_case, refute, refute_projective,
                            refute_with_specialization, run_branch, run_noninclusion_case, specialize,
                            tabulated_leading_form, validate_certificate, weight_constraints)

P = parse_polynomial
FIXTURE = Fixture.load()


def _problem(source: str, target: str):
    script = FIXTURE.case_for((source, target))
    return problem_for_case(FIXTURE.surface, FIXTURE.divisor(source), FIXTURE.divisor(target), script), script


def test_default_symbols():
    print("🧪 Default symbols")
    assert default_symbols(FIXTURE.divisor("E4"), FIXTURE.divisor("E1")) == ["b2", "c3"]
    assert default_symbols(FIXTURE.divisor("E6"), FIXTURE.divisor("E1")) == ["a2", "b2", "b3", "c3", "c4", "c5"]
    assert default_symbols(FIXTURE.divisor("E6"), FIXTURE.divisor("E4")) == ["a2", "b3", "c4", "c5"]
    print("✅ Default symbols passed")


def test_weight_constraints_on_f6():
    """f_{1,6} = c3^2 + b2^3 attains its order twice only on 2*c3 = 3*b2"""
    print("🧪 Weight constraints of f_{1,6}")
    problem, _ = _problem("E4", "E1")
    alternatives = weight_constraints(problem, 6)
    assert len(alternatives) == 1, f"{len(alternatives)} alternatives"
    (constraint,) = alternatives[0].constraints
    assert constraint.rel == '==' and constraint.holds({"b2": Fraction(2), "c3": Fraction(3)})
    assert not constraint.holds({"b2": Fraction(1), "c3": Fraction(1)})
    print("✅ Weight constraints passed")


def test_configuration_audit():
    print("🧪 Dominant configurations of the (4,1) case")
    problem, _ = _problem("E4", "E1")
    found = enumerate_configurations(problem, equations=[6])
    assert len(found) == 1, f"{len(found)} configurations over f_6"
    assert found[0].integral_witness() == {"b2": 2, "c3": 3}
    assert len(found[0].attaining[6]) == 2, "both monomials of f_6 attain the minimum"
    assert enumerate_configurations(problem, equations=[6, 7]) == [], "f_7 forces c3 = 2*b2, incompatible with f_6"
    assert tabulated_leading_form(problem, 6, found[0].witness) == P("c3^2 + b2^3")
    assert leading_system(problem, found[0], equations=[6]) == [P("c3^2 + b2^3")]
    print("✅ Dominant configurations passed")


def test_monomial_case():
    print("🧪 Case (4,1)")
    problem, script = _problem("E4", "E1")
    report = run_noninclusion_case(problem, script)
    assert report.certified, f"(4,1) is open: {[b.detail for b in report.branches]}"
    assert report.branches[0].outcome is BranchOutcome.CLOSED_MONOMIAL
    assert report.audit is not None and report.audit.covered, "the single configuration lies in the branch cell"
    assert report.to_dict()["verdict"] == "certified"
    print("✅ Case (4,1) passed")


def test_refuted_case():
    print("🧪 Case (5,2)")
    problem, script = _problem("E5", "E2")
    report = run_branch(problem, script.branches[0])
    assert report.outcome is BranchOutcome.CLOSED_REFUTED, f"(5,2): {report.detail}"
    (cert,) = report.certificates
    assert cert.verdict is Verdict.UNSAT
    assert validate_certificate(cert), "recomputing the certificate gives the same basis"
    print("✅ Case (5,2) passed")


def test_projective_cases():
    print("🧪 Projective cases (4,2), (6,4), (6,1)")
    for source, target in (("E4", "E2"), ("E6", "E4"), ("E6", "E1")):
        problem, script = _problem(source, target)
        report = run_branch(problem, script.branches[0])
        assert report.outcome is BranchOutcome.CLOSED_PROJECTIVE, f"({source},{target}): {report.detail}"
        assert len(report.certificates) == len(script.branches[0].unknowns), "one certificate per unknown"
        assert {c.unknown for c in report.certificates} == set(script.branches[0].unknowns)
        assert all(c.verdict is Verdict.UNSAT for c in report.certificates)
    print("✅ Projective cases passed")


def test_projective_variant_with_complex_root_stays_open():
    """b4^3 = -1 with b4 != -1 leaves nonzero solutions for the (6,1) system"""
    print("🧪 (6,1) with a non-real cube root of -1")
    problem, script = _problem("E6", "E1")
    branch = replace(script.branches[0], substitutions={"a3": "1", "c6": "0"}, relations=["b4^3 + 1"],
                     exclusions=["b4 + 1"], expect=None)
    report = run_branch(problem, branch)
    assert report.outcome is BranchOutcome.OPEN, "the variant must not be refuted"
    by_unknown = {c.unknown: c.verdict for c in report.certificates}
    assert by_unknown["b2"] is not Verdict.UNSAT, f"verdicts {by_unknown}"
    print("✅ Non-real cube root variant passed")


def test_refute_and_presolve():
    print("🧪 Refutation engine")
    gens, guards, log = presolve([P("a1 - 1"), P("a1*b2")], [P("b2")])
    assert gens == [] and [str(v) for v, _ in log] == ["a1", "b2"], f"presolve log {log}"
    assert len(guards) == 1 and guards[0].is_zero(), "the guard b2 collapses to zero"

    cert = refute([P("a1 - 1"), P("a1*b2")], [P("b2")])
    assert cert.verdict is Verdict.UNSAT and "vanishes" in cert.note

    unit = refute([P("a1*b2 - 1"), P("a1")], [])
    assert unit.verdict is Verdict.UNSAT and len(unit.basis) == 1 and unit.basis[0].is_constant()
    assert validate_certificate(unit)

    sat = refute([P("a1^2 + b2^2")], [P("a1"), P("b2")])
    assert sat.verdict is Verdict.SAT, f"a1 = 1, b2 = i is a solution: {sat.note}"
    a1, b2 = sat.witness[parse_variable("a1")], sat.witness[parse_variable("b2")]
    assert a1 * a1 + b2 * b2 == 0 and a1 and b2
    restored = RefutationCertificate.from_dict(sat.to_dict())
    assert validate_certificate(restored), "a certificate survives its JSON form"
    tampered = RefutationCertificate.from_dict(dict(unit.to_dict(), verdict="sat"))
    assert not validate_certificate(tampered), "a wrong verdict must not validate"
    fixed = {parse_variable("b2"): P("-1")}
    assert refute_with_specialization([P("a1^2 + b2")], [P("a1")], fixed).verdict is Verdict.SAT
    excluded = refute_with_specialization([P("a1^2 + b2")], [P("a1")], fixed,
                                          exclusions=[P("a1 - 1"), P("a1 + 1")])
    assert excluded.verdict is Verdict.UNSAT, "a1^2 = 1 with a1 != 1, -1 has no solution"
    assert excluded.saturating_product() == P("a1*(a1 - 1)*(a1 + 1)")
    try:
        RefutationCertificate.from_dict({"system": ["a1"]})
        assert False, "a certificate without a verdict is malformed"
    except CaseScriptError:
        pass
    print("✅ Refutation engine passed")


def test_specialization_rules():
    print("🧪 Specialization rules")
    chained = specialize(P("c5 + a2"), {parse_variable("c5"): P("2*i*a2*a3"), parse_variable("a2"): P("1"),
                                        parse_variable("a3"): P("1")})
    assert chained == P("2*i + 1"), f"substitutions are applied until none is left: {chained}"
    try:
        specialize(P("a1"), {parse_variable("a1"): P("b2"), parse_variable("b2"): P("a1")})
        assert False, "cyclic substitutions must be rejected"
    except CaseScriptError:
        pass
    assert homogeneity_weights([P("Z^2*Ct + B^3")], [P("Z"), P("Ct"), P("B")]) is not None
    for system, subs, reason in (
        ([P("Z^2 + a1")], {parse_variable("a1"): P("1")}, "Z^2 + 1 is not homogeneous"),
        ([P("a1 - 1")], {parse_variable("a1"): P("2")}, "a1 - 1 becomes a nonzero constant"),
        ([P("Z*a1")], {parse_variable("Z"): P("1")}, "unknowns may not be specialized"),
    ):
        try:
            check_projective(system, [P("Z")], subs)
            assert False, reason
        except CaseScriptError:
            pass
    certs = refute_projective([P("Z^2 + B^2"), P("Z*B")], [P("Z"), P("B")], {})
    assert [c.unknown for c in certs] == ["Z", "B"] and all(c.verdict is Verdict.UNSAT for c in certs)
    print("✅ Specialization rules passed")


def test_branch_script_validation():
    print("🧪 Branch script validation")
    for data, reason in (
        ({"name": "x", "closure": "refute", "substitutions": {"a1": "0"}}, "refute cannot specialize"),
        ({"name": "x", "closure": "projective"}, "projective needs unknowns"),
        ({"name": "x", "closure": "guess"}, "unknown closure"),
        ({"name": "x", "closure": "monomial", "expect": "closed"}, "unknown expected outcome"),
        ({"name": "x", "closure": "monomial", "colour": "red"}, "unknown field"),
    ):
        try:
            BranchScript.from_dict(data)
            assert False, reason
        except CaseScriptError:
            pass
    branch = BranchScript.from_dict({"name": "x", "closure": "refute", "normalize": {"a1": 3}})
    assert branch.closure is ClosureKind.REFUTE
    assert branch.plan().overrides[parse_variable("a1")] == P("s^3")
    assert BranchScript.from_dict(branch.to_dict()) == branch
    print("✅ Branch script validation passed")


def test_weights_closure_needs_live_search():
    """An empty search closes a weights branch only when the same equations have configurations elsewhere"""
    print("🧪 Weights closures of the (6,2) case")
    problem, script = _problem("E6", "E2")
    branches = {b.name: b for b in script.branches}
    high = run_branch(problem, branches["c4-high"])
    assert high.outcome is BranchOutcome.CLOSED_WEIGHTS and high.configurations == 0, high.detail

    everywhere = run_branch(problem, replace(branches["c4-high"], name="everywhere", cell=[], equations=[6, 7]))
    assert everywhere.outcome is BranchOutcome.OPEN, "an empty cell must not close"
    assert everywhere.configurations, "f_6 and f_7 have dominant configurations"

    with_f4 = run_branch(problem, replace(branches["c4-high"], equations=[4, 6, 7]))
    assert with_f4.outcome is BranchOutcome.OPEN and "vacuous" in with_f4.detail, with_f4.detail
    assert weight_constraints(problem, 4) == [], "c2 is no symbol here, so f_{2,4} never attains a minimum twice"

    try:
        BranchScript.from_dict({"name": "x", "closure": "weights", "cell": ["2*a2 < a1"]})
        assert False, "a weights closure must name its equations"
    except CaseScriptError:
        pass
    print("✅ Weights closures passed")


def test_audit_decides_the_verdict():
    print("🧪 Audit coverage and the case verdict")
    problem, script = _problem("E4", "E1")
    narrow = replace(script, branches=[replace(script.branches[0], cell=["2*c3 == 3*b2", "b2 <= 3"])])
    report = run_noninclusion_case(problem, narrow)
    assert report.branches[0].outcome is BranchOutcome.CLOSED_MONOMIAL, "the witness b2 = 2 sits in the cell"
    assert report.audit.uncovered and not report.audit.covered, "b2 > 3 escapes the cell"
    assert not report.certified and report.to_dict()["verdict"] == "open"
    assert run_noninclusion_case(problem, narrow, audit=False).certified, "without an audit the branches decide"

    cut = replace(script, audit=AuditScript([6, 7]))
    short = run_noninclusion_case(problem, cut, EngineBudget(audit_nodes=1))
    assert not short.audit.complete and "incomplete" in short.audit.note
    assert short.verdict == "open", "an audit cut short proves nothing"

    miscounted = replace(script, audit=replace(script.audit, expect_configurations=2))
    flagged = run_noninclusion_case(problem, miscounted)
    assert flagged.certified and not flagged.audit.as_expected, "a count mismatch is only flagged"
    assert flagged.to_dict()["audit"]["as_expected"] is False
    print("✅ Audit coverage passed")


REWRITE_E2 = {"c2": "i*a1^2", "c3": "2*i*a1*a2"}
SHALLOW = {"a": 3, "b": 4, "c": 6}


def _rewritten_e2(problem, u: int, extra: Optional[Dict[str, str]] = None) -> Polynomial:
    """f_{2,u} on c2 = i*a1^2, c3 = 2*i*a1*a2, with coefficients past a3, b4, c6 dropped"""
    p = problem.equation(u)
    assignment = {v: Polynomial() for v in p.variables() if v.primary > SHALLOW[v.family]}
    for name, text in list(REWRITE_E2.items()) + list((extra or {}).items()):
        assignment[parse_variable(name)] = P(text)
    return substitute(p, assignment)


def _minimal_part(problem, u: int, weights: Dict[str, int], extra: Dict[str, str]) -> Polynomial:
    """Least-weight terms, with Ct standing for c4 - i*a2^2"""
    lead = leading_form(_rewritten_e2(problem, u, extra), WeightVector.from_names(weights))
    return substitute(lead, {parse_variable("Ct"): P("c4 - i*a2^2")})


def test_tabulated_e2_systems_match_rewritten_equations():
    print("🧪 Tabulated (6,2) systems")
    problem, script = _problem("E6", "E2")
    branches = {b.name: b for b in script.branches}
    source = family_system(FIXTURE.surface, FIXTURE.divisor("E6"), 12).equation(12)

    large = [P(text) for text in branches["large-a2"].system]
    assert large == [_rewritten_e2(problem, u) for u in range(6, 12)] + [source], "large-a2"

    base = {"a1": 7, "a2": 2, "a3": 0, "b4": 0, "c4": 4, "c6": 0, "Ct": 4}
    separate = {"c4": "Ct + i*a2^2"}
    for name, weights, equations, extra, closing in (
        ("b2-balanced", {"b2": 6, "b3": 3, "c5": 3}, range(6, 8), separate, []),
        ("c5-tied", {"b2": 7, "b3": 3, "c5": 2}, range(6, 12), separate, [source]),
        ("b3-tied", {"b2": 7, "b3": 2, "c5": 3}, range(6, 12), separate, [source]),
        ("all-tied", {"b2": 7, "b3": 2, "c5": 2}, range(9, 12), {"c4": "i*a2^2"}, []),
    ):
        point = dict(base, **weights)
        inside = {key: Fraction(value) for key, value in point.items()}
        assert all(c.holds(inside) for c in branches[name].cell_constraints()), f"{name}: {point} is outside"
        derived = [_minimal_part(problem, u, point, extra) for u in equations] + closing
        tabulated = [P(text) for text in branches[name].system]
        assert tabulated == derived, f"{name}: {[str(p) for p in derived]}"
    print("✅ Tabulated (6,2) systems passed")


def test_printed_42_system_against_its_derivation():
    """a1 = Z*s, b2 = B*s, c4 = i*a2^2 + Ct*s in the rewritten f_{2,6..8}"""
    print("🧪 (4,2) system against its derivation")
    problem, script = _problem("E4", "E2")
    branch = script.branches[0]
    rewrite = {parse_variable(name): P(text) for name, text in REWRITE_E2.items()}
    series = {parse_variable("a1"): P("Z*s"), parse_variable("b2"): P("B*s"),
              parse_variable("c4"): P("i*a2^2 + Ct*s")}
    derived = []
    for u, order in ((6, 3), (7, 2), (8, 1)):
        coefficients = collect(substitute(substitute(problem.equation(u), rewrite), series), S)
        low = min(e for e, c in coefficients.items() if c)
        assert low == order, f"f_{{2,{u}}} starts at s^{low}"
        derived.append(coefficients[order])
    assert derived[0] == P("B^3 + 2*i*Z^2*Ct + 4*a3*Z^3")
    assert derived[1] == P("3*B^2*b3 + 2*i*c5*Z^2 + 12*a2*a3*Z^2 + 4*i*a2*Ct*Z")
    assert derived[2] == P("3*B*b3^2 + 4*i*a2*c5*Z + 12*a2^2*a3*Z + 2*i*a2^2*Ct")

    fixed = {parse_variable(name): P(text) for name, text in branch.substitutions.items()}
    printed = [specialize(P(text), fixed) for text in branch.system]
    ours = [specialize(p, fixed) for p in derived]
    assert ours[1] == printed[1], "the middle entries agree once a2 = 1"
    assert ours[0] != printed[0] and ours[2] != printed[2]
    root = {parse_variable("Z"): P("1"), parse_variable("Ct"): P("2*i"), parse_variable("B"): P("0")}
    assert all(substitute(p, root).is_zero() for p in ours), "Z = 1, Ct = 2*i, B = 0 solves the derived system"
    assert not substitute(printed[2], root).is_zero(), "the printed system has no such root"
    print("✅ (4,2) derivation passed")


SIX_ONE = [
    "c3^2 + b2^3",
    "2*c3*c4 + 3*b2^2*b3",
    "c4^2 + 2*c3*c5 + 3*b2^2*b4 + 3*b2*b3^2 + a2^4",
    "2*c4*c5 + 2*c3*c6 + b3^3 + 6*b2*b3*b4 + 4*a2^3*a3",
    "c5^2 + 2*c4*c6 + 3*b3^2*b4 + 3*b2*b4^2 + 6*a2^2*a3^2",
    "2*c5*c6 + 3*b3*b4^2 + 4*a2*a3^3",
]


def test_six_one_with_complex_cube_root():
    """a3 = 0, c6 = 1, b4^3 = -1 with b4 != -1 and every unknown nonzero has no solution"""
    print("🧪 (6,1) system at a3 = 0, c6 = 1")
    system = [P(text) for text in SIX_ONE]
    unknowns = [P(name) for name in ("a2", "b2", "b3", "c3", "c4", "c5")]
    fixed = {parse_variable("a3"): P("0"), parse_variable("c6"): P("1")}
    cert = refute_with_specialization(system, unknowns, fixed, relations=[P("b4^3 + 1")], exclusions=[P("b4 + 1")])
    assert cert.verdict is Verdict.UNSAT, cert.note

    # at b4 = -1 a solution survives, with a2 = 0
    point = {"a2": "0", "b2": "-1", "b3": "2", "c3": "-1", "c4": "3", "c5": "-3", "b4": "-1", "a3": "0", "c6": "1"}
    values = {parse_variable(name): P(text) for name, text in point.items()}
    assert all(substitute(p, values).is_zero() for p in system)
    assert substitute(P("a3^4 + b4^3 + c6^2"), values).is_zero(), "the point lies on the source variety"
    print("✅ (6,1) system at a3 = 0 passed")


def test_six_four_with_nonzero_coefficients():
    print("🧪 (6,4) system at a3 = 0")
    system = [P("2*i*a2^2*c5 + b3^3"), P("c5^2 + 2*i*c6*a2^2 + 3*b3^2*b4"), P("2*c5*c6 + 3*b3*b4^2"),
              P("c6^2 + b4^3")]
    nonzero = [P(name) for name in ("a2", "b3", "c5", "b4", "c6")]
    cert = refute_with_specialization(system, nonzero, {parse_variable("a3"): P("0")})
    assert cert.verdict is Verdict.UNSAT, cert.note
    assert validate_certificate(cert)
    print("✅ (6,4) system at a3 = 0 passed")


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 TESTING WEDGE STAGE")
    print("=" * 60)
    test_default_symbols()
    test_weight_constraints_on_f6()
    test_configuration_audit()
    test_monomial_case()
    test_refuted_case()
    test_projective_cases()
    test_projective_variant_with_complex_root_stays_open()
    test_refute_and_presolve()
    test_specialization_rules()
    test_branch_script_validation()
    test_weights_closure_needs_live_search()
    test_audit_decides_the_verdict()
    test_tabulated_e2_systems_match_rewritten_equations()
    test_printed_42_system_against_its_derivation()
    test_six_one_with_complex_cube_root()
    test_six_four_with_nonzero_coefficients()
    print("\n🎯 All wedge tests passed")
