"""
Pipeline orchestration: fixture -> jets -> valuative -> wedge.

A fixture holds the surface equation, the exceptional divisors with their
orders on the test functions, the symmetry of the dual graph, optionally
the intersection matrix, and one case script per residual pair. `run_all`
closes every ordered pair either valuatively, by a wedge case, or by
symmetry from a closed representative.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from data.fixture_access import FixtureAccess
from jetspace.config import DEFAULT_JOBS, SCHEMA_VERSION, EngineBudget, status
from jetspace.errors import CaseScriptError, FixtureError, JetspaceError
from jetspace.jets import (DivisorRecord, FamilySystem, SurfaceEquation, contact_orders, factor_leading_form,
                           family_system, jet_leading_form, leading_derivatives, verify_recursion)
from jetspace.valuative import (IntersectionMatrix, NonInclusionTask, OrderTable, Pair, TaskStatus,
                                classify_pairs, in_lipman_cone, lipman_vector, pair_label, parse_pair,
                                partial_order_frame, residual_pairs, symmetry_map)
from jetspace.wedge import (CaseReport, CaseScript, RefutationCertificate, problem_for_case,
                            run_noninclusion_case, validate_certificate)

CERTIFIED = "certified"
PARTIAL = "partial: residual pairs open"


@dataclass
class Fixture:
    surface: SurfaceEquation
    table: OrderTable
    symmetry: Dict[str, str] = field(default_factory=dict)
    intersection: Optional[IntersectionMatrix] = None
    cases: Dict[Pair, CaseScript] = field(default_factory=dict)
    jet_bound: int = 12
    raw: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        names = set(self.table.names())
        for a, b in self.symmetry.items():
            if a not in names or b not in names:
                raise FixtureError(f"symmetry refers to unknown divisor {a if a not in names else b}")
        if self.intersection is not None:
            stray = [n for n in self.intersection.names if n not in names]
            if stray:
                raise FixtureError(f"intersection matrix refers to unknown divisors {stray}")
        for (j, i) in self.cases:
            if j not in names or i not in names:
                raise FixtureError(f"case script ({j},{i}) refers to an unknown divisor")

    @classmethod
    def from_dict(cls, data: Dict) -> 'Fixture':
        try:
            surface = SurfaceEquation.from_text(data["surface"])
            divisors = [DivisorRecord.from_dict(d) for d in data["divisors"]]
            table = OrderTable(divisors, list(data["test_functions"]))
        except KeyError as error:
            raise FixtureError(f"fixture lacks field {error}")
        intersection = None
        block = data.get("intersection")
        if block:
            if "matrix" in block:
                intersection = IntersectionMatrix(block["matrix"], list(block.get("names", table.names())))
            else:
                names = list(block.get("names", table.names()))
                intersection = IntersectionMatrix.from_graph(names, block.get("self_intersections", {}),
                                                             block.get("edges", []))
        cases = {}
        for entry in data.get("cases", []):
            script = CaseScript.from_dict(entry)
            key = (script.source, script.target)
            if key in cases:
                raise FixtureError(f"two case scripts for {pair_label(key)}")
            cases[key] = script
        return cls(surface, table, symmetry_map(data.get("symmetry", [])), intersection, cases,
                   int(data.get("jet_bound", 12)), data)

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> 'Fixture':
        return cls.from_dict(FixtureAccess(path).raw)

    def divisor(self, name: str) -> DivisorRecord:
        for d in self.table.divisors:
            if d.name == name or d.name == f"E{name}":
                return d
        raise FixtureError(f"unknown divisor {name}")

    def pair(self, text: str) -> Pair:
        return parse_pair(text, self.table)

    def case_for(self, pair: Pair) -> CaseScript:
        if pair not in self.cases:
            raise CaseScriptError(f"no case script for {pair_label(pair)}")
        return self.cases[pair]


# Jets

@dataclass
class JetsReport:
    system: FamilySystem
    leading_form: str
    factors: List[str]
    recursion_holds: bool
    derivatives: List[str]

    def to_dict(self) -> Dict:
        fs = self.system
        return {
            "divisor": fs.divisor.name,
            "mu": list(fs.divisor.mu),
            "k": fs.k,
            "o_i": fs.o_i,
            "o_ik": fs.o_ik,
            "equations": {str(j): str(p) for j, p in sorted(fs.reduced.items())},
            "leading_form": self.leading_form,
            "factors": self.factors,
            "recursion_holds": self.recursion_holds,
            "leading_derivatives": self.derivatives,
        }


def run_jets(fixture: Fixture, divisor: str, k: int) -> JetsReport:
    d = fixture.divisor(divisor)
    status(f"Expanding {k}-jets on the family of {d.name} (mu={d.mu})")
    fs = family_system(fixture.surface, d, k)
    lead = jet_leading_form(fixture.surface, d)
    factorization = factor_leading_form(fs.reduced[fs.o_i])
    report = JetsReport(fs, str(lead), [str(f) for f, _ in factorization.factors], verify_recursion(fs),
                        [str(p) for p in leading_derivatives(fs)])
    status(f"{d.name}: o_i={fs.o_i}, o_ik={fs.o_ik}, {len(fs.reduced)} equations", "✅")
    return report


# Valuative

@dataclass
class ValuativeReport:
    tasks: List[NonInclusionTask]
    residual: List[Pair]
    representatives: List[Pair]
    order_frame: pd.DataFrame
    poset_frame: pd.DataFrame
    lipman: Optional[List[int]] = None

    def to_dict(self) -> Dict:
        data = {
            "tasks": [t.to_dict() for t in self.tasks],
            "residual": [pair_label(p) for p in self.residual],
            "representatives": [pair_label(p) for p in self.representatives],
            "valuative_count": sum(1 for t in self.tasks if t.status is TaskStatus.PROVED_VALUATIVE),
        }
        if self.lipman is not None:
            data["lipman_vector"] = self.lipman
        return data


def run_valuative(fixture: Fixture) -> ValuativeReport:
    status(f"Valuative check over {len(fixture.table.names())} divisors")
    full, reduced = residual_pairs(fixture.table, fixture.symmetry)
    tasks = classify_pairs(fixture.table, fixture.symmetry)
    lipman = None
    if fixture.intersection is not None:
        lipman = lipman_vector(fixture.intersection)
        if not in_lipman_cone(fixture.intersection, lipman):
            status("Lipman vector fails the cone check", "⚠️")
    report = ValuativeReport(tasks, full, reduced, fixture.table.to_frame(), partial_order_frame(fixture.table),
                             lipman)
    status(f"{len(full)} residual pair(s), {len(reduced)} after symmetry: "
           f"{', '.join(pair_label(p) for p in reduced) or 'none'}", "📊")
    return report


# Wedge

def run_wedge(fixture: Fixture, pair: Pair, budget: Optional[EngineBudget] = None, audit: bool = True) -> CaseReport:
    script = fixture.case_for(pair)
    source, target = fixture.divisor(pair[0]), fixture.divisor(pair[1])
    problem = problem_for_case(fixture.surface, source, target, script)
    return run_noninclusion_case(problem, script, budget, audit)


def _case_job(raw: Dict, pair: Pair, budget: EngineBudget) -> Tuple[Pair, Dict, float]:
    """Worker entry point: rebuild the fixture and run one case."""
    started = time.perf_counter()
    fixture = Fixture.from_dict(raw)
    try:
        report = run_wedge(fixture, pair, budget).to_dict()
    except JetspaceError as error:
        report = {"source": pair[0], "target": pair[1], "verdict": "error",
                  "error": str(error), "stage": error.stage}
    return pair, report, time.perf_counter() - started


# Full run

@dataclass
class RunReport:
    fixture: str
    valuative: ValuativeReport
    tasks: List[NonInclusionTask]
    cases: Dict[Pair, Dict] = field(default_factory=dict)
    budget: EngineBudget = field(default_factory=EngineBudget)
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        closed = (TaskStatus.PROVED_VALUATIVE, TaskStatus.PROVED_WEDGE, TaskStatus.PROVED_BY_SYMMETRY)
        return CERTIFIED if all(t.status in closed for t in self.tasks) else PARTIAL

    def frame(self) -> pd.DataFrame:
        rows = [{"pair": pair_label(t.pair), "status": t.status.value, "witness": t.witness or "",
                 "by": pair_label(t.representative) if t.representative else ""} for t in self.tasks]
        return pd.DataFrame(rows, columns=["pair", "status", "witness", "by"])

    def case_frame(self) -> pd.DataFrame:
        rows = []
        for pair, case in sorted(self.cases.items()):
            branches = case.get("branches", [])
            rows.append({"pair": pair_label(pair), "verdict": case.get("verdict"),
                         "branches": len(branches),
                         "closed": sum(1 for b in branches if b.get("outcome") != "open")})
        return pd.DataFrame(rows, columns=["pair", "verdict", "branches", "closed"])

    def to_dict(self) -> Dict:
        counts = self.frame()["status"].value_counts().to_dict() if self.tasks else {}
        return {
            "schema_version": SCHEMA_VERSION,
            "fixture": self.fixture,
            "verdict": self.verdict,
            "budget": {"steps": self.budget.steps, "max_basis": self.budget.max_basis,
                       "audit_nodes": self.budget.audit_nodes},
            "valuative": self.valuative.to_dict(),
            "tasks": [t.to_dict() for t in self.tasks],
            "status_counts": {str(k): int(v) for k, v in sorted(counts.items())},
            "cases": {pair_label(p): case for p, case in sorted(self.cases.items())},
            "timing": {name: round(seconds, 3) for name, seconds in sorted(self.timing.items())},
        }


def close_tasks(tasks: List[NonInclusionTask], cases: Dict[Pair, Dict]) -> List[NonInclusionTask]:
    """Mark wedge pairs closed by their own case or by the case of their symmetric representative."""
    closed = []
    for task in tasks:
        if task.status is not TaskStatus.REQUIRES_WEDGE:
            closed.append(task)
            continue
        own = task.representative or task.pair
        case = cases.get(own)
        certified = case is not None and case.get("verdict") == CERTIFIED
        if not certified:
            status_value = TaskStatus.OPEN
        elif task.representative is not None:
            status_value = TaskStatus.PROVED_BY_SYMMETRY
        else:
            status_value = TaskStatus.PROVED_WEDGE
        closed.append(NonInclusionTask(task.source, task.target, status_value, task.witness, task.representative,
                                       pair_label(own) if certified else None))
    return closed


def run_all(fixture: Fixture, budget: Optional[EngineBudget] = None, jobs: int = DEFAULT_JOBS,
            name: str = "") -> RunReport:
    budget = budget or EngineBudget()
    timing: Dict[str, float] = {}

    started = time.perf_counter()
    for d in fixture.table.divisors:
        run_jets(fixture, d.name, max(fixture.jet_bound, family_system_order(fixture, d)))
    timing["jets"] = time.perf_counter() - started

    started = time.perf_counter()
    valuative = run_valuative(fixture)
    timing["valuative"] = time.perf_counter() - started

    pending = [p for p in valuative.representatives if p in fixture.cases]
    missing = [p for p in valuative.representatives if p not in fixture.cases]
    for pair in missing:
        status(f"No case script for {pair_label(pair)}", "⚠️")

    started = time.perf_counter()
    cases: Dict[Pair, Dict] = {}
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_case_job, fixture.raw, pair, budget) for pair in pending]
            results = [future.result() for future in futures]
    else:
        results = [_case_job(fixture.raw, pair, budget) for pair in pending]
    for pair, report, seconds in sorted(results):
        cases[pair] = report
        timing[f"wedge {pair_label(pair)}"] = seconds
    timing["wedge"] = time.perf_counter() - started

    tasks = close_tasks(valuative.tasks, cases)
    report = RunReport(name, valuative, tasks, cases, budget, timing)
    icon = "🎯" if report.verdict == CERTIFIED else "⚠️"
    status(f"Nash surjectivity for fixture {name or '(unnamed)'}: {report.verdict}", icon)
    return report


def family_system_order(fixture: Fixture, d: DivisorRecord) -> int:
    """Smallest k the family of d accepts: its contact order o_i."""
    return contact_orders(fixture.surface, d, 1)[0]


# Certificates

def _collect_certificates(data: Dict, trail: str = "") -> List[Tuple[str, Dict]]:
    if "verdict" in data and "system" in data and isinstance(data.get("system"), list):
        return [(trail or "certificate", data)]
    found = []
    for branch in data.get("branches", []):
        for n, cert in enumerate(branch.get("certificates", [])):
            label = f"{trail}{branch.get('name', '?')}"
            if cert.get("unknown"):
                label += f" [{cert['unknown']} != 0]"
            elif n:
                label += f" #{n + 1}"
            found.append((label, cert))
    for label, case in sorted(data.get("cases", {}).items()):
        found.extend(_collect_certificates(case, f"{label} "))
    return found


def validate_file_data(data: Dict, budget: Optional[EngineBudget] = None) -> List[Tuple[str, bool, str]]:
    """Re-check every certificate in a certificate, case report or run report."""
    results = []
    for label, raw in _collect_certificates(data):
        cert = RefutationCertificate.from_dict(raw)
        ok = validate_certificate(cert, budget)
        results.append((label, ok, cert.verdict.value))
        status(f"{label}: {cert.verdict.value} {'re-validated' if ok else 'does NOT re-validate'}",
               "✅" if ok else "❌")
    if not results:
        status("No certificates found", "⚠️")
    return results


def certified_unsat(results: List[Tuple[str, bool, str]]) -> bool:
    return bool(results) and all(ok for _, ok, _ in results)
