# Fixture and certificate access layer - JSON files under datasets/
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from jetspace.config import SCHEMA_VERSION, status
from jetspace.errors import FixtureError

DATASETS_PATH = Path(__file__).resolve().parent.parent / "datasets"
DEFAULT_FIXTURE = DATASETS_PATH / "e6.json"

REQUIRED_FIELDS = ("surface", "divisors", "test_functions")


def resolve_path(path: Union[str, Path, None]) -> Path:
    """Absolute path, bare names are looked up in datasets/."""
    if path is None:
        return DEFAULT_FIXTURE
    candidate = Path(path)
    if candidate.exists() or candidate.is_absolute():
        return candidate
    in_datasets = DATASETS_PATH / candidate
    return in_datasets if in_datasets.exists() else candidate


def read_json(path: Union[str, Path]) -> Any:
    """Parse a JSON file; syntax errors carry line and column."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise FixtureError(f"cannot read {path}: {e.strerror or e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureError(f"malformed JSON in {path.name}: {e.msg}", e.lineno, e.colno)


def dump_json(data: Dict) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Union[str, Path], data: Dict, stamp: bool = True) -> Path:
    path = Path(path)
    if stamp:
        data = dict(data)
        data.setdefault("schema_version", SCHEMA_VERSION)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_json(data))
    status(f"Wrote {path}", "✅")
    return path


def check_schema_version(data: Dict, what: str):
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise FixtureError(f"{what} has schema_version {version}, expected {SCHEMA_VERSION}")


class FixtureAccess:
    """
    Loads a fixture file and hands out its raw sections:
    surface, divisors with test orders, symmetry, intersection data, case scripts.
    """

    def __init__(self, path: Union[str, Path, None] = None):
        self.path = resolve_path(path)
        status(f"Loading fixture from: {self.path}")
        self.raw = read_json(self.path)
        if not isinstance(self.raw, dict):
            raise FixtureError(f"fixture {self.path.name} must be a JSON object")
        check_schema_version(self.raw, "fixture")
        missing = [name for name in REQUIRED_FIELDS if name not in self.raw]
        if missing:
            raise FixtureError(f"fixture {self.path.name} lacks {', '.join(missing)}")
        status(f"Fixture loaded: {len(self.divisors())} divisors, {len(self.cases())} case scripts", "✅")

    def surface(self) -> str:
        return self.raw["surface"]

    def divisors(self) -> List[Dict]:
        return list(self.raw.get("divisors", []))

    def test_functions(self) -> List[str]:
        return list(self.raw.get("test_functions", []))

    def symmetry(self) -> List[List[str]]:
        return [list(couple) for couple in self.raw.get("symmetry", [])]

    def intersection(self) -> Optional[Dict]:
        return self.raw.get("intersection")

    def cases(self) -> List[Dict]:
        return list(self.raw.get("cases", []))

    def jet_bound(self) -> int:
        return int(self.raw.get("jet_bound", 12))


def load_certificate(path: Union[str, Path]) -> Dict:
    data = read_json(path)
    if not isinstance(data, dict):
        raise FixtureError(f"certificate {Path(path).name} must be a JSON object")
    check_schema_version(data, "certificate")
    return data
