import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

DEFAULT_BUDGET = int(os.getenv('JETSPACE_BUDGET', '400000'))
DEFAULT_MAX_BASIS = int(os.getenv('JETSPACE_MAX_BASIS', '2000'))
DEFAULT_AUDIT_BUDGET = int(os.getenv('JETSPACE_AUDIT_BUDGET', '20000'))
DEFAULT_JOBS = int(os.getenv('JETSPACE_JOBS', '1'))
QUIET = os.getenv('JETSPACE_QUIET', '0') == '1'

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EngineBudget:
    """Caps carried through Gröbner runs and configuration searches."""

    steps: int = DEFAULT_BUDGET
    max_basis: int = DEFAULT_MAX_BASIS
    audit_nodes: int = DEFAULT_AUDIT_BUDGET

    def __post_init__(self):
        if self.steps <= 0 or self.max_basis <= 0 or self.audit_nodes <= 0:
            raise ValueError("budgets must be positive")

    @classmethod
    def with_steps(cls, steps: Optional[int]) -> 'EngineBudget':
        if steps is None:
            return cls()
        return cls(steps=steps)


def status(message: str, icon: str = "🔍"):
    if not QUIET:
        print(f"{icon} {message}")
