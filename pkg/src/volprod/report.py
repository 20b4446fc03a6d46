"""Result records: Monte Carlo estimates and named check outcomes."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

RELATIONS = ("<=", ">=", "=")


@dataclass(frozen=True)
class McEstimate:
    """A stochastic (or exact, with ``std_error == 0``) scalar estimate."""

    value: float
    std_error: float
    samples: int
    seed: Optional[int]
    method: str = "mc"
    workers: int = 1

    def within(self, target: float, k: float = 4.0) -> bool:
        return abs(self.value - target) <= k * self.std_error

    @classmethod
    def exact(cls, value: float) -> "McEstimate":
        return cls(float(value), 0.0, 0, None, method="exact")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


def digest(*inputs: Any) -> str:
    """Short stable hash of JSON-serializable inputs (bodies via ``to_json``)."""
    payload = json.dumps(_jsonable(list(inputs)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of comparing ``lhs <relation> rhs`` within ``tolerance``.

    With ``relative`` the band is ``tolerance * max(1, |rhs|)``; otherwise it
    is ``tolerance`` itself (Monte Carlo checks pass 4 standard errors here).
    ``equal`` records whether the two sides agree within the band, which is
    how equality cases of inequalities are flagged.
    """

    name: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    passed: bool
    equal: bool
    relative: bool = True
    inputs_digest: str = ""
    seed: Optional[int] = None
    samples: int = 0
    note: str = ""
    details: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float, relation: str, tolerance: float, *,
                relative: bool = True, inputs: tuple = (), seed: Optional[int] = None,
                samples: int = 0, note: str = "", details: Optional[dict] = None,
                require: bool = True) -> "CheckReport":
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        lhs, rhs = float(lhs), float(rhs)
        band = tolerance * max(1.0, abs(rhs)) if relative else tolerance
        equal = abs(lhs - rhs) <= band
        if relation == "=":
            ok = equal
        elif relation == "<=":
            ok = lhs <= rhs + band
        else:
            ok = lhs >= rhs - band
        return cls(name, lhs, rhs, relation, float(tolerance), bool(ok and require), bool(equal),
                   relative, digest(*inputs) if inputs else "", seed, int(samples), note,
                   _jsonable(details or {}))

    @property
    def band(self) -> float:
        return self.tolerance * max(1.0, abs(self.rhs)) if self.relative else self.tolerance

    def to_json(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return _jsonable(out)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        eq = " (equality)" if self.equal and self.relation != "=" else ""
        return (f"[{status}] {self.name}: {self.lhs:.10g} {self.relation} {self.rhs:.10g}"
                f" (tol {self.tolerance:.2g}{' rel' if self.relative else ' abs'}){eq}"
                + (f" -- {self.note}" if self.note else ""))
