"""Check reports: residual tables, theorem-audit tables, JSON/text rendering.

A report is deterministic for a fixed config and seed: the JSON body is
serialized with sorted keys and differs between identical runs only in the
`timestamp` field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

VERDICTS = ("PASS", "FAIL", "SKIPPED", "CONSISTENT", "VACUOUS", "VIOLATION")

# Index conventions used everywhere downstream; echoed in every report so a
# reader can interpret the contracted tensors without guessing.
CONVENTION = (
    "R3: R^i_kl = l^j R^i_jkl; "
    "R2: R^i_j = l^m R^i_mjl l^l; "
    "flag K(u): g_ir R^r_k u^i u^k / (g(u,u) - (l.u)^2); "
    "reconstruction: R^i_hkl = d/dy^h (y^j R^i_jkl) + D^i_hkl; "
    "commutation RHS: -(dR^i_kl/dy^m) Adot^m_hp + R Gamma' terms, "
    "derivative slot treated tensorially"
)


@dataclass
class CheckRow:
    name: str
    residual: float
    tol: float
    verdict: str
    worst_sample: int | None = None
    mode: str = "ad"
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "residual": self.residual,
            "tol": self.tol,
            "verdict": self.verdict,
            "worst_sample": self.worst_sample,
            "mode": self.mode,
            "note": self.note,
        }


@dataclass
class TheoremRow:
    name: str
    status: str  # CONSISTENT | VACUOUS | VIOLATION
    hypotheses: dict  # name -> {"residual": float, "tol": float, "holds": bool}
    conclusions: dict
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "hypotheses": self.hypotheses,
            "conclusions": self.conclusions,
            "note": self.note,
        }


@dataclass
class CheckReport:
    """Residual tables, verdicts and provenance for one run (or one check)."""

    title: str = "finslerlab report"
    version: str = "0.1.0"
    convention: str = CONVENTION
    config: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    theorems: list = field(default_factory=list)
    timestamp: str = ""

    @classmethod
    def single_section(cls, title: str, rows, sample_count: int) -> "CheckReport":
        return cls(title=title, rows=list(rows),
                   provenance={"sample_count": sample_count})

    # -- verdict helpers ----------------------------------------------------

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        bad = {"FAIL", "VIOLATION"}
        return not (
            any(r.verdict in bad for r in self.rows)
            or any(t.status in bad for t in self.theorems)
        )

    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def extend(self, other: "CheckReport"):
        self.rows.extend(other.rows)
        self.theorems.extend(other.theorems)

    # -- serialization --------------------------------------------------------

    def stamp(self):
        self.timestamp = datetime.now(timezone.utc).isoformat()

    def as_dict(self) -> dict:
        return {
            "title": self.title,
            "version": self.version,
            "convention": self.convention,
            "config": self.config,
            "provenance": self.provenance,
            "checks": [r.as_dict() for r in self.rows],
            "theorems": [t.as_dict() for t in self.theorems],
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"{self.title} (finslerlab {self.version})"]
        if self.provenance:
            prov = ", ".join(f"{k}={v}" for k, v in sorted(self.provenance.items()))
            lines.append(f"provenance: {prov}")
        lines.append(f"conventions: {self.convention}")
        if self.rows:
            name_w = max(len(r.name) for r in self.rows)
            lines.append("")
            lines.append(
                f"{'check'.ljust(name_w)}  {'residual':>12}  {'tol':>9}  "
                f"{'verdict':<10} {'mode':<4} worst"
            )
            for r in self.rows:
                worst = "-" if r.worst_sample is None else f"#{r.worst_sample}"
                note = f"  ({r.note})" if r.note else ""
                lines.append(
                    f"{r.name.ljust(name_w)}  {r.residual:12.3e}  {r.tol:9.1e}  "
                    f"{r.verdict:<10} {r.mode:<4} {worst}{note}"
                )
        if self.theorems:
            name_w = max(len(t.name) for t in self.theorems)
            lines.append("")
            lines.append(f"{'implication'.ljust(name_w)}  status")
            for t in self.theorems:
                note = f"  ({t.note})" if t.note else ""
                lines.append(f"{t.name.ljust(name_w)}  {t.status}{note}")
        lines.append("")
        return "\n".join(lines)
