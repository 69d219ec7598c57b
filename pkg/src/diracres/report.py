"""Verification report: ordered check records, JSON/text rendering, schema validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .checks import FLAGGED, MATCH, MISMATCH, CheckRecord

__all__ = ["VerificationReport", "load_schema", "validate_report"]


def load_schema() -> dict:
    return json.loads(resources.files("diracres").joinpath("data/report.schema.json").read_text(encoding="utf-8"))


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not fit the shipped schema."""
    jsonschema.validate(doc, load_schema())


@dataclass
class VerificationReport:
    suite: str
    dims: tuple[int, ...]
    records: list[CheckRecord] = field(default_factory=list)
    timing: bool = True

    def __post_init__(self):
        ids = [r.check_id for r in self.records]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise ValueError(f"duplicate check ids: {sorted(dup)}")

    def counts(self) -> dict[str, int]:
        out = {MATCH: 0, MISMATCH: 0, FLAGGED: 0}
        for r in self.records:
            out[r.status] += 1
        out["total"] = len(self.records)
        return out

    @property
    def ok(self) -> bool:
        return all(r.status != MISMATCH for r in self.records)

    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def as_dict(self) -> dict:
        recs = []
        for r in self.records:
            d = r.as_dict()
            if not self.timing:
                d["wall-time"] = 0.0
            recs.append(d)
        return {"suite": self.suite, "dims": list(self.dims), "records": recs, "summary": self.counts()}

    def to_json(self) -> str:
        doc = self.as_dict()
        validate_report(doc)
        return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [f"suite={self.suite} dims={','.join(map(str, self.dims))}"]
        width = max((len(r.check_id) for r in self.records), default=0)
        for r in self.records:
            t = f"{r.wall_time:8.3f}s" if self.timing else ""
            lines.append(f"{r.status:<18} {r.check_id:<{width}}  {r.ref:<32} {t}".rstrip())
            if r.status != MATCH:
                if r.note:
                    lines.append(f"    note: {r.note}")
                for label, value in r.candidates.items():
                    lines.append(f"    {label}: {value}")
                if r.status == MISMATCH:
                    lines.append(f"    residual: {r.residual}")
        c = self.counts()
        lines.append(f"{c[MATCH]} match, {c[MISMATCH]} mismatch, {c[FLAGGED]} flagged-convention, {c['total']} total")
        return "\n".join(lines) + "\n"
