"""Result documents printed by the command-line tool."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from invpta import __version__
from invpta.dsl import edge_ref, serialize

TOOL = "invpta"


@dataclass
class ResultDocument:
    command: str
    model_hash: str
    answer: dict
    text: str  # human-readable rendering of the answer
    timing: float = 0.0
    tool: str = TOOL
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def structured(self) -> dict:
        doc = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "model_hash": self.model_hash,
            "answer": self.answer,
            "timing": {"seconds": round(self.timing, 6)},
        }
        doc.update(self.extra)
        return doc


def model_hash(model) -> str:
    return "sha256:" + hashlib.sha256(serialize(model).encode("utf-8")).hexdigest()


def fraction_text(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def run_steps(model, run) -> list:
    return [{"delay": fraction_text(s.delay), "edge": edge_ref(model, s.edge)} for s in run.steps]


def region_entries(params, region) -> list:
    return [{"param": p, "sign": "pos" if s else "zero"} for p, s in zip(params, region.signs)]


def emit(doc: ResultDocument, fmt: str = "text") -> bytes:
    if fmt == "text":
        text = doc.text if doc.text.endswith("\n") else doc.text + "\n"
        return text.encode("utf-8")
    if fmt == "structured":
        return (json.dumps(doc.structured(), indent=2) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")
