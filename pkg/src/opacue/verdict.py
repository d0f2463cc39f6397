"""Verdict and witness types shared by all verification routes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .system import MetricSystem, OpacityNotion


@dataclass(frozen=True)
class Witness:
    """A secret path no delta-close non-secret path can explain away.

    For the delayed notions the revealing instant marks the position along
    the path at which the visit to a secret state is exposed.
    """

    states: tuple[int, ...]
    inputs: tuple[int, ...]
    revealing_instant: Optional[int] = None

    def to_report(self, sys: MetricSystem) -> dict:
        return {
            "states": [sys.names[s] for s in self.states],
            "inputs": [sys.inputs[u] for u in self.inputs],
            "revealing_instant": self.revealing_instant,
        }


@dataclass(frozen=True)
class Verdict:
    opaque: bool
    notion: OpacityNotion
    delta: float
    witness: Optional[Witness] = None
    stats: dict = field(default_factory=dict)

    def to_report(self, sys: MetricSystem) -> dict:
        return {
            "opaque": self.opaque,
            "notion": self.notion.label(),
            "delta": self.delta,
            "witness": None if self.witness is None else self.witness.to_report(sys),
            "stats": dict(self.stats),
        }
