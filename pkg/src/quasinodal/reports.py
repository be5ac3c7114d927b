"""Value types emitted by the solvers: node partitions and solve reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

from .errors import InfeasiblePartition


@dataclass(frozen=True)
class NodalPartition:
    """Ordered node radii 0 < rho_1 < ... < rho_k inside (0, R)."""

    radii: tuple[float, ...] = ()
    R: float = math.inf
    min_sep: float = 0.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if self.min_sep < 0:
            raise InfeasiblePartition("min_sep must be nonnegative")
        edges = (0.0, *radii, self.R)
        for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            if not b - a >= self.min_sep or b <= a:
                raise InfeasiblePartition(
                    f"gap {j} between {a:.6g} and {b:.6g} is below min_sep={self.min_sep:.6g}"
                )

    @property
    def k(self) -> int:
        return len(self.radii)

    def annuli(self) -> list[tuple[float, float]]:
        edges = (0.0, *self.radii, self.R)
        return list(zip(edges[:-1], edges[1:]))

    def to_dict(self) -> dict:
        return {"k": self.k, "radii": list(self.radii), "R": self.R, "min_sep": self.min_sep}

    @classmethod
    def from_dict(cls, d: dict) -> "NodalPartition":
        return cls(tuple(d["radii"]), d["R"], d["min_sep"])


@dataclass
class SolveReport:
    energy: float
    nehari_residuals: list[float]
    el_residual: float
    node_count: int
    partition: NodalPartition
    iterations: int
    converged: bool
    grid_meta: dict
    mode: str
    kind: str = "ground"
    sign: int = 1
    component_energies: list[float] = field(default_factory=list)
    trace: list[tuple[int, float, float]] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["partition"] = self.partition.to_dict()
        d["trace"] = [list(t) for t in self.trace]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolveReport":
        d = dict(d)
        d["partition"] = NodalPartition.from_dict(d["partition"])
        d["trace"] = [tuple(t) for t in d.get("trace", [])]
        return cls(**d)
