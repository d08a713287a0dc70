"""Hierarchical bi-objective synthetic benchmarks with known Pareto fronts.

Both problems embed the classical DTLZ2/DTLZ7 geometry behind a hierarchical
genome: the first two continuous variables are always active, while every
tail variable is gated by its own binary switch. A projection fills inactive
tails with a variant-specific neutral value chosen so the analytic front
stays reachable, and a coupling regularizer penalizes active tails that
disagree with their parent variable under a chain or binary-tree topology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import nondominated_mask
from .space import (COND_CONTINUOUS, CONTINUOUS, DISCRETE, ConfigSpace,
                    DecodedConfig, VariableSpec)

HDTLZ2 = "hdtlz2"
HDTLZ7 = "hdtlz7"
VARIANTS = (HDTLZ2, HDTLZ7)

NEUTRAL = {HDTLZ2: 0.5, HDTLZ7: 0.0}


def chain_parent(j: int) -> int:
    return j - 1


def tree_parent(j: int) -> int:
    return (j - 3) // 2 + 2


def benchmark_space(n: int) -> ConfigSpace:
    """Genome with n continuous variables and one gate per tail variable.

    Layout: z1, z2, then (gate_j, z_j) pairs for j = 3..n, each z_j active
    only when its gate is on.
    """
    if n < 3:
        raise ValueError("need at least 3 continuous variables")
    variables = [
        VariableSpec(1, "z1", CONTINUOUS, bounds=(0.0, 1.0)),
        VariableSpec(2, "z2", CONTINUOUS, bounds=(0.0, 1.0)),
    ]
    idx = 3
    for j in range(3, n + 1):
        variables.append(VariableSpec(idx, f"gate{j}", DISCRETE, candidates=("off", "on")))
        variables.append(VariableSpec(idx + 1, f"z{j}", COND_CONTINUOUS,
                                      bounds=(0.0, 1.0), parent=(idx, ("on",))))
        idx += 2
    return ConfigSpace(variables=tuple(variables))


@dataclass(frozen=True)
class HBenchProblem:
    """One benchmark instance: variant, size, topology and coupling weight."""

    variant: str
    n: int = 12
    topology: str = "chain"
    gamma: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.topology not in ("chain", "tree"):
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.n < 3:
            raise ValueError("need at least 3 continuous variables")
        if self.gamma < 0:
            raise ValueError("coupling coefficient must be non-negative")

    @property
    def neutral(self) -> float:
        return NEUTRAL[self.variant]

    def space(self) -> ConfigSpace:
        return benchmark_space(self.n)

    def parent(self, j: int) -> int:
        return chain_parent(j) if self.topology == "chain" else tree_parent(j)

    def project(self, decoded: DecodedConfig) -> tuple[np.ndarray, tuple[int, ...]]:
        """Continuous vector in [0,1]^n plus the active tail indices.

        Inactive tails take the variant's neutral value.
        """
        z = np.full(self.n, self.neutral)
        z[0] = decoded.values[0]
        z[1] = decoded.values[1]
        active = []
        for j in range(3, self.n + 1):
            pos = 2 * j - 3          # 0-based position of z_j in the genome
            if decoded.active[pos]:
                z[j - 1] = decoded.values[pos]
                active.append(j)
        return z, tuple(active)

    def coupling(self, z: np.ndarray, active_tails) -> float:
        """Mean squared parent disagreement over active tails, scaled by gamma."""
        if not active_tails:
            return 0.0
        total = sum((z[j - 1] - z[self.parent(j) - 1]) ** 2 for j in active_tails)
        return self.gamma * total / len(active_tails)

    def objectives(self, decoded: DecodedConfig) -> tuple[float, float]:
        z, active_tails = self.project(decoded)
        cpl = self.coupling(z, active_tails)
        if self.variant == HDTLZ2:
            return hdtlz2(z, cpl)
        return hdtlz7(z, cpl)


def hdtlz2(z: np.ndarray, coupling: float = 0.0) -> tuple[float, float]:
    """Quarter-circle front; the g-term vanishes when all z_j>=2 sit at 0.5."""
    n = len(z)
    g = ((z[1:] - 0.5) ** 2).sum() / (n - 1) + coupling
    angle = 0.5 * math.pi * z[0]
    return ((1.0 + g) * math.cos(angle), (1.0 + g) * math.sin(angle))


def hdtlz7(z: np.ndarray, coupling: float = 0.0) -> tuple[float, float]:
    """Disconnected multimodal front; optimal tails sit at 0."""
    n = len(z)
    f1 = float(z[0])
    g = 1.0 + 9.0 * z[1:].sum() / (n - 1) + coupling
    h = 2.0 - (f1 / g) * (1.0 + math.sin(3.0 * math.pi * f1))
    return (f1, 0.5 * g * h)


def reference_front(variant: str, n_points: int = 1000) -> np.ndarray:
    """Analytic Pareto front sampled on a uniform parameter grid."""
    if n_points < 2:
        raise ValueError("need at least 2 points")
    u = np.linspace(0.0, 1.0, n_points)
    if variant == HDTLZ2:
        return np.column_stack([np.cos(0.5 * np.pi * u), np.sin(0.5 * np.pi * u)])
    if variant == HDTLZ7:
        f2 = 0.5 * (2.0 - u * (1.0 + np.sin(3.0 * np.pi * u)))
        pts = np.column_stack([u, f2])
        return pts[nondominated_mask(pts)]
    raise ValueError(f"unknown variant {variant!r}")
