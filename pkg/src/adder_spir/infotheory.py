"""Exact probability tables over finite tuples of discrete variables.

Tables are sparse dictionaries from value tuples to probabilities; values
may be any hashable objects.  Probabilities are floats by default, with an
exact-rational mode (``fractions.Fraction`` weights) for cross-checks on
tiny instances.  All information quantities are in bits; summations go
through ``math.fsum`` so that 1e-10 tolerances are meaningful.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

__all__ = ["JointDistribution"]

_SUM_TOL = 1e-12


class JointDistribution:
    """Exact joint distribution over named finite-alphabet variables."""

    def __init__(self, names: Sequence[str], table: Mapping[tuple, float | Fraction], *, normalized_check: bool = True):
        self.names = tuple(names)
        self.table = dict(table)
        if normalized_check:
            total = self.total_mass()
            if abs(float(total) - 1.0) > _SUM_TOL:
                raise ValueError(f"probabilities sum to {float(total)}, not 1")

    def total_mass(self) -> float | Fraction:
        values = list(self.table.values())
        if values and isinstance(values[0], Fraction):
            return sum(values, Fraction(0))
        return math.fsum(values)

    def _indices(self, names: Iterable[str]) -> list[int]:
        pos = {name: i for i, name in enumerate(self.names)}
        missing = [n for n in names if n not in pos]
        if missing:
            raise KeyError(f"unknown variables {missing}; have {list(self.names)}")
        return [pos[n] for n in names]

    def marginal(self, names: Sequence[str]) -> "JointDistribution":
        idx = self._indices(names)
        out: dict[tuple, float | Fraction] = {}
        for key, p in self.table.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, 0) + p
        return JointDistribution(names, out, normalized_check=False)

    def condition(self, name: str, value: Hashable) -> "JointDistribution":
        """Distribution conditioned on one variable taking one value."""
        (i,) = self._indices([name])
        kept = {k: p for k, p in self.table.items() if k[i] == value}
        mass = math.fsum(float(p) for p in kept.values())
        if mass <= 0:
            raise ValueError(f"conditioning event {name}={value!r} has zero probability")
        if any(isinstance(p, Fraction) for p in kept.values()):
            frac_mass = sum(kept.values(), Fraction(0))
            rescaled = {k: p / frac_mass for k, p in kept.items()}
        else:
            rescaled = {k: p / mass for k, p in kept.items()}
        return JointDistribution(self.names, rescaled, normalized_check=False)

    def entropy(self, names: Sequence[str]) -> float:
        marg = self.marginal(names)
        return -math.fsum(
            float(p) * math.log2(float(p)) for p in marg.table.values() if float(p) > 0
        )

    def mutual_information(self, group_a: Sequence[str], group_b: Sequence[str]) -> float:
        """I(A; B) in bits, computed exactly over the table."""
        if set(group_a) & set(group_b):
            raise ValueError("variable groups must be disjoint")
        ia = self._indices(group_a)
        ib = self._indices(group_b)
        joint: dict[tuple, float] = {}
        pa: dict[tuple, float] = {}
        pb: dict[tuple, float] = {}
        for key, p in self.table.items():
            w = float(p)
            if w == 0.0:
                continue
            a = tuple(key[i] for i in ia)
            b = tuple(key[i] for i in ib)
            joint[(a, b)] = joint.get((a, b), 0.0) + w
            pa[a] = pa.get(a, 0.0) + w
            pb[b] = pb.get(b, 0.0) + w
        return math.fsum(
            w * math.log2(w / (pa[a] * pb[b])) for (a, b), w in joint.items() if w > 0
        )

    def conditional_mutual_information(
        self, group_a: Sequence[str], group_b: Sequence[str], group_c: Sequence[str]
    ) -> float:
        """I(A; B | C) via the chain rule I(A; BC) - I(A; C)."""
        return self.mutual_information(group_a, list(group_b) + list(group_c)) - self.mutual_information(group_a, group_c)

    def to_float(self) -> "JointDistribution":
        return JointDistribution(
            self.names, {k: float(p) for k, p in self.table.items()}, normalized_check=False
        )

    def __len__(self) -> int:
        return len(self.table)
