"""Analytic tail certificates for positive sequences.

A certificate asserts a bound on the terms a_j of a sequence for j >= ``start``
and turns it into bounds on tail sums.  Certificates are never inferred from
data; ``check`` only verifies that the computed terms respect them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GeometricTail:
    """|a_j| <= |a_start| * ratio**(j - start) for all j >= start."""

    ratio: float
    start: int

    def __post_init__(self):
        if not 0 <= self.ratio < 1:
            raise ValueError("geometric ratio must lie in [0, 1)")
        if self.start < 1:
            raise ValueError("tail start index is 1-based")

    def sum_after(self, n, a_start, power=1):
        """Bound on sum_{j > n} |a_j|**power, valid for n >= start - 1."""
        if n < self.start - 1:
            raise ValueError("tail bound requested before the certificate starts")
        r = self.ratio**power
        return abs(a_start) ** power * r ** (n + 1 - self.start) / (1 - r)

    def check(self, values, rtol=1e-12):
        """values[j-1] = a_j for the computed prefix."""
        if len(values) < self.start:
            return True
        a0 = abs(values[self.start - 1])
        return all(abs(values[j - 1]) <= a0 * self.ratio ** (j - self.start) * (1 + rtol) + 1e-300
                   for j in range(self.start, len(values) + 1))

    def to_dict(self):
        return {"type": "geometric", "ratio": self.ratio, "from": self.start}


@dataclass(frozen=True)
class PowerTail:
    """|a_j| <= const * j**(-p) for all j >= start."""

    p: float
    const: float
    start: int = 1

    def sum_after(self, n, a_start=None, power=1):
        e = self.p * power
        if e <= 1:
            return math.inf
        n = max(n, self.start - 1)
        if n == 0:
            return self.const**power * (1 + 1 / (e - 1))
        return self.const**power * n ** (1 - e) / (e - 1)

    def check(self, values, rtol=1e-12):
        return all(abs(values[j - 1]) <= self.const * j ** (-self.p) * (1 + rtol)
                   for j in range(self.start, len(values) + 1))

    def to_dict(self):
        return {"type": "power", "p": self.p, "const": self.const, "from": self.start}


def tail_from_dict(d):
    d = dict(d.get("tail", d))
    kind = d.pop("type")
    if kind == "geometric":
        return GeometricTail(float(d["ratio"]), int(d["from"]))
    if kind == "power":
        return PowerTail(float(d["p"]), float(d["const"]), int(d.get("from", 1)))
    raise ValueError(f"unknown tail template {kind!r}")
