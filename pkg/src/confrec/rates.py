"""Shrinking rates phi: N -> (0, inf) and their gamma-powers.

Families defined through phi^gamma (power, logcorr) evaluate that form
directly and derive phi by the 1/gamma root; the geometric family is
defined through phi itself. ``diverges`` reports whether the series
sum phi(n)^gamma diverges (None when it cannot be decided analytically).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ValidationError


class RateFunction:
    label: str
    gamma_ref: Optional[float]

    def phi(self, n: int) -> float:
        raise NotImplementedError

    def phi_gamma(self, n: int) -> float:
        raise NotImplementedError

    def diverges(self) -> Optional[bool]:
        raise NotImplementedError

    def _check(self, n: int) -> None:
        if n < 1:
            raise ValidationError("rate functions are defined for n >= 1")


@dataclass(frozen=True)
class PowerRate(RateFunction):
    """phi(n)^gamma = c / n^a."""

    c: float
    a: float
    gamma_ref: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValidationError("power rate needs c > 0")
        if self.gamma_ref <= 0:
            raise ValidationError("power rate needs gamma_ref > 0")

    @property
    def label(self) -> str:
        return f"power:c={self.c},a={self.a}"

    def phi_gamma(self, n: int) -> float:
        self._check(n)
        return self.c / float(n) ** self.a

    def phi(self, n: int) -> float:
        return self.phi_gamma(n) ** (1.0 / self.gamma_ref)

    def diverges(self) -> bool:
        return self.a <= 1.0


@dataclass(frozen=True)
class GeometricRate(RateFunction):
    """phi(n) = rho^n."""

    rho: float
    gamma_ref: float

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ValidationError("geometric rate needs rho in (0,1)")

    @property
    def label(self) -> str:
        return f"geom:rho={self.rho}"

    def phi(self, n: int) -> float:
        self._check(n)
        return self.rho**n

    def phi_gamma(self, n: int) -> float:
        return self.phi(n) ** self.gamma_ref

    def diverges(self) -> bool:
        return False


@dataclass(frozen=True)
class LogCorrectedRate(RateFunction):
    """phi(n)^gamma = 1 / (n log(n+1)); the series diverges slowly."""

    gamma_ref: float

    @property
    def label(self) -> str:
        return "logcorr"

    def phi_gamma(self, n: int) -> float:
        self._check(n)
        return 1.0 / (n * math.log(n + 1.0))

    def phi(self, n: int) -> float:
        return self.phi_gamma(n) ** (1.0 / self.gamma_ref)

    def diverges(self) -> bool:
        return True


@dataclass(frozen=True)
class TableRate(RateFunction):
    """Explicit phi values; n beyond the table is an error."""

    values: tuple[float, ...]  # values[i] = phi(i + 1)
    gamma_ref: float

    def __post_init__(self):
        if not self.values or any(v <= 0 for v in self.values):
            raise ValidationError("table rate needs positive phi values")

    @property
    def label(self) -> str:
        return f"table[{len(self.values)}]"

    def phi(self, n: int) -> float:
        self._check(n)
        if n > len(self.values):
            raise ValidationError(f"table rate has no value for n = {n}")
        return self.values[n - 1]

    def phi_gamma(self, n: int) -> float:
        return self.phi(n) ** self.gamma_ref

    def diverges(self) -> Optional[bool]:
        # heuristic: compare the last two halves of the partial sums
        if len(self.values) < 8:
            return None
        half = len(self.values) // 2
        head = sum(v**self.gamma_ref for v in self.values[:half])
        tail = sum(v**self.gamma_ref for v in self.values[half:])
        return bool(tail > 0.5 * head)


def parse_rate(spec: str, gamma: float) -> RateFunction:
    """Parse CLI rate strings.

    Formats: ``power:c=1,a=1``  ``geom:rho=0.5``  ``logcorr``
             ``table:@file.csv`` (CSV columns n, phi).
    """
    spec = spec.strip()
    if spec == "logcorr":
        return LogCorrectedRate(gamma_ref=gamma)
    if spec.startswith("power:"):
        kv = _parse_kv(spec[len("power:"):], {"c", "a"})
        return PowerRate(c=kv.get("c", 1.0), a=kv.get("a", 1.0), gamma_ref=gamma)
    if spec.startswith("geom:"):
        kv = _parse_kv(spec[len("geom:"):], {"rho"})
        if "rho" not in kv:
            raise ValidationError("geom rate needs rho=<value>")
        return GeometricRate(rho=kv["rho"], gamma_ref=gamma)
    if spec.startswith("table:@"):
        return _load_table(spec[len("table:@"):], gamma)
    raise ValidationError(f"unrecognised rate spec {spec!r}")


def _parse_kv(text: str, allowed: set) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"bad rate parameter {part!r} (expected key=value)")
        key, val = part.split("=", 1)
        key = key.strip()
        if key not in allowed:
            raise ValidationError(f"unknown rate parameter {key!r}")
        try:
            out[key] = float(val)
        except ValueError as e:
            raise ValidationError(f"rate parameter {key}={val!r} is not a number") from e
    return out


def _load_table(path: str, gamma: float) -> TableRate:
    rows = {}
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(row for row in fh if not row.startswith("#"))
            if reader.fieldnames is None or {"n", "phi"} - set(reader.fieldnames):
                raise ValidationError(f"table file {path} needs columns n, phi")
            for rec in reader:
                rows[int(rec["n"])] = float(rec["phi"])
    except OSError as e:
        raise ValidationError(f"cannot read rate table {path}: {e}") from e
    if not rows or set(rows) != set(range(1, len(rows) + 1)):
        raise ValidationError(f"table file {path} must cover n = 1..N without gaps")
    return TableRate(values=tuple(rows[n] for n in sorted(rows)), gamma_ref=gamma)
