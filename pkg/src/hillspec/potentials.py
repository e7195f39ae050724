"""Periodic backgrounds, localized perturbations and per-mode Hill coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import FormatError, ParseError

TWO_PI = 2.0 * math.pi

# relative tolerance on grid spacing for sampled files
_UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class PeriodicPotential:
    """A real ``period``-periodic function of z.

    ``kind`` is one of ``"cos"``, ``"const"`` or ``"samples"``.  Sampled
    potentials keep their raw grid (``z0``, ``samples``) so they can be
    written back out bit for bit.
    """

    period: float
    kind: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    constant: Optional[float] = None
    z0: Optional[float] = None
    samples: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=float))

    @property
    def spec(self) -> str:
        if self.kind == "cos":
            return "cos"
        if self.kind == "const":
            return f"const:{self.constant!r}"
        return "samples"

    def periodicity_defect(self, n: int = 100, seed: int = 0) -> float:
        rng = np.random.default_rng(seed)
        z = rng.uniform(-50.0, 50.0, n)
        return float(np.max(np.abs(self(z + self.period) - self(z))))


def cos_potential() -> PeriodicPotential:
    return PeriodicPotential(period=TWO_PI, kind="cos", func=np.cos)


def constant_potential(c: float, period: float = 1.0) -> PeriodicPotential:
    c = float(c)
    return PeriodicPotential(
        period=period, kind="const", constant=c,
        func=lambda z: np.full(np.shape(z), c),
    )


def sampled_potential(values: Sequence[float], period: float, z0: float = 0.0) -> PeriodicPotential:
    """Periodic cubic spline through ``n`` samples at ``z0 + k*period/n``."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 4:
        raise FormatError(f"need at least 4 samples per period, got {n}")
    knots = z0 + period * np.arange(n + 1) / n
    spline = CubicSpline(knots, np.append(values, values[0]), bc_type="periodic")

    def func(z):
        return spline(z0 + np.mod(z - z0, period))

    return PeriodicPotential(period=float(period), kind="samples", func=func,
                             z0=float(z0), samples=values)


def write_samples(path, potential: PeriodicPotential) -> None:
    """Write a sampled potential in the ``# period=.. n=..`` CSV format."""
    if potential.samples is None:
        raise ValueError("only sampled potentials carry a sample grid")
    n = potential.samples.size
    z = potential.z0 + potential.period * np.arange(n) / n
    lines = [f"# period={potential.period:.17g} n={n}"]
    lines += [f"{zi:.17g},{vi:.17g}" for zi, vi in zip(z, potential.samples)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_samples(path) -> PeriodicPotential:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise FormatError(f"{path}: missing '# period=<float> n=<int>' header")
    header = {}
    for token in text[0][1:].split():
        key, sep, val = token.partition("=")
        if not sep:
            raise FormatError(f"{path}: malformed header token {token!r}")
        header[key] = val
    try:
        period = float(header["period"])
        n = int(header["n"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: header needs period=<float> and n=<int>") from exc
    rows = [ln for ln in text[1:] if ln.strip()]
    if len(rows) != n:
        raise FormatError(f"{path}: header says n={n} but found {len(rows)} rows")
    try:
        data = np.array([[float(x) for x in row.split(",")] for row in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric row") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise FormatError(f"{path}: rows must be 'z,value'")
    z, values = data[:, 0], data[:, 1]
    dz = period / n
    if not np.allclose(np.diff(z), dz, rtol=_UNIFORM_RTOL, atol=0.0):
        raise FormatError(f"{path}: grid is not uniform with spacing period/n = {dz!r}")
    return sampled_potential(values, period, z0=z[0])


def parse_potential_spec(spec: str) -> PeriodicPotential:
    """Parse ``"cos"``, ``"const:<c>"`` or ``"samples:<path>"``."""
    head, sep, arg = spec.strip().partition(":")
    if head == "cos" and not sep:
        return cos_potential()
    if head == "const":
        try:
            return constant_potential(float(arg))
        except ValueError:
            raise ParseError(f"bad constant {arg!r} in potential spec {spec!r}") from None
    if head == "samples" and arg:
        return read_samples(arg)
    bad = head if head not in ("cos", "const", "samples") else spec
    raise ParseError(f"unrecognised potential spec token {bad!r}")


@dataclass(frozen=True)
class LocalizedPerturbation:
    """Perturbation B(z) with claimed algebraic decay (1+|z|)^-beta."""

    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    decay_exponent: float = 2.0
    support_hint: Optional[tuple] = None
    name: str = "B"

    def __post_init__(self):
        if not self.decay_exponent > 1:
            raise ValueError("decay exponent must exceed 1")

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=float))

    def weighted_sup(self, half_width: float = 50.0, n: int = 20001) -> float:
        """sup |B(z)|(1+|z|)^beta on a grid over [-half_width, half_width]."""
        z = np.linspace(-half_width, half_width, n)
        w = np.abs(self(z)) * (1.0 + np.abs(z)) ** self.decay_exponent
        if not np.all(np.isfinite(w)):
            raise ValueError(f"perturbation {self.name} is not finite on the test grid")
        return float(w.max())


def sech2_bump(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> LocalizedPerturbation:
    return LocalizedPerturbation(
        lambda z: amplitude / np.cosh((z - center) / width) ** 2,
        decay_exponent=2.0, name=f"sech2({center},{width})",
    )


def gaussian_bump(center: float = 0.0, width: float = 1.0, amplitude: float = 1.0) -> LocalizedPerturbation:
    return LocalizedPerturbation(
        lambda z: amplitude * np.exp(-(((z - center) / width) ** 2)),
        decay_exponent=2.0, name=f"gauss({center},{width})",
    )


class AsymptoticPotential:
    """Potential sampled on ``[-Z, Z]`` that continues as a periodic tail.

    Inside the sampled window values come from a cubic spline; outside it
    the tail is used.  Additive ``(eps, B)`` terms are evaluated exactly.
    """

    def __init__(self, z, values, tail: PeriodicPotential, terms=()):
        self.z = np.asarray(z, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.tail = tail
        self.terms = tuple(terms)
        self._spline = CubicSpline(self.z, self.values)

    @property
    def period(self) -> float:
        return self.tail.period

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.z[0]) & (z <= self.z[-1])
        out = np.where(inside, self._spline(np.clip(z, self.z[0], self.z[-1])), self.tail(z))
        for eps, pert in self.terms:
            out = out + eps * pert(z)
        return out

    def perturbed(self, eps: float, pert) -> "AsymptoticPotential":
        return AsymptoticPotential(self.z, self.values, self.tail, self.terms + ((eps, pert),))


@dataclass(frozen=True)
class ModeCoefficient:
    """Hill coefficient Q(z) = (m + A(z))**2 - lambda of angular mode m."""

    m: int
    potential: object
    lam: float

    def base(self, z):
        """(m + A(z))**2, the lambda-independent part."""
        return (self.m + self.potential(z)) ** 2

    def q(self, z):
        return self.base(z) - self.lam

    __call__ = q

    @property
    def period(self) -> float:
        return self.potential.period


def make_mode_coefficient(m: int, potential, lam: float) -> ModeCoefficient:
    return ModeCoefficient(int(m), potential, float(lam))
