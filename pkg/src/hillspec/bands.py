"""Band edges per angular mode, the cross-mode essential spectrum, and the
threshold check for a candidate embedded eigenvalue."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .floquet import discriminant
from .potentials import make_mode_coefficient

SCAN_DENSITY = 2000  # lambda samples per unit length
TANGENCY_TOL = 1e-10
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class Band:
    lo: float
    hi: float  # math.inf marks a band running past the scanned window

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"band with lo={self.lo} > hi={self.hi}")

    def contains(self, lam: float, interior: bool = False) -> bool:
        if interior:
            return self.lo < lam < self.hi
        return self.lo <= lam <= self.hi

    def as_pair(self):
        return [self.lo, "inf" if math.isinf(self.hi) else self.hi]


@dataclass(frozen=True)
class BandSpectrum:
    mode: int
    bands: tuple
    lambda_window: tuple
    edges: tuple = ()
    # sign of gamma below the first edge; None when the window starts inside a band
    leading_gamma_positive: bool | None = None

    def to_json(self) -> dict:
        return {"mode": self.mode, "bands": [b.as_pair() for b in self.bands],
                "window": list(self.lambda_window)}

    @classmethod
    def from_json(cls, obj: dict) -> "BandSpectrum":
        bands = tuple(Band(float(lo), math.inf if hi == "inf" else float(hi)) for lo, hi in obj["bands"])
        edges = []
        for b in bands:
            if b.lo > obj["window"][0]:
                edges.append(b.lo)
            if not math.isinf(b.hi):
                edges.append(b.hi)
        return cls(int(obj["mode"]), bands, tuple(obj["window"]), tuple(edges))


def _gamma(m, potential, lams, h=None):
    coeff = make_mode_coefficient(m, potential, 0.0)
    return discriminant(coeff, lams, h=h)


def scan_discriminant(m: int, potential, window, n: int, h=None) -> np.ndarray:
    """``n`` uniform samples of gamma over ``window`` as an (n, 2) array of (lambda, gamma)."""
    a, b = window
    if n < 2 or not a < b:
        raise ValueError("need n >= 2 and a nonempty window")
    lams = np.linspace(a, b, n)
    return np.column_stack([lams, _gamma(m, potential, lams, h)])


def default_scan_n(window) -> int:
    return max(SCAN_DENSITY, math.ceil(SCAN_DENSITY * (window[1] - window[0]))) + 1


def _bisect(m, potential, lo, hi, in_lo, tol, h):
    lo, hi = lo.copy(), hi.copy()
    for _ in range(MAX_BISECTIONS):
        if np.all(hi - lo < tol):
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        in_mid = np.abs(_gamma(m, potential, mid, h)) - 1.0 <= 0.0
        same = in_mid == in_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    raise NumericError(f"band-edge bisection did not reach tol={tol} in {MAX_BISECTIONS} steps")


def band_edges(m: int, potential, window, scan_n: int | None = None, tol: float = 1e-6,
               h=None) -> BandSpectrum:
    """Bands of mode ``m`` inside ``window`` from roots of |gamma| - 1."""
    a, b = float(window[0]), float(window[1])
    n = default_scan_n((a, b)) if scan_n is None else scan_n
    lams = np.linspace(a, b, n)
    excess = np.abs(_gamma(m, potential, lams, h)) - 1.0
    inside = excess <= 0.0
    cells = np.flatnonzero(inside[:-1] != inside[1:])
    edges = np.array([])
    if cells.size:
        edges = _bisect(m, potential, lams[cells], lams[cells + 1], inside[cells], tol, h)

    # boundaries toggle membership; start state from the first sample
    bounds = [a] if inside[0] else []
    bounds += list(edges)
    if len(bounds) % 2:
        bounds.append(math.inf)
    pairs = [(bounds[i], bounds[i + 1]) for i in range(0, len(bounds), 2)]

    # merge bands separated only by a tangency of gamma with +-1
    if len(pairs) > 1:
        gaps = np.array([0.5 * (pairs[i][1] + pairs[i + 1][0]) for i in range(len(pairs) - 1)])
        gap_excess = np.abs(_gamma(m, potential, gaps, h)) - 1.0
        merged = [pairs[0]]
        for i, nxt in enumerate(pairs[1:]):
            if gap_excess[i] <= TANGENCY_TOL:
                merged[-1] = (merged[-1][0], nxt[1])
            else:
                merged.append(nxt)
        pairs = merged

    leading = None
    if not inside[0]:
        leading = bool(_gamma(m, potential, np.array([a]), h)[0] > 0)
    return BandSpectrum(int(m), tuple(Band(float(lo), float(hi)) for lo, hi in pairs), (a, b),
                        tuple(float(e) for e in edges), leading)


def _negation_is_translate(potential, n: int = 64, tol: float = 1e-12) -> bool:
    """True when -A(z) = A(z + p/2); then modes m and -m share a spectrum."""
    z = np.linspace(0.0, potential.period, n, endpoint=False)
    return bool(np.max(np.abs(potential(z + potential.period / 2) + potential(z))) <= tol)


def merge_bands(bands) -> list:
    out = []
    for band in sorted(bands, key=lambda b: (b.lo, b.hi)):
        if out and band.lo <= out[-1].hi:
            out[-1] = Band(out[-1].lo, max(out[-1].hi, band.hi))
        else:
            out.append(band)
    return out


@dataclass(frozen=True)
class EssentialSpectrum:
    spectra: dict  # mode -> BandSpectrum
    union: tuple
    window: tuple

    def to_json(self) -> dict:
        return {"spectra": [self.spectra[m].to_json() for m in sorted(self.spectra)],
                "union": [b.as_pair() for b in self.union], "window": list(self.window)}

    @classmethod
    def from_json(cls, obj: dict) -> "EssentialSpectrum":
        spectra = {s["mode"]: BandSpectrum.from_json(s) for s in obj["spectra"]}
        union = tuple(Band(float(lo), math.inf if hi == "inf" else float(hi)) for lo, hi in obj["union"])
        return cls(spectra, union, tuple(obj["window"]))


def essential_spectrum(potential, m_range, window, scan_n=None, tol: float = 1e-6,
                       h=None) -> EssentialSpectrum:
    """Per-mode spectra for m in the inclusive ``m_range`` and their union."""
    lo, hi = m_range
    symmetric = _negation_is_translate(potential)
    spectra = {}
    for m in sorted(range(lo, hi + 1), key=lambda k: (abs(k), k < 0)):
        if symmetric and -m in spectra:
            twin = spectra[-m]
            spectra[m] = BandSpectrum(m, twin.bands, twin.lambda_window, twin.edges,
                                      twin.leading_gamma_positive)
        else:
            spectra[m] = band_edges(m, potential, window, scan_n, tol, h)
    spectra = dict(sorted(spectra.items()))
    union = merge_bands([b for s in spectra.values() for b in s.bands])
    return EssentialSpectrum(spectra, tuple(union), tuple(window))


@dataclass(frozen=True)
class ThresholdReport:
    lambda0: float
    embedded: bool
    distance_to_nearest_edge: float
    offending_edges: list = field(default_factory=list)
    on_threshold: bool = False

    def __post_init__(self):
        if self.embedded and not self.on_threshold and not self.distance_to_nearest_edge > 0:
            raise ValueError("embedded eigenvalue must keep a positive distance from the edges")


def threshold_report(lambda0: float, spectra: EssentialSpectrum, own_mode: int,
                     edge_tol: float = 1e-3) -> ThresholdReport:
    """Is lambda0 embedded in another mode's band, and how far from any edge?

    Within ``edge_tol`` of an edge the report is flagged ``on_threshold``
    (distance 0) and a warning is emitted.
    """
    a, b = spectra.window
    if not a <= lambda0 <= b:
        raise ValueError(f"lambda0={lambda0} outside the scanned window {spectra.window}")
    edges = [(m, e) for m, s in spectra.spectra.items() for e in s.edges]
    dist = min((abs(lambda0 - e) for _, e in edges), default=math.inf)
    close = [(m, e) for m, e in edges if abs(lambda0 - e) <= edge_tol]
    embedded = any(band.contains(lambda0, interior=True)
                   for m, s in spectra.spectra.items() if m != own_mode for band in s.bands)
    if close:
        warnings.warn(f"lambda0={lambda0} lies on a spectral threshold (edges {close})", stacklevel=2)
        return ThresholdReport(lambda0, True, 0.0, close, True)
    return ThresholdReport(lambda0, embedded, dist, [], False)


def dump_spectrum(path, spectrum) -> None:
    with open(path, "w") as fh:
        json.dump(spectrum.to_json(), fh, indent=2)
