"""Lattice geometries, particle configurations, and phase classification.

Two configuration types are used throughout: 0/1 occupancy arrays for the
facilitated exclusion gas and nonnegative integer pile heights for the
facilitated zero-range gas.  Both live either on a ring of N sites or on a
finite window of the integer line with simulation padding at each end.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Phase(Enum):
    ERGODIC = "ergodic"
    FROZEN = "frozen"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class Torus:
    """Ring of ``sites`` lattice sites, labelled 0 .. sites-1.

    A single-site ring is allowed: it carries the degenerate no-hole image
    of the mapping, on which the dynamics is trivial.
    """

    sites: int

    def __post_init__(self):
        if self.sites < 1:
            raise ValueError("torus needs at least 1 site")

    @property
    def n_sim(self) -> int:
        return self.sites

    @property
    def scale(self) -> int:
        """Scaling parameter N entering the accelerated clock N^kappa."""
        return self.sites

    @property
    def periodic(self) -> bool:
        return True

    def describe(self) -> str:
        return f"torus:{self.sites}"


@dataclass(frozen=True)
class LineWindow:
    """Window [lo, hi) of the integer line with ``padding`` buffer cells.

    Cells in the padding are simulated like any other but excluded from
    observation; an event touching the outermost padding cell invalidates
    the run (finite propagation speed makes the buffer trustworthy
    otherwise).  ``scale_n`` is the scaling parameter N entering the
    accelerated clock and the macroscopic coordinate x/N; it defaults to
    the window width but is independent of it (a window may span several
    macroscopic units).
    """

    lo: int
    hi: int
    padding: int = 0
    scale_n: int | None = None

    def __post_init__(self):
        if self.lo >= self.hi:
            raise ValueError("window requires lo < hi")
        if self.padding < 0:
            raise ValueError("padding must be nonnegative")
        if self.scale_n is None:
            object.__setattr__(self, "scale_n", self.hi - self.lo)
        elif self.scale_n <= 0:
            raise ValueError("scale must be positive")

    @property
    def n_sim(self) -> int:
        return (self.hi - self.lo) + 2 * self.padding

    @property
    def offset(self) -> int:
        """Absolute label of array index 0."""
        return self.lo - self.padding

    @property
    def scale(self) -> int:
        return self.scale_n

    @property
    def periodic(self) -> bool:
        return False

    def index_of(self, site: int) -> int:
        return site - self.offset

    def window_slice(self) -> slice:
        return slice(self.lo - self.offset, self.hi - self.offset)

    def describe(self) -> str:
        return f"line:{self.lo}:{self.hi}:{self.padding}:{self.scale_n}"


Geometry = Torus | LineWindow


def _geometry_from_description(desc: str) -> Geometry:
    parts = desc.split(":")
    if parts[0] == "torus":
        return Torus(int(parts[1]))
    if parts[0] == "line":
        scale = int(parts[4]) if len(parts) > 4 else None
        return LineWindow(int(parts[1]), int(parts[2]), int(parts[3]), scale)
    raise ValueError(f"unknown geometry {desc!r}")


@dataclass
class ExclusionConfig:
    """Occupancy eta_x in {0,1} for every simulated site."""

    geometry: Geometry
    occupancy: np.ndarray

    def __post_init__(self):
        self.occupancy = np.ascontiguousarray(self.occupancy, dtype=np.uint8)
        if self.occupancy.ndim != 1 or self.occupancy.shape[0] != self.geometry.n_sim:
            raise ValueError("occupancy length does not match geometry")
        if self.occupancy.size and self.occupancy.max() > 1:
            raise ValueError("occupancy entries must be 0 or 1")

    def copy(self) -> "ExclusionConfig":
        return ExclusionConfig(self.geometry, self.occupancy.copy())


@dataclass
class ZeroRangeConfig:
    """Pile heights omega_y in {0,1,2,...} for every simulated site."""

    geometry: Geometry
    heights: np.ndarray

    def __post_init__(self):
        self.heights = np.ascontiguousarray(self.heights, dtype=np.int64)
        if self.heights.ndim != 1 or self.heights.shape[0] != self.geometry.n_sim:
            raise ValueError("heights length does not match geometry")
        if self.heights.size and self.heights.min() < 0:
            raise ValueError("heights must be nonnegative")

    def copy(self) -> "ZeroRangeConfig":
        return ZeroRangeConfig(self.geometry, self.heights.copy())


def particle_count(eta: ExclusionConfig) -> int:
    return int(eta.occupancy.sum())


def hole_count(eta: ExclusionConfig) -> int:
    return eta.occupancy.shape[0] - particle_count(eta)


def total_mass(omega: ZeroRangeConfig) -> int:
    return int(omega.heights.sum())


def _edge_sums_exclusion(eta: ExclusionConfig) -> np.ndarray:
    occ = eta.occupancy.astype(np.int64)
    if eta.geometry.periodic:
        return occ + np.roll(occ, -1)
    # only edges whose two endpoints both lie in the observation window
    w = eta.geometry.window_slice()
    inner = occ[w]
    return inner[:-1] + inner[1:]


def classify_exclusion(eta: ExclusionConfig) -> Phase:
    """Ergodic iff every edge carries a particle, frozen iff none carries two.

    The perfectly alternating configuration satisfies both defining
    inequalities; it is classified frozen since no move has positive rate.
    On a line window only in-window edges are inspected; the padding is a
    simulation buffer, not part of the observable.
    """
    s = _edge_sums_exclusion(eta)
    if s.size == 0 or s.max() <= 1:
        return Phase.FROZEN
    if s.min() >= 1:
        return Phase.ERGODIC
    return Phase.TRANSIENT


def classify_zero_range(omega: ZeroRangeConfig) -> Phase:
    """Ergodic iff all piles are occupied, frozen iff no pile exceeds one.

    The all-ones configuration satisfies both inequalities and is classified
    frozen (zero jump rate), mirroring the exclusion convention.
    """
    if omega.geometry.periodic:
        h = omega.heights
    else:
        h = omega.heights[omega.geometry.window_slice()]
    if h.size == 0 or h.max() <= 1:
        return Phase.FROZEN
    if h.min() >= 1:
        return Phase.ERGODIC
    return Phase.TRANSIENT


# -- plain-text snapshot format -------------------------------------------
#
# header:  "# facgas-snapshot kind=<exclusion|zerorange> geometry=<desc> time=<t>"
# body:    one "site<TAB>value" line per simulated site (absolute labels)


def write_snapshot(config, path_or_file, time: float = 0.0) -> None:
    kind = "exclusion" if isinstance(config, ExclusionConfig) else "zerorange"
    values = config.occupancy if kind == "exclusion" else config.heights
    offset = 0 if config.geometry.periodic else config.geometry.offset
    own = isinstance(path_or_file, (str, bytes))
    f = open(path_or_file, "w") if own else path_or_file
    try:
        f.write(f"# facgas-snapshot kind={kind} geometry={config.geometry.describe()} time={time!r}\n")
        for i, v in enumerate(values):
            f.write(f"{i + offset}\t{int(v)}\n")
    finally:
        if own:
            f.close()


def read_snapshot(path_or_file):
    """Returns (config, time)."""
    own = isinstance(path_or_file, (str, bytes))
    f = open(path_or_file, "r") if own else path_or_file
    try:
        header = f.readline().strip()
        if not header.startswith("# facgas-snapshot"):
            raise ValueError("not a facgas snapshot file")
        fields = dict(part.split("=", 1) for part in header.split()[2:])
        geom = _geometry_from_description(fields["geometry"])
        time = float(fields["time"])
        values = np.loadtxt(io.StringIO(f.read()), dtype=np.int64, ndmin=2)
    finally:
        if own:
            f.close()
    order = np.argsort(values[:, 0])
    vals = values[order, 1]
    if fields["kind"] == "exclusion":
        return ExclusionConfig(geom, vals.astype(np.uint8)), time
    return ZeroRangeConfig(geom, vals), time
