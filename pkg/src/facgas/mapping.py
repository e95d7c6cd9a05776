"""Exclusion <-> zero-range transformation at both scales.

Microscopic: gaps between consecutive empty sites, tagged at the first
hole at or right of the origin, turn an exclusion configuration into a
pile configuration; the transformation commutes with the dynamics event
by event, which trajectory_commutation_check verifies by replay.

Macroscopic: the strictly increasing coordinate change
v(u) = theta^{-1} integral_chi^u (1 - rho) carries density fields between
the two descriptions; all resampling here is mass-preserving, so the pile
mass balance is exact and round trips are identities up to one cell.
The diffusive clocks differ by theta^(-2); that dilation is applied inside
this module and never by callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (ExclusionConfig, LineWindow, Torus, ZeroRangeConfig,
                   hole_count, particle_count, total_mass)
from .dynamics import ObservationSet, SimParams, run_fep
from .pde import DensityField


@dataclass(frozen=True)
class TagState:
    """Tagged-hole position and the conserved hole count."""

    x1: int
    m_holes: int
    degenerate: bool = False


def zr_time(t: float, theta: float) -> float:
    """Zero-range diffusive clock for exclusion time t (factor theta^-2)."""
    return t / theta ** 2


# ---------------------------------------------------------------------------
# microscopic mapping
# ---------------------------------------------------------------------------

def map_exclusion_to_zr(eta: ExclusionConfig):
    """Pile heights = gaps between consecutive holes, tagged at the origin.

    On the torus the piles live on a ring with one site per hole; pile i
    (0-based) is the particle count between hole i and hole i+1, hole 0
    being the tagged one.  A configuration with no hole maps, by the
    degenerate convention, to a single pile carrying everything.
    """
    occ = eta.occupancy
    if eta.geometry.periodic:
        n = occ.shape[0]
        holes = np.flatnonzero(occ == 0)
        m = holes.shape[0]
        if m == 0:
            omega = ZeroRangeConfig(Torus(1), np.array([n], dtype=np.int64))
            return omega, TagState(1, 1, degenerate=True)
        gaps = np.empty(m, dtype=np.int64)
        gaps[:-1] = np.diff(holes) - 1
        gaps[-1] = holes[0] + n - holes[-1] - 1
        omega = ZeroRangeConfig(Torus(m), gaps)
        return omega, TagState(int(holes[0]), m)

    holes = np.flatnonzero(occ == 0)
    if holes.shape[0] < 2:
        raise ValueError("line mapping needs at least two holes in the window")
    origin = eta.geometry.index_of(0)
    right = np.flatnonzero(holes >= origin)
    if right.size == 0:
        raise ValueError("no hole at or right of the origin")
    j0 = int(right[0])
    gaps = np.diff(holes) - 1
    geom = LineWindow(-j0, holes.shape[0] - 1 - j0, 0)
    omega = ZeroRangeConfig(geom, gaps)
    x0_abs = int(holes[j0]) + eta.geometry.offset
    return omega, TagState(x0_abs, int(holes.shape[0]))


def map_zr_to_exclusion(omega: ZeroRangeConfig, tag: TagState, n: int) -> ExclusionConfig:
    """Inverse of the torus mapping given the tagged hole's position."""
    if not omega.geometry.periodic:
        raise ValueError("the reverse mapping is defined on the torus")
    m = omega.heights.shape[0]
    if tag.degenerate:
        if total_mass(omega) != n or m != 1:
            raise ValueError("degenerate configuration inconsistent with n")
        return ExclusionConfig(Torus(n), np.ones(n, dtype=np.uint8))
    if total_mass(omega) + m != n:
        raise ValueError("site count must equal pile mass plus hole count")
    if not (0 <= tag.x1 < n):
        raise ValueError("tag position out of range")
    occ = np.ones(n, dtype=np.uint8)
    pos = tag.x1
    for g in omega.heights:
        occ[pos % n] = 0
        pos += int(g) + 1
    return ExclusionConfig(Torus(n), occ)


# ---------------------------------------------------------------------------
# event-by-event commutation replay
# ---------------------------------------------------------------------------

@dataclass
class CommutationReport:
    ok: bool
    n_events: int
    n_checked: int
    first_discrepancy: int | None
    message: str
    x1_identity_max_abs: int


class _ZrReplay:
    """Evolves the mapped pile configuration move-for-move from FEP events.

    Holes never cross under nearest-neighbor swaps, so the cyclic rank of a
    hole (tag first) is constant in time; a position-to-rank dictionary then
    makes every induced pile move O(1), and fresh_map() rebuilds the mapped
    configuration from the tracked hole positions for the comparison.
    """

    def __init__(self, eta0: ExclusionConfig):
        self.periodic = eta0.geometry.periodic
        self.n = eta0.occupancy.shape[0]
        omega0, tag0 = map_exclusion_to_zr(
            ExclusionConfig(eta0.geometry, eta0.occupancy.copy()))
        if tag0.degenerate:
            raise ValueError("replay needs at least one hole")
        self.omega = [int(v) for v in omega0.heights]
        self.m = len(self.omega) + (0 if self.periodic else 1)
        holes = np.flatnonzero(eta0.occupancy == 0)
        tag_idx = tag0.x1 if self.periodic else eta0.geometry.index_of(tag0.x1)
        jt = int(np.searchsorted(holes, tag_idx))
        if self.periodic:
            cycle = np.roll(holes, -jt)
            self.tag_rank = 0
        else:
            cycle = holes
            self.tag_rank = jt
        self.hole_at = [int(h) for h in cycle]
        self.rank_of = {int(h): r for r, h in enumerate(cycle)}
        self.j01 = 0

    def apply(self, edge: int, direction: int) -> None:
        n = self.n
        if direction == 0:  # particle edge -> edge+1, hole moves down
            x, xp = edge, edge + 1 if edge + 1 < n else 0
        else:               # particle edge+1 -> edge, hole moves up
            x, xp = (edge + 1 if edge + 1 < n else 0), edge
        r = self.rank_of.pop(xp, None)
        if r is None:
            raise AssertionError("move does not target a hole")
        m = self.m
        if self.periodic:
            src = (r - 1) % m if direction == 0 else r
            dst = r if direction == 0 else (r - 1) % m
            if self.omega[src] < 2:
                raise AssertionError("induced pile move violates facilitation")
            self.omega[src] -= 1
            self.omega[dst] += 1
            # bond between pile m-1 and pile 0 is the tagged bond (0,1)
            if direction == 0 and dst == 0:
                self.j01 += 1
            elif direction == 1 and src == 0:
                self.j01 -= 1
        else:
            # piles are gaps between consecutive holes; boundary segments
            # beyond the first/last hole are not tracked
            src = r - 1 if direction == 0 else r
            dst = r if direction == 0 else r - 1
            if 0 <= src < m - 1:
                if self.omega[src] < 2:
                    raise AssertionError("induced pile move violates facilitation")
                self.omega[src] -= 1
            if 0 <= dst < m - 1:
                self.omega[dst] += 1
            if r == self.tag_rank:
                self.j01 += 1 if direction == 0 else -1
        self.hole_at[r] = x
        self.rank_of[x] = r

    def fresh_map(self):
        n = self.n
        h = self.hole_at
        if self.periodic:
            return [(h[(i + 1) % self.m] - h[i] - 1) % n for i in range(self.m)]
        return [h[i + 1] - h[i] - 1 for i in range(self.m - 1)]


def trajectory_commutation_check(eta0: ExclusionConfig, params: SimParams, *,
                                 max_events: int = 1_000_000) -> CommutationReport:
    """Runs the exclusion chain once, replays every swap as the induced pile
    move, and compares against the freshly mapped configuration after each
    event.  Also accumulates the tagged bond current to check
    X1(t) - X1(0) = -J_{0,1}(t) at every observation time."""
    obs = run_fep(eta0, params, record_events=True, max_events=max_events)
    if obs.degenerate:
        return CommutationReport(True, 0, 0, None, "degenerate (no holes): vacuous", 0)
    replay = _ZrReplay(eta0)
    events = obs.events
    j01_at = np.zeros(len(obs.times), dtype=np.int64)
    obs_i = 0
    ev_edges = events.edges.tolist()
    ev_dirs = events.dirs.tolist()
    ev_times = events.times
    for k in range(len(ev_edges)):
        while obs_i < len(obs.times) and obs.times[obs_i] < ev_times[k]:
            j01_at[obs_i] = replay.j01
            obs_i += 1
        replay.apply(ev_edges[k], ev_dirs[k])
        if replay.omega != replay.fresh_map():
            return CommutationReport(False, len(ev_edges), k + 1, k,
                                     f"pile mismatch after event {k}", -1)
    while obs_i < len(obs.times):
        j01_at[obs_i] = replay.j01
        obs_i += 1
    from .dynamics import _first_hole_at_or_right_of_origin
    x1_start = _first_hole_at_or_right_of_origin(eta0)
    if not eta0.geometry.periodic:
        x1_start += eta0.geometry.offset
    ident = obs.x1 - x1_start + j01_at if obs.x1 is not None else j01_at
    max_abs = int(np.max(np.abs(ident))) if ident.size else 0
    ok = max_abs == 0
    msg = "ok" if ok else "tagged-hole current identity violated"
    return CommutationReport(ok, events.times.shape[0], events.times.shape[0],
                             None if ok else -1, msg, max_abs)


# ---------------------------------------------------------------------------
# macroscopic mapping
# ---------------------------------------------------------------------------

@dataclass
class MacroTransform:
    theta: float
    chi: float
    u_edges: np.ndarray
    v_edges: np.ndarray

    def v_of_u(self, u):
        return np.interp(u, self.u_edges, self.v_edges)

    def u_of_v(self, v):
        return np.interp(v, self.v_edges, self.u_edges)


_RHO_CEILING = 1.0 - 1e-6


def macro_ex_to_zr(rho: DensityField, m_out: int | None = None):
    """Exclusion density field -> pile density field on the unit v-torus.

    theta is the hole mass, v grows with hole mass, and the pile field is
    obtained by conservative resampling: the particle mass in the preimage
    of each v-cell equals theta times the pile mass assigned to it.
    """
    if not rho.periodic:
        raise ValueError("macroscopic mapping is set on the torus")
    cells = rho.cells
    if cells.max() >= _RHO_CEILING:
        raise ValueError("mapping is singular where the exclusion density reaches 1")
    if cells.min() < 0.0:
        raise ValueError("exclusion density must be nonnegative")
    n = cells.shape[0]
    du = 1.0 / n
    u_edges = np.linspace(0.0, 1.0, n + 1)
    hole_cum = np.concatenate(([0.0], np.cumsum(1.0 - cells) * du))
    theta = hole_cum[-1]
    v_edges = hole_cum / theta
    v_edges[-1] = 1.0
    rho_cum = np.concatenate(([0.0], np.cumsum(cells) * du))

    m = n if m_out is None else int(m_out)
    w_edges = np.linspace(0.0, 1.0, m + 1)
    u_pre = np.interp(w_edges, v_edges, u_edges)
    mass = np.interp(u_pre, u_edges, rho_cum)
    alpha_cells = np.diff(mass) * m / theta
    alpha = DensityField(alpha_cells, 0.0, 1.0, periodic=True)
    return alpha, MacroTransform(float(theta), 0.0, u_edges, v_edges)


def macro_zr_to_ex(alpha: DensityField, chi: float, theta: float,
                   n_out: int | None = None) -> DensityField:
    """Pile density field -> exclusion density field on the unit u-torus.

    u(v) = chi + theta * integral_0^v (1 + alpha); consistency requires the
    image to span exactly one period.  Resampling is again conservative:
    particle mass in a u-cell is theta times the pile mass in its preimage.
    """
    if not alpha.periodic:
        raise ValueError("macroscopic mapping is set on the torus")
    cells = alpha.cells
    if cells.min() < 0.0:
        raise ValueError("pile density must be nonnegative")
    m = cells.shape[0]
    dv = 1.0 / m
    u_src = chi + theta * np.concatenate(([0.0], np.cumsum(1.0 + cells) * dv))
    span = u_src[-1] - u_src[0]
    if abs(span - 1.0) > 1e-8:
        raise ValueError(f"inconsistent (alpha, theta): u-image spans {span}, not 1")
    u_src[-1] = u_src[0] + 1.0
    mass_src = theta * np.concatenate(([0.0], np.cumsum(cells) * dv))

    n = m if n_out is None else int(n_out)
    t_edges = np.linspace(0.0, 1.0, n + 1)
    lo = u_src[0]
    shifted = lo + np.mod(t_edges - lo, 1.0)

    def cum(u):
        return np.interp(u, u_src, mass_src)

    total = mass_src[-1]
    mass_lo = cum(shifted[:-1])
    mass_hi = cum(shifted[1:])
    wrapped = shifted[1:] <= shifted[:-1] + 1e-15
    masses = np.where(wrapped, (total - mass_lo) + (mass_hi - mass_src[0]),
                      mass_hi - mass_lo)
    # a target cell spanning the seam exactly once is the only wrap case
    rho_cells = masses * n
    return DensityField(np.clip(rho_cells, 0.0, 1.0), 0.0, 1.0, periodic=True)


# ---------------------------------------------------------------------------
# interface offsets
# ---------------------------------------------------------------------------

def interface_offset_chi_from_alpha(alpha_ini: DensityField, alpha_scaled_t: DensityField,
                                    theta: float) -> float:
    """chi_t = theta * <v, alpha_{t/theta^2} - alpha_ini> on the v-torus.

    The second field must already be at the dilated zero-range time; use
    zr_time() to convert.
    """
    if alpha_ini.cells.shape != alpha_scaled_t.cells.shape:
        raise ValueError("fields must share a grid")
    m = alpha_ini.cells.shape[0]
    v_c = (np.arange(m) + 0.5) / m
    return float(theta * np.sum(v_c * (alpha_scaled_t.cells - alpha_ini.cells)) / m)


def interface_offset_chi_from_rho(rho_ini: DensityField, rho_t: DensityField) -> float:
    """Solves integral_0^chi (1 - rho_t) du = <u, rho_t - rho_ini> for chi.

    The integrand 1 - rho_t >= 1 - rho_star > 0 keeps the cumulative
    strictly increasing, so the root is unique; it is bracketed on (-1, 1)
    by periodic extension.
    """
    if rho_ini.cells.shape != rho_t.cells.shape:
        raise ValueError("fields must share a grid")
    cells = rho_t.cells
    n = cells.shape[0]
    du = 1.0 / n
    u_c = (np.arange(n) + 0.5) / n
    target = float(np.sum(u_c * (rho_t.cells - rho_ini.cells)) / n)
    one_minus = 1.0 - cells
    tiled = np.concatenate((one_minus, one_minus))
    edges = np.linspace(-1.0, 1.0, 2 * n + 1)
    cum = np.concatenate(([0.0], np.cumsum(tiled) * du))
    cum -= np.interp(0.0, edges, cum)  # anchor: integral from 0
    return float(np.interp(target, cum, edges))


def interface_offset_sigma(alpha_ini: DensityField, alpha_t: DensityField) -> float:
    """sigma_t = integral_0^infty (alpha_ini - alpha_t) dv over the window."""
    if alpha_ini.periodic or alpha_t.periodic:
        raise ValueError("sigma is defined for line-window fields")
    if alpha_ini.cells.shape != alpha_t.cells.shape or alpha_ini.lo != alpha_t.lo:
        raise ValueError("fields must share a grid")
    edges = alpha_ini.edges()
    right = np.clip(edges[1:], 0.0, None)
    left = np.clip(edges[:-1], 0.0, None)
    w = right - left  # overlap of each cell with [0, inf)
    return float(np.sum((alpha_ini.cells - alpha_t.cells) * w))


def mass_deficit(rho: DensityField) -> float:
    """theta = integral (1 - rho) du on the unit torus."""
    return float(np.mean(1.0 - rho.cells))
