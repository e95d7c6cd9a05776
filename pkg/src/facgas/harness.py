"""Turns raw trajectories into the limit statements: empirical density
fields, sim-vs-PDE distances, tagged-hole laws of large numbers, block
diagnostics, equilibration tests, and small-system brute-force chains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._kernels import replay_state_times
from .core import ExclusionConfig, ZeroRangeConfig
from .dynamics import EventLog, ObservationSet, SimParams, run_fzrp
from .measures import Profile, sample_geometric_profile
from .pde import DensityField, flux_eval, G


def empirical_pairing(config, phi) -> float:
    """(1/N) sum_x value_x phi(x/N): the discrete pairing with a test function."""
    if isinstance(config, ExclusionConfig):
        values = config.occupancy.astype(float)
    elif isinstance(config, ZeroRangeConfig):
        values = config.heights.astype(float)
    else:
        raise TypeError("expected a lattice configuration")
    geom = config.geometry
    offset = 0 if geom.periodic else geom.offset
    u = (np.arange(values.size) + offset) / geom.scale
    return float(np.sum(values * phi(u)) / geom.scale)


def block_average(values: np.ndarray, ell: int, periodic: bool):
    """Centered means over windows of radius ell.

    Returns (averages, start): on the torus every site has a full window
    (start 0); on the line only sites with a complete window are kept and
    start is the index of the first one.
    """
    if ell < 0:
        raise ValueError("block radius must be nonnegative")
    v = np.asarray(values, dtype=float)
    w = 2 * ell + 1
    if periodic:
        ext = np.concatenate((v[-ell:], v, v[:ell])) if ell else v
        c = np.concatenate(([0.0], np.cumsum(ext)))
        return (c[w:] - c[:-w]) / w, 0
    if v.size < w:
        raise ValueError("lattice shorter than the averaging window")
    c = np.concatenate(([0.0], np.cumsum(v)))
    return (c[w:] - c[:-w]) / w, ell


def default_block_radius(n: int) -> int:
    """ell = ceil(sqrt(N)): mesoscopic, ell/N -> 0."""
    return int(np.ceil(np.sqrt(n)))


def hydro_error(snapshots, geometry, pde_field: DensityField, ell: int, *,
                window=None) -> float:
    """L1 distance between the replica-averaged block-density field and the
    PDE field, both read at the block centers x/N."""
    snaps = [np.asarray(s, dtype=float) for s in snapshots]
    mean_field = np.mean(snaps, axis=0)
    avg, start = block_average(mean_field, ell, geometry.periodic)
    offset = 0 if geometry.periodic else geometry.offset
    u = (np.arange(avg.size) + start + offset) / geometry.scale
    if window is not None:
        keep = (u >= window[0]) & (u <= window[1])
        u = u[keep]
        avg = avg[keep]
    diff = np.abs(avg - pde_field.interp_at(u))
    return float(np.sum(diff) / geometry.scale)


@dataclass
class TaggedCheck:
    deviations: np.ndarray
    mean_deviation: float
    n_excluded_degenerate: int


def tagged_hole_check(runs, t: float, target: float) -> TaggedCheck:
    """Per-replica |X1(t)/N - target| with degenerate runs excluded and counted."""
    devs = []
    excluded = 0
    for obs in runs:
        if obs.degenerate:
            excluded += 1
            continue
        i = int(np.argmin(np.abs(obs.times - t)))
        devs.append(abs(obs.x1[i] / obs.geometry.scale - target))
    devs = np.asarray(devs, dtype=float)
    mean = float(devs.mean()) if devs.size else float("nan")
    return TaggedCheck(devs, mean, excluded)


def one_block_diagnostic(snapshots, ell: int, periodic: bool = True) -> float:
    """Space-time average of |avg_block g(omega) - G(avg_block omega)| with
    g(k) = 1{k >= 2}; vanishes as ell grows by the local equilibrium law."""
    total = 0.0
    count = 0
    for snap in snapshots:
        h = np.asarray(snap, dtype=float)
        g_avg, _ = block_average((h >= 2).astype(float), ell, periodic)
        h_avg, _ = block_average(h, ell, periodic)
        total += float(np.sum(np.abs(g_avg - flux_eval(G, h_avg))))
        count += g_avg.size
    return total / count


def two_block_diagnostic(snapshots, ell: int, eps_macro: float, m_scale: int, *,
                         delta: float = 0.1, periodic: bool = True) -> dict:
    """Space-time average of |G(omega^ell) - G(omega^(eps M))|.

    Reports both the supercritical-window restriction (both block averages
    above 1 + delta, the regime the two-block statement covers) and the
    unrestricted average, which carries no guarantee.
    """
    big = int(round(eps_macro * m_scale))
    if big <= ell:
        raise ValueError("macroscopic block eps*M must exceed ell")
    tot_all = 0.0
    n_all = 0
    tot_r = 0.0
    n_r = 0
    for snap in snapshots:
        h = np.asarray(snap, dtype=float)
        small, s0 = block_average(h, ell, periodic)
        large, l0 = block_average(h, big, periodic)
        if not periodic:
            lo = max(s0, l0)
            hi = min(s0 + small.size, l0 + large.size)
            small = small[lo - s0:hi - s0]
            large = large[lo - l0:hi - l0]
        d = np.abs(flux_eval(G, small) - flux_eval(G, large))
        tot_all += float(d.sum())
        n_all += d.size
        mask = (small > 1.0 + delta) & (large > 1.0 + delta)
        tot_r += float(d[mask].sum())
        n_r += int(mask.sum())
    return {
        "unrestricted": tot_all / n_all if n_all else float("nan"),
        "restricted": tot_r / n_r if n_r else 0.0,
        "n_restricted": n_r,
    }


def max_height_report(obs: ObservationSet) -> dict:
    """Max pile height over sites and observation times, flagged against
    log^2 M (natural log), the scale excluded with high probability."""
    m = obs.geometry.scale
    peak = int(obs.snapshots.max())
    bound = float(np.log(m) ** 2)
    return {"max_height": peak, "log2M": bound, "flag": peak >= bound}


# ---------------------------------------------------------------------------
# single-site law and equilibration
# ---------------------------------------------------------------------------

def mu_alpha_pmf(alpha: float, kmax: int) -> np.ndarray:
    """Geometric law on {0,1,...} with mean alpha: P(k) = (1/(1+a))(a/(1+a))^k."""
    k = np.arange(kmax + 1)
    return (1.0 / (1.0 + alpha)) * (alpha / (1.0 + alpha)) ** k


def mu_star_pmf(alpha: float, kmax: int) -> np.ndarray:
    """Equilibrium law on {1,2,...} with mean alpha: P(k) = (1/a)(1-1/a)^(k-1)."""
    if alpha < 1.0:
        raise ValueError("the equilibrium law needs alpha >= 1")
    k = np.arange(kmax + 1)
    pmf = np.zeros(kmax + 1)
    if alpha == 1.0:
        pmf[1] = 1.0
        return pmf
    pmf[1:] = (1.0 / alpha) * (1.0 - 1.0 / alpha) ** (k[1:] - 1)
    return pmf


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(p - q)))


def closed_form_tv_mu_vs_star(alpha: float, kmax: int = 4000) -> float:
    """TV(mu_alpha, mu*_alpha): the t = 0 value of the equilibration curve.

    Both tails decay geometrically, so a long truncation is exact to
    double precision (for alpha = 2 the value is 263/648)."""
    return tv_distance(mu_alpha_pmf(alpha, kmax), mu_star_pmf(alpha, kmax))


def empirical_tv_to_star(counts: np.ndarray, alpha: float, kcap: int = 50) -> float:
    """TV of add-one-smoothed empirical single-site frequencies against the
    equilibrium law, heights clipped at kcap (tail error is geometric)."""
    c = np.zeros(kcap + 1, dtype=float)
    src = np.asarray(counts, dtype=float)
    ncat = min(src.size, kcap + 1)
    c[:ncat] = src[:ncat]
    if src.size > kcap + 1:
        c[kcap] += src[kcap + 1:].sum()
    n = c.sum()
    p_hat = (c + 1.0) / (n + kcap + 1.0)
    star = mu_star_pmf(alpha, kcap)
    star[kcap] += max(0.0, 1.0 - star.sum())  # lump the clipped tail
    return tv_distance(p_hat, star)


def height_counts(snapshots, kcap: int = 50) -> np.ndarray:
    """Pooled height histogram over sites (and snapshots) clipped at kcap."""
    acc = np.zeros(kcap + 1, dtype=np.int64)
    for snap in snapshots:
        acc += np.bincount(np.minimum(np.asarray(snap, dtype=np.int64), kcap),
                           minlength=kcap + 1)
    return acc


def equilibration_check(alpha: float, m: int, t_list, seed: int, *,
                        replicas: int = 8, accelerated: bool = True,
                        kcap: int = 50) -> dict:
    """TV of the pooled single-site marginal to the equilibrium law at each
    time, started from the profile-fitting geometric measure at density
    alpha > 1.  The clock convention is recorded in the result."""
    if alpha <= 1.0:
        raise ValueError("equilibration requires a supercritical density alpha > 1")
    t_list = sorted(float(t) for t in t_list)
    params = SimParams.symmetric(T=t_list[-1], seed=seed, obs_times=t_list)
    tvs = {}
    counts = {t: np.zeros(kcap + 1, dtype=np.int64) for t in t_list}
    for r in range(replicas):
        omega0 = sample_geometric_profile(Profile.constant(alpha), m, seed, replica=r)
        obs = run_fzrp(omega0, params, replica=r,
                       rate_scale=None if accelerated else 1.0)
        for i, t in enumerate(t_list):
            counts[t] += np.bincount(np.minimum(obs.snapshots[i], kcap),
                                     minlength=kcap + 1)
    for t in t_list:
        tvs[t] = empirical_tv_to_star(counts[t], alpha, kcap)
    return {"tv": tvs, "clock": "accelerated" if accelerated else "bare",
            "alpha": alpha, "m": m, "replicas": replicas}


# ---------------------------------------------------------------------------
# brute-force chains (oracles for small systems)
# ---------------------------------------------------------------------------

def fep_rate(occ: np.ndarray, e: int, direction: int, p: float, pp: float) -> float:
    n = occ.shape[0]
    em1, ep1, ep2 = (e - 1) % n, (e + 1) % n, (e + 2) % n
    if direction == 0:
        return p if occ[em1] == 1 and occ[e] == 1 and occ[ep1] == 0 else 0.0
    return pp if occ[e] == 0 and occ[ep1] == 1 and occ[ep2] == 1 else 0.0


def enumerate_fep_chain(n: int, k_particles: int, p: float = 1.0, pp: float = 1.0):
    """All configurations with k particles on the n-torus and the CTMC rate
    matrix of the facilitated exclusion dynamics among them."""
    states = []
    index = {}
    for sites in itertools.combinations(range(n), k_particles):
        occ = np.zeros(n, dtype=np.uint8)
        occ[list(sites)] = 1
        key = int(sum(1 << s for s in sites))
        index[key] = len(states)
        states.append(occ)
    q = np.zeros((len(states), len(states)))
    for i, occ in enumerate(states):
        for e in range(n):
            for direction in (0, 1):
                rate = fep_rate(occ, e, direction, p, pp)
                if rate <= 0.0:
                    continue
                x, xp = (e, (e + 1) % n) if direction == 0 else ((e + 1) % n, e)
                new = occ.copy()
                new[x], new[xp] = 0, 1
                j = index[int(np.sum((1 << np.arange(n)) * new))]
                q[i, j] += rate
                q[i, i] -= rate
    return states, q


def enumerate_fzrp_chain(m: int, mass: int, p: float = 1.0, pp: float = 1.0):
    """All pile configurations of given total mass on the m-torus and the
    zero-range rate matrix (rate 1{h >= 2} per direction)."""
    states = []
    index = {}

    def compositions(total, slots):
        if slots == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for rest in compositions(total - head, slots - 1):
                yield (head,) + rest

    for comp in compositions(mass, m):
        index[comp] = len(states)
        states.append(np.asarray(comp, dtype=np.int64))
    q = np.zeros((len(states), len(states)))
    for i, h in enumerate(states):
        for y in range(m):
            if h[y] < 2:
                continue
            for rate, dst in ((p, (y + 1) % m), (pp, (y - 1) % m)):
                if rate <= 0.0 or dst == y:
                    continue
                new = h.copy()
                new[y] -= 1
                new[dst] += 1
                j = index[tuple(new)]
                q[i, j] += rate
                q[i, i] -= rate
    return states, q


def stationary_distribution(q: np.ndarray) -> np.ndarray:
    """Probability vector in the null space of Q^T (unique when the chain
    absorbs into a single recurrent class)."""
    n = q.shape[0]
    a = np.vstack((q.T, np.ones(n)))
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def occupancy_from_events(eta0: ExclusionConfig, events: EventLog,
                          horizon: float) -> dict:
    """Time fraction spent in each configuration (bitmask key) along a
    recorded trajectory; the oracle side compares this against the exact
    stationary law."""
    ids, hold = replay_state_times(eta0.occupancy, events.edges, events.dirs,
                                   events.times, horizon)
    out = {}
    for s, h in zip(ids, hold):
        out[int(s)] = out.get(int(s), 0.0) + float(h)
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}
