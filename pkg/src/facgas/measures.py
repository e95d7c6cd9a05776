"""Initial and reference measures: Bernoulli profiles, geometric piles,
supercritical equilibria, and the monotone coupling of initial data.

All samplers are pure functions of (profile, size, seed): they draw one
uniform per site from a dedicated counter-based stream (see rng.py) and
invert closed-form CDFs, so identical inputs give bit-identical
configurations and the monotone coupling is a one-uniform-per-site
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .core import ExclusionConfig, Geometry, Torus, ZeroRangeConfig


@dataclass(frozen=True)
class Profile:
    """Macroscopic profile u -> value, in one of four closed forms.

    kinds: ``constant`` (value,), ``step`` (left, right, split),
    ``piecewise`` (xs, ys: linear interpolation, constant extension),
    ``grid`` (cell values on [lo, hi), piecewise constant).
    """

    kind: str
    params: tuple = field(default_factory=tuple)
    arrays: tuple = field(default_factory=tuple)

    @staticmethod
    def constant(value: float) -> "Profile":
        return Profile("constant", (float(value),))

    @staticmethod
    def step(left: float, right: float, split: float = 0.5) -> "Profile":
        return Profile("step", (float(left), float(right), float(split)))

    @staticmethod
    def piecewise(xs, ys) -> "Profile":
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("piecewise profile needs matching 1-d knots")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("piecewise knots must be increasing")
        return Profile("piecewise", (), (xs, ys))

    @staticmethod
    def grid(values, lo: float = 0.0, hi: float = 1.0) -> "Profile":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("grid profile needs a 1-d value array")
        return Profile("grid", (float(lo), float(hi)), (values,))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.full_like(u, self.params[0])
        if self.kind == "step":
            left, right, split = self.params
            return np.where(u < split, left, right)
        if self.kind == "piecewise":
            xs, ys = self.arrays
            return np.interp(u, xs, ys)
        if self.kind == "grid":
            lo, hi = self.params
            (values,) = self.arrays
            idx = np.floor((u - lo) / (hi - lo) * values.size).astype(np.int64)
            return values[np.clip(idx, 0, values.size - 1)]
        raise ValueError(f"unknown profile kind {self.kind!r}")

    def sup(self) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "step":
            return max(self.params[0], self.params[1])
        vals = self.arrays[-1]
        return float(np.max(vals))

    def inf(self) -> float:
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "step":
            return min(self.params[0], self.params[1])
        vals = self.arrays[-1]
        return float(np.min(vals))


def _site_coordinates(geometry: Geometry) -> np.ndarray:
    n = geometry.n_sim
    offset = 0 if geometry.periodic else geometry.offset
    return (np.arange(n) + offset) / geometry.scale


def _resolve_geometry(size: int, geometry: Geometry | None) -> Geometry:
    return Torus(size) if geometry is None else geometry


def sample_bernoulli_profile(profile: Profile, n: int, seed: int,
                             *, geometry: Geometry | None = None,
                             replica: int = 0) -> ExclusionConfig:
    """Independent sites, site x occupied with probability profile(x/N)."""
    geometry = _resolve_geometry(n, geometry)
    if profile.inf() < 0.0 or profile.sup() > 1.0:
        raise ValueError("exclusion profile values must lie in [0, 1]")
    if profile.sup() >= 1.0:
        raise ValueError("exclusion profile must stay bounded away from 1")
    rho = profile(_site_coordinates(geometry))
    u = rng.site_uniforms(seed, "init", replica, geometry.n_sim)
    return ExclusionConfig(geometry, (u < rho).astype(np.uint8))


def _geometric0_from_uniform(u: np.ndarray, mean: np.ndarray) -> np.ndarray:
    """Quantile of the mean-``mean`` geometric law on {0,1,2,...}.

    P(k) = (1/(1+m)) (m/(1+m))^k; the quantile at u is
    floor(log(1-u)/log(m/(1+m))), with mean 0 mapping to the zero pile.
    """
    out = np.zeros(u.shape, dtype=np.int64)
    pos = mean > 0
    q = mean[pos] / (1.0 + mean[pos])
    out[pos] = np.floor(np.log1p(-u[pos]) / np.log(q)).astype(np.int64)
    return out


def _geometric1_from_uniform(u: np.ndarray, alpha: float) -> np.ndarray:
    """Quantile of the equilibrium law on {1,2,...} with mean alpha >= 1."""
    if alpha == 1.0:
        return np.ones(u.shape, dtype=np.int64)
    q = (alpha - 1.0) / alpha
    return 1 + np.floor(np.log1p(-u) / np.log(q)).astype(np.int64)


def sample_geometric_profile(profile: Profile, m: int, seed: int,
                             *, geometry: Geometry | None = None,
                             replica: int = 0) -> ZeroRangeConfig:
    """Independent geometric piles on {0,1,...} with mean profile(y/M)."""
    geometry = _resolve_geometry(m, geometry)
    if profile.inf() < 0.0:
        raise ValueError("zero-range profile values must be nonnegative")
    alpha = profile(_site_coordinates(geometry))
    u = rng.site_uniforms(seed, "init", replica, geometry.n_sim)
    return ZeroRangeConfig(geometry, _geometric0_from_uniform(u, alpha))


def sample_equilibrium_zr(alpha: float, m: int, seed: int,
                          *, geometry: Geometry | None = None,
                          replica: int = 0) -> ZeroRangeConfig:
    """Product equilibrium with marginals on {1,2,...} and mean alpha >= 1."""
    if alpha < 1.0:
        raise ValueError("no equilibrium below the critical density alpha = 1")
    geometry = _resolve_geometry(m, geometry)
    u = rng.site_uniforms(seed, "init", replica, geometry.n_sim)
    return ZeroRangeConfig(geometry, _geometric1_from_uniform(u, float(alpha)))


def sample_monotone_coupling(profile: Profile, alpha_bar: float, m: int, seed: int,
                             *, geometry: Geometry | None = None,
                             replica: int = 0):
    """Couples the profile-fitting measure below the equilibrium at alpha_bar.

    Both configurations are built from the same per-site uniform by CDF
    inversion; since P(omega_y >= k) = q^k <= qbar^(k-1) = P(zeta_y >= k)
    whenever alpha_bar >= sup(profile) + 1, the quantiles are ordered and
    omega <= zeta holds surely, not just in distribution.
    """
    if alpha_bar < profile.sup() + 1.0:
        raise ValueError("alpha_bar must be at least sup(profile) + 1")
    geometry = _resolve_geometry(m, geometry)
    if profile.inf() < 0.0:
        raise ValueError("zero-range profile values must be nonnegative")
    alpha = profile(_site_coordinates(geometry))
    u = rng.site_uniforms(seed, "init", replica, geometry.n_sim)
    omega = ZeroRangeConfig(geometry, _geometric0_from_uniform(u, alpha))
    zeta = ZeroRangeConfig(geometry, _geometric1_from_uniform(u, float(alpha_bar)))
    if np.any(omega.heights > zeta.heights):
        raise AssertionError("monotone coupling violated; construction bug")
    return omega, zeta


def sample_bernoulli_heights(profile: Profile, m: int, seed: int,
                             *, geometry: Geometry | None = None,
                             replica: int = 0) -> ZeroRangeConfig:
    """Bernoulli piles with mean profile(y/M) <= 1, concentrated on frozen
    configurations; the subcritical stand-in where no equilibrium exists."""
    geometry = _resolve_geometry(m, geometry)
    if profile.inf() < 0.0 or profile.sup() > 1.0:
        raise ValueError("Bernoulli height profile values must lie in [0, 1]")
    c = profile(_site_coordinates(geometry))
    u = rng.site_uniforms(seed, "init", replica, geometry.n_sim)
    return ZeroRangeConfig(geometry, (u < c).astype(np.int64))
