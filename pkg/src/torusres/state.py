"""Sparse Fourier representation of square-integrable functions on the d-torus.

States are finite maps ``k -> u_hat(k)`` over the integer lattice, stored as
lex-sorted coordinate/amplitude arrays so that shifted joins (the workhorse of
every pairing) vectorize.  The free flow acts diagonally with the convention
``psi_k -> exp(-i t |k|^2 / 2) psi_k``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, Mapping, Sequence, Tuple, Union

import numpy as np

from ._pack import PackedIndex, lex_order
from .lattice import LatticePoint, PrimitiveDirection

Complex = Union[complex, float]


@dataclass(frozen=True)
class FourierState:
    """Immutable sparse vector of basis coefficients.

    ``modes`` is an (N, d) int64 array in lexicographic order, ``amps`` the
    matching complex amplitudes.  ``dropped_mass`` is an upper bound on the
    squared-coefficient mass removed by truncation when the state was
    generated from a closed-form profile (0 for exact states).
    """

    d: int
    modes: np.ndarray
    amps: np.ndarray
    dropped_mass: float = 0.0

    def __post_init__(self):
        self.modes.setflags(write=False)
        self.amps.setflags(write=False)

    @cached_property
    def norm_sq(self) -> float:
        return float(np.sum(self.amps.real**2 + self.amps.imag**2))

    @cached_property
    def mode_norms_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.modes, self.modes)

    @cached_property
    def _index(self) -> PackedIndex:
        return PackedIndex(self.modes)

    @property
    def support_size(self) -> int:
        return self.modes.shape[0]

    def amplitude(self, k: Sequence[int]) -> complex:
        idx = self._index.lookup(np.asarray([k], dtype=np.int64))[0]
        return complex(self.amps[idx]) if idx >= 0 else 0.0j

    def shift_pairs(self, q: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Index pairs (i, j) with ``modes[j] == modes[i] + q``."""
        if self.support_size == 0:
            e = np.empty(0, dtype=np.intp)
            return e, e
        target = self.modes + np.asarray(q, dtype=np.int64)
        j = self._index.lookup(target)
        hit = j >= 0
        return np.flatnonzero(hit), j[hit]

    def items(self) -> Iterator[tuple[LatticePoint, complex]]:
        for row, a in zip(self.modes, self.amps):
            yield tuple(int(c) for c in row), complex(a)


def make_state(d: int, amplitudes: Mapping[Sequence[int], Complex],
               dropped_mass: float = 0.0) -> FourierState:
    """Build a state from a mode -> amplitude mapping (zeros are kept out)."""
    items = [(tuple(int(c) for c in k), complex(v)) for k, v in amplitudes.items()
             if v != 0]
    for k, _ in items:
        if len(k) != d:
            raise ValueError(f"mode {k} does not have dimension {d}")
    items.sort(key=lambda kv: kv[0])
    if items:
        modes = np.asarray([k for k, _ in items], dtype=np.int64)
        amps = np.asarray([v for _, v in items], dtype=np.complex128)
    else:
        modes = np.empty((0, d), dtype=np.int64)
        amps = np.empty(0, dtype=np.complex128)
    return FourierState(d=d, modes=modes, amps=amps, dropped_mass=float(dropped_mass))


def _from_arrays(d: int, modes: np.ndarray, amps: np.ndarray,
                 dropped_mass: float = 0.0) -> FourierState:
    order = lex_order(modes)
    modes = np.ascontiguousarray(modes[order], dtype=np.int64)
    amps = np.ascontiguousarray(amps[order], dtype=np.complex128)
    return FourierState(d=d, modes=modes, amps=amps, dropped_mass=float(dropped_mass))


def norm_sq(u: FourierState) -> float:
    """Total squared mass, equal to the squared L2 norm by orthonormality."""
    return u.norm_sq


def evolve(u: FourierState, t: float) -> FourierState:
    """Free flow for time t: each amplitude gains the phase exp(-i t |k|^2 / 2)."""
    phases = np.exp(-0.5j * t * u.mode_norms_sq)
    return FourierState(d=u.d, modes=u.modes, amps=u.amps * phases,
                        dropped_mass=u.dropped_mass)


def add_states(states: Sequence[FourierState],
               weights: Sequence[Complex] | None = None) -> FourierState:
    if not states:
        raise ValueError("empty superposition")
    d = states[0].d
    if weights is None:
        weights = [1.0] * len(states)
    acc: Dict[LatticePoint, complex] = {}
    dropped = 0.0
    for w, s in zip(weights, states):
        if s.d != d:
            raise ValueError("dimension mismatch in superposition")
        dropped += abs(w) ** 2 * s.dropped_mass
        for k, a in s.items():
            acc[k] = acc.get(k, 0.0j) + complex(w) * a
    return make_state(d, acc, dropped_mass=dropped)


def h_oscillation_tail(u: FourierState, h: float, radius: float) -> float:
    """Mass carried by modes with |k| > radius / h."""
    if h <= 0 or radius <= 0:
        raise ValueError("h and radius must be positive")
    cut = (radius / h) ** 2
    mask = u.mode_norms_sq > cut
    a = u.amps[mask]
    return float(np.sum(a.real**2 + a.imag**2))


def near_hyperplane_mass(u: FourierState, p: PrimitiveDirection, n_cut: float) -> float:
    """Mass of modes within the band |k . p| < n_cut around the hyperplane."""
    if n_cut <= 0:
        raise ValueError("n_cut must be positive")
    if p.d != u.d:
        raise ValueError("dimension mismatch")
    n = u.modes @ p.as_array()
    mask = np.abs(n) < n_cut
    a = u.amps[mask]
    return float(np.sum(a.real**2 + a.imag**2))


def position_density_pair(u: FourierState, m_modes: Mapping[Sequence[int], Complex]) -> complex:
    """Integral of m(x) |u(x)|^2 over the torus.

    ``m_modes`` holds coefficients in the plain-wave convention
    ``m(x) = sum_q m_hat(q) exp(i q . x)``, i.e. m == 1 is {0: 1}.
    """
    coeffs = {tuple(int(c) for c in q): complex(v) for q, v in m_modes.items()}
    total = 0.0j
    comp = 0.0j
    for q in sorted(coeffs):
        coeff = coeffs[q]
        i, j = u.shift_pairs(q)
        if i.size == 0:
            continue
        term = coeff * np.sum(u.amps[i] * np.conj(u.amps[j]))
        # compensated accumulation keeps the mode-order sum reproducible
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return complex(total)


# ---------------------------------------------------------------------------
# generators


def _gaussian_profile_transform(sigma: float, d: int) -> float:
    # value of the profile transform at zero frequency offset, with the
    # normalization u_hat = (2 pi)^{d/2} h^{d/4} rho_hat(sqrt(h)(k - xi0/h))
    return (sigma / math.sqrt(2.0 * math.pi)) ** d


def gaussian_profile_norm_sq(sigma: float, d: int) -> float:
    """Squared L2(R^d) norm of the Gaussian profile exp(-|y|^2/(2 sigma^2))."""
    return (sigma * math.sqrt(math.pi)) ** d


def wave_packet(x0: Sequence[float], xi0: Sequence[float], sigma: float,
                h: float, trunc: float = 1e-12) -> FourierState:
    """Periodized Gaussian packet concentrated at (x0, xi0) at scale h.

    Coefficients follow
    ``u_hat(k) = (2 pi)^{d/2} h^{d/4} rho_hat(sqrt(h)(k - xi0/h)) e^{-i(k - xi0/h).x0}``
    with the Gaussian profile ``rho(y) = exp(-|y|^2/(2 sigma^2))``.  Modes whose
    squared modulus falls below ``trunc`` times the peak are dropped; the
    discarded mass is bounded in closed form and recorded on the state.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    d = x0.shape[0]
    if xi0.shape[0] != d:
        raise ValueError("x0 and xi0 must share a dimension")
    center = xi0 / h
    alpha = sigma * sigma * h  # decay rate of |u_hat|^2 around the center
    rad_sq = max(-math.log(trunc), 1.0) / alpha
    rad = math.sqrt(rad_sq)
    axes = [np.arange(math.ceil(c - rad), math.floor(c + rad) + 1, dtype=np.int64)
            for c in center]
    if any(ax.size == 0 for ax in axes):
        return make_state(d, {})
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    dist_sq = np.sum((pts - center) ** 2, axis=1)
    keep = dist_sq <= rad_sq
    pts = pts[keep]
    dist_sq = dist_sq[keep]
    amp_scale = (2.0 * math.pi) ** (d / 2) * h ** (d / 4) * _gaussian_profile_transform(sigma, d)
    envelope = amp_scale * np.exp(-0.5 * alpha * dist_sq)
    phase = np.exp(-1j * ((pts - center) @ x0))
    amps = envelope * phase
    peak = float(np.max(envelope)) if envelope.size else 0.0
    keep2 = envelope**2 >= trunc * peak**2
    pts, amps = pts[keep2], amps[keep2]
    kept_mass = float(np.sum(np.abs(amps) ** 2))
    total_upper = amp_scale**2 * _lattice_gaussian_sum_upper(alpha, center)
    dropped = max(total_upper - kept_mass, 0.0)
    return _from_arrays(d, pts, amps, dropped_mass=dropped)


def _lattice_gaussian_sum_upper(alpha: float, center: np.ndarray) -> float:
    # upper bound for sum over Z^d of exp(-alpha |k - c|^2), as a product of
    # per-axis sums, each bounded by an explicit window plus integral tails
    total = 1.0
    for c in center:
        width = math.sqrt(745.0 / alpha)  # exp(-745) underflows; window is exact
        js = np.arange(math.ceil(c - width), math.floor(c + width) + 1)
        inner = float(np.sum(np.exp(-alpha * (js - c) ** 2)))
        tail = math.sqrt(math.pi / alpha) * math.erfc(math.sqrt(alpha) * width)
        total *= inner + tail + 2.0 * math.exp(-alpha * width * width)
    return total


def resonant_plane_wave(profile_modes: Mapping[Sequence[int], Complex],
                        xi0_dir: Sequence[int], n: int,
                        trunc: float = 0.0) -> tuple[FourierState, float]:
    """Profile modulated by the lattice frequency n*K; returns (state, h = 1/n).

    The carrier xi0 = K lands exactly on the lattice at scale h = 1/n, so the
    output support is the profile support translated by n*K and no truncation
    occurs (``trunc`` is accepted for interface symmetry).
    """
    del trunc
    if n < 1:
        raise ValueError("n must be a positive integer")
    kdir = tuple(int(c) for c in xi0_dir)
    d = len(kdir)
    shifted = {}
    for k, a in profile_modes.items():
        kk = tuple(int(c) for c in k)
        if len(kk) != d:
            raise ValueError("profile mode dimension mismatch")
        shifted[tuple(c + n * q for c, q in zip(kk, kdir))] = complex(a)
    return make_state(d, shifted), 1.0 / n


# ---------------------------------------------------------------------------
# parametric families


@dataclass(frozen=True)
class WavePacketFamily:
    x0: Tuple[float, ...]
    xi0: Tuple[float, ...]
    sigma: float
    trunc: float = 1e-12
    label: str = "wave_packet"

    @property
    def d(self) -> int:
        return len(self.x0)

    @property
    def rho_norm_sq(self) -> float:
        return gaussian_profile_norm_sq(self.sigma, self.d)

    def realize(self, h: float) -> FourierState:
        return wave_packet(self.x0, self.xi0, self.sigma, h, self.trunc)


@dataclass(frozen=True)
class PlaneWaveFamily:
    profile: Tuple[Tuple[LatticePoint, complex], ...]
    direction: LatticePoint
    label: str = "plane_wave"

    @property
    def d(self) -> int:
        return len(self.direction)

    @property
    def profile_dict(self) -> Dict[LatticePoint, complex]:
        return {k: a for k, a in self.profile}

    @property
    def profile_mass(self) -> float:
        return sum(abs(a) ** 2 for _, a in self.profile)

    def realize(self, h: float) -> FourierState:
        n = round(1.0 / h)
        if n < 1 or abs(n * h - 1.0) > 1e-9:
            raise ValueError(f"plane-wave families need h = 1/n, got h={h}")
        state, _ = resonant_plane_wave(self.profile_dict, self.direction, n)
        return state


@dataclass(frozen=True)
class RandomModesFamily:
    d: int
    n_modes: int
    box: int
    seed: int
    normalize: bool = True
    label: str = "random"

    def realize(self, h: float) -> FourierState:
        del h  # the same state is used along the whole schedule
        return random_state(self.d, self.n_modes, self.box, self.seed, self.normalize)


@dataclass(frozen=True)
class ShellFamily:
    d: int
    radius: float
    width: float
    seed: int
    label: str = "shell"

    def realize(self, h: float) -> FourierState:
        del h
        lim = int(math.floor(self.radius + self.width)) + 1
        axes = [np.arange(-lim, lim + 1, dtype=np.int64)] * self.d
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=1)
        norms = np.sqrt(np.sum(pts.astype(float) ** 2, axis=1))
        keep = np.abs(norms - self.radius) <= self.width
        pts = pts[keep]
        rng = np.random.default_rng(self.seed)
        amps = rng.standard_normal(pts.shape[0]) + 1j * rng.standard_normal(pts.shape[0])
        total = math.sqrt(float(np.sum(np.abs(amps) ** 2))) or 1.0
        return _from_arrays(self.d, pts, amps / total)


@dataclass(frozen=True)
class SuperpositionFamily:
    parts: Tuple[object, ...]
    weights: Tuple[complex, ...]
    label: str = "superposition"

    @property
    def d(self) -> int:
        return self.parts[0].d

    def realize(self, h: float) -> FourierState:
        return add_states([p.realize(h) for p in self.parts], self.weights)


StateFamily = Union[WavePacketFamily, PlaneWaveFamily, RandomModesFamily,
                    ShellFamily, SuperpositionFamily]


def random_state(d: int, n_modes: int, box: int, seed: int,
                 normalize: bool = True) -> FourierState:
    """Seeded random state with distinct modes in [-box, box]^d."""
    rng = np.random.default_rng(seed)
    seen: Dict[LatticePoint, complex] = {}
    while len(seen) < n_modes:
        draw = rng.integers(-box, box + 1, size=(n_modes - len(seen), d))
        for row in draw:
            seen.setdefault(tuple(int(c) for c in row), 0.0j)
    keys = sorted(seen)
    vals = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    if normalize:
        vals = vals / math.sqrt(float(np.sum(np.abs(vals) ** 2)))
    return make_state(d, dict(zip(keys, vals)))


# ---------------------------------------------------------------------------
# JSON interface


def state_to_json(u: FourierState) -> str:
    payload = {
        "d": u.d,
        "modes": [{"k": [int(c) for c in k], "re": a.real, "im": a.imag}
                  for k, a in u.items()],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def state_from_json(text: str) -> FourierState:
    payload = json.loads(text)
    amplitudes = {tuple(m["k"]): complex(m["re"], m["im"]) for m in payload["modes"]}
    return make_state(int(payload["d"]), amplitudes)
