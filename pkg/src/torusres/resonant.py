"""Resonant decomposition of states as atomic operator-valued measures.

For a direction p the support of a state splits into lines ``k = r + (n/|p|^2) p``.
Each populated line contributes one atom: a rank-one positive operator built
from the amplitude vector along the line, sitting at the momentum ``h r`` on
the hyperplane orthogonal to p.  Traces, positivity and the mass partition
are then exact identities rather than numerical approximations.

The coupling of an observable and a time window to these measures happens
through an operator-valued kernel with zero diagonal whose (m, n) entry holds
the window transform at the line beat frequency ``(n^2 - m^2)/(2 |p|^2)``.
Pairings of the evolved state split exactly, at every scale h, into the
kernel trace plus a remainder carrying only the momentum offset of the
observable's coefficients along the line; the remainder is O(h).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ._pack import group_rows
from .lattice import (LatticePoint, PrimitiveDirection, decompose_block,
                      primitive_direction)
from .state import FourierState, near_hyperplane_mass
from .symbols import CoefficientFn, Symbol, TimeWindow, mean_mode, zero_mean_part
from .wigner import _Kahan, _marginal_complex, time_averaged_pair

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ResonantAtom:
    """Rank-one contribution of one populated line.

    ``v`` maps line indices n to the state's amplitudes along the line; the
    atom represents the positive operator v (x) conj(v) located at momentum
    ``xi = h r``.  All populated n share the congruence class ``class_c``
    modulo |p|^2.
    """

    r_scaled: LatticePoint
    xi: np.ndarray
    ns: np.ndarray
    vs: np.ndarray
    class_c: int

    def __post_init__(self):
        self.xi.setflags(write=False)
        self.ns.setflags(write=False)
        self.vs.setflags(write=False)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(self.vs.real**2 + self.vs.imag**2))

    def windowed_norm_sq(self, m_max: int) -> float:
        sel = np.abs(self.ns) <= m_max
        v = self.vs[sel]
        return float(np.sum(v.real**2 + v.imag**2))


@dataclass(frozen=True)
class ResonantMeasure:
    """Atomic operator-valued measure of a state along one direction."""

    omega: PrimitiveDirection
    h: float
    atoms: Tuple[ResonantAtom, ...]

    @property
    def d(self) -> int:
        return self.omega.d

    @property
    def total_trace(self) -> float:
        return sum(atom.norm_sq for atom in self.atoms)

    @property
    def max_index(self) -> int:
        if not self.atoms:
            return 0
        return int(max(np.max(np.abs(atom.ns)) for atom in self.atoms))


@dataclass(frozen=True)
class OperatorWindowMatrix:
    """Dense view of an operator on line indices |m|, |n| <= M.

    ``tail_bound`` dominates the Hilbert-Schmidt norm of whatever the window
    cut off, computed from the closed-form decay of the ingredients.
    """

    m_max: int
    entries: np.ndarray
    tail_bound: float

    def entry(self, m: int, n: int) -> complex:
        return complex(self.entries[m + self.m_max, n + self.m_max])


def build_resonant(u: FourierState, h: float,
                   omega: PrimitiveDirection) -> ResonantMeasure:
    """Decompose a state into line atoms along a direction.

    The atoms partition the support, so the total trace equals the state's
    squared norm exactly.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if u.d < 2:
        raise ValueError("resonant decompositions require d >= 2")
    if omega.d != u.d:
        raise ValueError("dimension mismatch")
    p2 = omega.norm_sq
    n_all, r_scaled = decompose_block(u.modes, omega)
    uniq, inverse, order = group_rows(r_scaled)
    atoms: List[ResonantAtom] = []
    if order.size:
        bounds = np.flatnonzero(np.diff(inverse[order])) + 1
        chunks = np.split(order, bounds)
        for chunk in chunks:
            gid = inverse[chunk[0]]
            row = tuple(int(c) for c in uniq[gid])
            ns = n_all[chunk]
            sub = np.argsort(ns, kind="stable")
            ns = np.ascontiguousarray(ns[sub])
            vs = np.ascontiguousarray(u.amps[chunk][sub])
            atoms.append(ResonantAtom(
                r_scaled=row,
                xi=(h / p2) * np.asarray(row, dtype=float),
                ns=ns,
                vs=vs,
                class_c=int(ns[0] % p2),
            ))
    return ResonantMeasure(omega=omega, h=h, atoms=tuple(atoms))


def trace_pair(R: ResonantMeasure, b: CoefficientFn) -> complex:
    """Trace of the measure integrated against b: sum of b(h r) ||v||^2."""
    total = 0.0j
    for atom in R.atoms:
        total += complex(b.value(atom.xi)) * atom.norm_sq
    return total


def operator_window(R: ResonantMeasure, b: CoefficientFn,
                    m_max: int) -> OperatorWindowMatrix:
    """Matrix of the integrated operator on line indices |m|, |n| <= m_max."""
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    size = 2 * m_max + 1
    entries = np.zeros((size, size), dtype=np.complex128)
    tail = 0.0
    for atom in R.atoms:
        weight = complex(b.value(atom.xi))
        sel = np.abs(atom.ns) <= m_max
        v = atom.vs[sel]
        pos = atom.ns[sel] + m_max
        entries[np.ix_(pos, pos)] += weight * np.outer(v, np.conj(v))
        win = atom.windowed_norm_sq(m_max)
        full = atom.norm_sq
        tail += abs(weight) * math.sqrt(max(full * full - win * win, 0.0))
    return OperatorWindowMatrix(m_max=m_max, entries=entries, tail_bound=tail)


def trace_norm_bound_gap(R: ResonantMeasure, b: CoefficientFn) -> float:
    """Slack in the trace-norm bound ||u||^2 sup|b| for the integrated operator.

    The atomic trace norm is at most the absolute sum over atoms, so the
    returned value is nonnegative up to roundoff, with equality for b == 1.
    """
    absolute = sum(abs(complex(b.value(atom.xi))) * atom.norm_sq for atom in R.atoms)
    return R.total_trace * b.sup_norm() - absolute


def evolve_resonant(R: ResonantMeasure, t: float) -> ResonantMeasure:
    """Conjugate the measure by the line flow for time t.

    Line amplitudes pick up the eigenphases exp(-i t n^2 / (2 |p|^2));
    positions, rank-one structure and traces are untouched.
    """
    p2 = R.omega.norm_sq
    atoms = []
    for atom in R.atoms:
        phases = np.exp(-0.5j * t * atom.ns.astype(float) ** 2 / p2)
        atoms.append(ResonantAtom(r_scaled=atom.r_scaled, xi=atom.xi.copy(),
                                  ns=atom.ns.copy(), vs=atom.vs * phases,
                                  class_c=atom.class_c))
    return ResonantMeasure(omega=R.omega, h=R.h, atoms=tuple(atoms))


# ---------------------------------------------------------------------------
# the observable/window kernel


def _line_multipliers(a: Symbol, omega: PrimitiveDirection) -> Dict[int, CoefficientFn]:
    """Coefficients of the observable's modes lying on the line of omega."""
    out: Dict[int, CoefficientFn] = {}
    p = omega.p
    for q, fn in a.modes.items():
        if all(c == 0 for c in q):
            continue
        lam = None
        for qc, pc in zip(q, p):
            if pc != 0:
                lam = qc // pc
                break
        if lam is None or lam == 0:
            continue
        if tuple(lam * pc for pc in p) == q:
            out[lam] = fn
    return out


def _omitted_window_sq_sum(phi: TimeWindow, lam: int, p2: int, m_max: int) -> float:
    """Upper bound for the squared transforms over indices outside the window.

    For line mode lam the kernel entries sit at frequencies
    ``-lam (n + lam p^2 / 2)``; the included column indices are symmetric
    about ``-lam p^2 / 2``, so both discarded tails start at the same
    distance and are bounded by a leading term plus an integral remainder.
    """
    amp = (phi.amplitude * phi.tau) ** 2 * _TWO_PI
    alpha = phi.tau ** 2
    half = m_max - abs(lam) * p2 / 2.0
    if half < 0:
        # window misses the whole band: bound the full bi-infinite series
        return amp * (1.0 + 2.0 * math.sqrt(math.pi / alpha) / abs(lam))
    s0 = abs(lam) * (half + 1.0)
    lead = amp * math.exp(-alpha * s0 * s0)
    remainder = amp * math.sqrt(math.pi / alpha) / (2.0 * abs(lam)) \
        * math.erfc(math.sqrt(alpha) * s0)
    return 2.0 * (lead + remainder)


def coupling_kernel_window(omega: PrimitiveDirection, xi: Sequence[float], a: Symbol,
                   phi: TimeWindow, m_max: int) -> OperatorWindowMatrix:
    """Windowed kernel coupling an observable and a window to one direction.

    Entry (m, n) with ``m - n = lam |p|^2`` holds
    ``(2 pi)^{-d/2} phi_hat((n^2 - m^2)/(2 |p|^2)) a_{lam p}(xi)``;
    the diagonal is zero and all other entries vanish.
    """
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    xi = np.asarray(xi, dtype=float)
    size = 2 * m_max + 1
    entries = np.zeros((size, size), dtype=np.complex128)
    scale = _TWO_PI ** (-a.d / 2)
    p2 = omega.norm_sq
    tail_sq = 0.0
    for lam, fn in sorted(_line_multipliers(a, omega).items()):
        coeff = complex(fn.value(xi))
        shift = lam * p2
        n_lo = max(-m_max, -m_max - shift)
        n_hi = min(m_max, m_max - shift)
        if n_lo <= n_hi:
            ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
            ms = ns + shift
            freqs = (ns.astype(float) ** 2 - ms.astype(float) ** 2) / (2.0 * p2)
            entries[ms + m_max, ns + m_max] = scale * coeff * np.asarray(phi.transform(freqs))
        tail_sq += scale**2 * abs(coeff) ** 2 * _omitted_window_sq_sum(phi, lam, p2, m_max)
    return OperatorWindowMatrix(m_max=m_max, entries=entries,
                                tail_bound=math.sqrt(tail_sq))


def hs_norm_sq_window(K: OperatorWindowMatrix) -> float:
    """Squared Hilbert-Schmidt norm of the windowed entries."""
    return float(np.sum(K.entries.real**2 + K.entries.imag**2))


def window_sq_halfint_sum(phi: TimeWindow) -> float:
    """Sum of |phi_hat(n/2)|^2 over integer n, exact to underflow."""
    amp = (phi.amplitude * phi.tau) ** 2 * _TWO_PI
    alpha = phi.tau ** 2
    n_max = int(math.ceil(2.0 * math.sqrt(745.0 / alpha))) + 1
    ns = np.arange(-n_max, n_max + 1, dtype=float)
    return float(amp * np.sum(np.exp(-alpha * (ns / 2.0) ** 2)))


def hs_bound_rhs(a: Symbol, phi: TimeWindow) -> float:
    """Closed-form majorant for the summed squared kernel norms.

    Equals ``(2 pi)^{-d}`` times the half-integer window-transform mass times
    the observable's off-mean squared sup-coefficient mass.
    """
    mode_mass = sum(fn.sup_norm() ** 2 for q, fn in a.modes.items()
                    if any(c != 0 for c in q))
    return _TWO_PI ** (-a.d) * window_sq_halfint_sum(phi) * mode_mass


def suggest_window_size(a: Symbol, omega: PrimitiveDirection, phi: TimeWindow,
                        tol: float = 1e-13) -> int:
    """Smallest window size with kernel tail bound below tol."""
    m = omega.norm_sq
    while m < 100000:
        tail_sq = 0.0
        for lam, fn in _line_multipliers(a, omega).items():
            tail_sq += _TWO_PI ** (-a.d) * fn.sup_norm() ** 2 \
                * _omitted_window_sq_sum(phi, lam, omega.norm_sq, m)
        if math.sqrt(tail_sq) < tol:
            return m
        m *= 2
    raise ValueError("no window satisfies the tail tolerance")


# ---------------------------------------------------------------------------
# exact split of the time-averaged pairing


def _require_zero_mean(a: Symbol):
    if (0,) * a.d in a.modes:
        raise ValueError("observable must have zero spatial mean")


def _line_term(u: FourierState, h: float, a: Symbol, phi: TimeWindow,
               remainder: bool) -> complex:
    acc = _Kahan()
    for q in a.sorted_modes():
        fn = a.modes[q]
        pdir = primitive_direction(q)
        p2 = pdir.norm_sq
        pv = pdir.as_array()
        i, j = u.shift_pairs(q)
        if i.size == 0:
            continue
        n = u.modes @ pv
        freqs = (n[i] ** 2 - n[j] ** 2) / (2.0 * p2)
        xi_line = h * (u.modes[i] - np.outer(n[i] / p2, pv.astype(float)))
        if remainder:
            mid = h * (u.modes[i] + 0.5 * np.asarray(q, dtype=float))
            coeff = fn.value(mid) - fn.value(xi_line)
        else:
            coeff = fn.value(xi_line)
        vals = u.amps[i] * np.conj(u.amps[j]) * phi.transform(freqs) * coeff
        acc.add(complex(np.sum(vals)))
    return _TWO_PI ** (-u.d / 2) * acc.total


def resonant_term(u: FourierState, h: float, a: Symbol, phi: TimeWindow) -> complex:
    """Trace of the kernel against the state's resonant decomposition.

    Runs over the directions carried by the observable's modes; within each
    line every coefficient is evaluated at the atom position ``h r`` instead
    of the pair midpoint.  All populated line indices are covered exactly, so
    no window truncation enters.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    _require_zero_mean(a)
    return _line_term(u, h, a, phi, remainder=False)


def remainder_term(u: FourierState, h: float, a: Symbol, phi: TimeWindow) -> complex:
    """Exact complement of the kernel trace inside the time-averaged pairing.

    Each term carries the coefficient increment between the pair midpoint and
    the atom position; the increment is O(h) times the along-line index, which
    the window transform keeps bounded, so the total is O(h) ||u||^2.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    _require_zero_mean(a)
    return _line_term(u, h, a, phi, remainder=True)


def kernel_trace_residual(u: FourierState, h: float, a: Symbol,
                        phi: TimeWindow) -> float:
    """|time-averaged pairing - kernel trace| (equals |remainder| to roundoff)."""
    _require_zero_mean(a)
    tap = time_averaged_pair(u, h, a, phi).value
    return abs(tap - resonant_term(u, h, a, phi))


# ---------------------------------------------------------------------------
# densities and coefficients of the propagated measure


def _line_multiplier_of(k: Sequence[int], omega: PrimitiveDirection) -> int:
    kk = tuple(int(c) for c in k)
    if all(c == 0 for c in kk):
        raise ValueError("the zero mode belongs to the averaged part")
    lam = None
    for kc, pc in zip(kk, omega.p):
        if pc != 0:
            if kc % pc != 0:
                raise ValueError("mode is not on the line of the direction")
            lam = kc // pc
            break
    if lam is None or tuple(lam * pc for pc in omega.p) != kk:
        raise ValueError("mode is not on the line of the direction")
    if lam == 0:
        raise ValueError("the zero mode belongs to the averaged part")
    return lam


def density_fourier_coefficient(R: ResonantMeasure, t: float, k: Sequence[int],
                            b: CoefficientFn) -> complex:
    """Spatial Fourier coefficient of the propagated line density against b.

    Only modes k on the line of the measure's direction are admissible; the
    coefficient collects the off-diagonal pair products at index offset
    ``k . p`` from every atom, after time t of line evolution.
    """
    lam = _line_multiplier_of(k, R.omega)
    p2 = R.omega.norm_sq
    shift = lam * p2
    total = 0.0j
    for atom in R.atoms:
        phases = np.exp(-0.5j * t * atom.ns.astype(float) ** 2 / p2)
        vt = atom.vs * phases
        pos = np.searchsorted(atom.ns, atom.ns + shift)
        pos_clip = np.minimum(pos, atom.ns.size - 1)
        hit = atom.ns[pos_clip] == atom.ns + shift
        if not hit.any():
            continue
        src = np.flatnonzero(hit)
        dst = pos_clip[hit]
        pair_sum = complex(np.sum(vt[dst] * np.conj(vt[src])))
        total += complex(b.value(atom.xi)) * pair_sum
    return _TWO_PI ** (-R.d / 2) * total


def trace_density_eval(R: ResonantMeasure, t: float, s, b: CoefficientFn):
    """Pointwise trace density on the closed geodesic, after time t.

    For rank-one atoms the density at arc length s is
    ``sum_atoms b(h r) |sum_n v_t(n) phi_n(s)|^2`` with the line basis
    ``phi_n(s) = exp(i n s / |p|) / sqrt(2 pi |p|)``; it is nonnegative and
    integrates to the trace pairing.
    """
    if not b.nonnegative:
        raise ValueError("density evaluation requires a nonnegative coefficient")
    p2 = R.omega.norm_sq
    p_len = math.sqrt(p2)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros(s_arr.shape[0])
    for atom in R.atoms:
        phases = np.exp(-0.5j * t * atom.ns.astype(float) ** 2 / p2)
        vt = atom.vs * phases
        waves = np.exp(1j * np.outer(s_arr, atom.ns.astype(float)) / p_len)
        f = waves @ vt / math.sqrt(_TWO_PI * p_len)
        out += float(b.value(atom.xi).real) * (f.real**2 + f.imag**2)
    if np.ndim(s) == 0:
        return float(out[0])
    return out


def geodesic_grid(omega: PrimitiveDirection, n_points: int) -> np.ndarray:
    """Uniform arc-length grid on the closed geodesic of a direction."""
    length = _TWO_PI * math.sqrt(omega.norm_sq)
    return np.arange(n_points) * (length / n_points)


# ---------------------------------------------------------------------------
# assembled prediction and diagnostics


def propagation_pair(u: FourierState, h: float, a: Symbol,
                      phi: TimeWindow) -> complex:
    """Finite-h prediction for the time-averaged pairing.

    Sum of the kernel trace of the observable's zero-mean part and the
    window-integrated momentum marginal of its spatial mean; the true pairing
    differs from this by the O(h) remainder only.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    azm = zero_mean_part(a)
    res = 0.0j
    if azm.modes and u.support_size:
        res = resonant_term(u, h, azm, phi)
    diag = phi.integral() * _marginal_complex(u, h, mean_mode(a))
    return res + diag


def vanishing_criterion(u_family, omega: PrimitiveDirection, n_cut: float,
                        h_schedule: Sequence[float]) -> List[float]:
    """Near-hyperplane mass of a family along a scale schedule.

    Decay of the sequence certifies that the family carries no resonant mass
    along the direction; a floor certifies the opposite.
    """
    if n_cut <= 0:
        raise ValueError("n_cut must be positive")
    return [near_hyperplane_mass(u_family.realize(h), omega, n_cut)
            for h in h_schedule]


def domination_gap(u: FourierState, h: float, omega: PrimitiveDirection,
                   b: CoefficientFn) -> float:
    """Slack in the marginal domination of the resonant trace.

    The marginal evaluates b at the full momentum ``h k`` while the trace
    evaluates it at the line offset ``h r``; the discrepancy is at most
    ``h N sup|grad b|`` per unit mass, with N the largest populated line
    index.  The returned value is nonnegative up to roundoff.
    """
    if not b.nonnegative:
        raise ValueError("domination requires a nonnegative coefficient")
    if h <= 0:
        raise ValueError("h must be positive")
    n = u.modes @ omega.as_array()
    n_eff = int(np.max(np.abs(n))) if n.size else 0
    marginal = float(_marginal_complex(u, h, b).real)
    trace = trace_pair(build_resonant(u, h, omega), b).real
    return marginal + h * n_eff * b.grad_sup_norm() * u.norm_sq - trace


# ---------------------------------------------------------------------------
# JSON interface


def measure_to_json(R: ResonantMeasure) -> str:
    payload = {
        "omega": [int(c) for c in R.omega.p],
        "h": R.h,
        "atoms": [
            {
                "r_scaled": [int(c) for c in atom.r_scaled],
                "entries": [{"n": int(n), "re": float(v.real), "im": float(v.imag)}
                            for n, v in zip(atom.ns, atom.vs)],
            }
            for atom in R.atoms
        ],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def measure_from_json(text: str) -> ResonantMeasure:
    payload = json.loads(text)
    omega = primitive_direction(payload["omega"])
    h = float(payload["h"])
    atoms = []
    for raw in payload["atoms"]:
        row = tuple(int(c) for c in raw["r_scaled"])
        ns = np.asarray([e["n"] for e in raw["entries"]], dtype=np.int64)
        vs = np.asarray([complex(e["re"], e["im"]) for e in raw["entries"]],
                        dtype=np.complex128)
        order = np.argsort(ns)
        ns, vs = ns[order], vs[order]
        atoms.append(ResonantAtom(
            r_scaled=row,
            xi=(h / omega.norm_sq) * np.asarray(row, dtype=float),
            ns=ns, vs=vs, class_c=int(ns[0] % omega.norm_sq),
        ))
    atoms.sort(key=lambda atom: atom.r_scaled)
    return ResonantMeasure(omega=omega, h=h, atoms=tuple(atoms))
