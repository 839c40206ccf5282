"""Phase-space pairings of states against observables under the free flow.

Every pairing is a finite double sum over support pairs (k, j = k + q) with q
ranging over the observable's spatial modes, giving cost
O(|support| * |modes|).  Terms are generated in lexicographic support order
per mode and the per-mode partial sums are combined with compensated
addition, so results are reproducible for identical inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .state import FourierState, evolve
from .symbols import CoefficientFn, Symbol, TimeWindow


@dataclass(frozen=True)
class PairingResult:
    """Pairing value with the bookkeeping needed to trust it.

    ``truncation_tail_bound`` bounds the modulus of everything left out by
    the state's generation-time truncation; sums over the stored support are
    complete, so exact states report a zero tail.
    """

    value: complex
    terms_summed: int
    truncation_tail_bound: float


class _Kahan:
    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0j
        self.comp = 0.0j

    def add(self, term: complex):
        y = term - self.comp
        s = self.total + y
        self.comp = (s - self.total) - y
        self.total = s


def _dropped_tail(u: FourierState, a: Symbol, phi_sup: float) -> float:
    if u.dropped_mass <= 0:
        return 0.0
    sup_sum = sum(fn.sup_norm() for fn in a.modes.values())
    mass = math.sqrt(u.norm_sq)
    dropped = math.sqrt(u.dropped_mass)
    scale = (2.0 * math.pi) ** (-u.d / 2)
    return scale * sup_sum * phi_sup * (2.0 * mass * dropped + dropped * dropped)


def wigner_pair(u: FourierState, h: float, a: Symbol) -> PairingResult:
    """Distribution pairing at scale h.

    Each support pair (k, j) with j - k = q contributes
    ``(2 pi)^{-d/2} u_hat(k) conj(u_hat(j)) a_q(h (k + j) / 2)``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if a.d != u.d:
        raise ValueError("dimension mismatch")
    acc = _Kahan()
    terms = 0
    for q in a.sorted_modes():
        fn = a.modes[q]
        i, j = u.shift_pairs(q)
        if i.size == 0:
            continue
        mid = h * (u.modes[i] + 0.5 * np.asarray(q, dtype=float))
        vals = u.amps[i] * np.conj(u.amps[j]) * fn.value(mid)
        acc.add(complex(np.sum(vals)))
        terms += int(i.size)
    scale = (2.0 * math.pi) ** (-u.d / 2)
    return PairingResult(value=scale * acc.total, terms_summed=terms,
                         truncation_tail_bound=_dropped_tail(u, a, 1.0))


def time_averaged_pair(u: FourierState, h: float, a: Symbol,
                       phi: TimeWindow) -> PairingResult:
    """Pairing of the evolved state averaged against a time window.

    The time integral collapses onto the window transform evaluated at the
    beat frequency ``(|k|^2 - |j|^2) / 2`` of each support pair.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if a.d != u.d:
        raise ValueError("dimension mismatch")
    norms = u.mode_norms_sq
    acc = _Kahan()
    terms = 0
    for q in a.sorted_modes():
        fn = a.modes[q]
        i, j = u.shift_pairs(q)
        if i.size == 0:
            continue
        freqs = 0.5 * (norms[i] - norms[j])
        mid = h * (u.modes[i] + 0.5 * np.asarray(q, dtype=float))
        vals = u.amps[i] * np.conj(u.amps[j]) * phi.transform(freqs) * fn.value(mid)
        acc.add(complex(np.sum(vals)))
        terms += int(i.size)
    scale = (2.0 * math.pi) ** (-u.d / 2)
    return PairingResult(value=scale * acc.total, terms_summed=terms,
                         truncation_tail_bound=_dropped_tail(u, a, phi.transform_sup()))


def momentum_marginal_pair(u: FourierState, h: float, b: CoefficientFn) -> float:
    """Momentum marginal tested against b: sum of b(h k) |u_hat(k)|^2."""
    if h <= 0:
        raise ValueError("h must be positive")
    return _marginal_complex(u, h, b).real


def _marginal_complex(u: FourierState, h: float, b: CoefficientFn) -> complex:
    if u.support_size == 0:
        return 0.0j
    weights = u.amps.real**2 + u.amps.imag**2
    vals = b.value(h * u.modes.astype(float))
    return complex(np.sum(vals * weights))


def liouville_invariance_gap(u: FourierState, h: float, b: CoefficientFn,
                             t: float) -> float:
    """Drift of the momentum marginal under the flow (zero up to roundoff).

    The flow only rotates phases, so mode weights |u_hat(k)|^2 are conserved
    exactly; the marginal against any b is flow-invariant at every fixed h.
    """
    before = momentum_marginal_pair(u, h, b)
    after = momentum_marginal_pair(evolve(u, t), h, b)
    return abs(after - before)


def classical_limit_gap(u: FourierState, h: float, a: Symbol, t: float) -> float:
    """Distance between the evolved pairing and the flow-transported pairing.

    The transported side composes the observable with the straight-line flow
    by attaching the phase exp(i t q . (h k)) to each mode-q term, the flow
    phase being read off at the mode's own momentum h k.  The evolved side
    carries exp(i t q . h(k + q/2)) instead, so the two differ per term by the
    factor exp(i h t |q|^2 / 2) and the gap closes at rate O(h) for a fixed
    observable and family.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    evolved = wigner_pair(evolve(u, h * t), h, a).value
    acc = _Kahan()
    for q in a.sorted_modes():
        fn = a.modes[q]
        i, j = u.shift_pairs(q)
        if i.size == 0:
            continue
        qv = np.asarray(q, dtype=float)
        mid = h * (u.modes[i] + 0.5 * qv)
        flow_phase = np.exp(1j * t * h * (u.modes[i] @ np.asarray(q, dtype=np.int64)))
        vals = u.amps[i] * np.conj(u.amps[j]) * fn.value(mid) * flow_phase
        acc.add(complex(np.sum(vals)))
    scale = (2.0 * math.pi) ** (-u.d / 2)
    return abs(evolved - scale * acc.total)
