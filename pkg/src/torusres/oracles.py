"""Closed-form limit predictions for the built-in initial-data families.

These are deliberately written with plain dictionary arithmetic, independent
of the sparse-join and resonant machinery, so they can serve as references
for the full pipeline.  They share only the window transform with the rest
of the package.
"""

from __future__ import annotations

from typing import Mapping, Sequence, Union

from .symbols import TimeWindow

Complex = Union[complex, float]


def averaged_density_oracle(profile_modes: Mapping[Sequence[int], Complex],
                            xi0_dir: Sequence[int],
                            m_modes: Mapping[Sequence[int], Complex],
                            phi: TimeWindow) -> complex:
    """Windowed position average for a carrier-modulated profile.

    In the oscillating-profile limit only spatial beats orthogonal to the
    carrier survive; each surviving pair of profile modes contributes its
    window transform at half the difference of squared frequencies:

        sum_{q . K = 0} m_hat(q) sum_k rho_hat(k) conj(rho_hat(k + q))
                        phi_hat((|k|^2 - |k + q|^2) / 2)

    ``m_modes`` uses the plane-wave convention (m == 1 is {0: 1}).
    """
    kdir = tuple(int(c) for c in xi0_dir)
    if all(c == 0 for c in kdir):
        raise ValueError("the carrier direction must be nonzero")
    profile = {tuple(int(c) for c in k): complex(v) for k, v in profile_modes.items()}
    test_fn = {tuple(int(c) for c in q): complex(v) for q, v in m_modes.items()}
    total = 0.0j
    for q in sorted(test_fn):
        if sum(qc * kc for qc, kc in zip(q, kdir)) != 0:
            continue
        beat = 0.0j
        for k in sorted(profile):
            partner = tuple(kc + qc for kc, qc in zip(k, q))
            other = profile.get(partner)
            if other is None:
                continue
            freq = (sum(c * c for c in k) - sum(c * c for c in partner)) / 2.0
            beat += profile[k] * other.conjugate() * phi.transform(freq)
        total += test_fn[q] * beat
    return total


def wave_packet_limit_oracle(m_modes: Mapping[Sequence[int], Complex],
                             phi: TimeWindow, rho_norm_sq: float,
                             d: int) -> complex:
    """Windowed position average in the packet limit.

    Packets spread their mass uniformly over the torus, so only the spatial
    mean of the test function survives: the value is the window integral
    times the profile mass times m_hat(0).
    """
    zero = (0,) * d
    m0 = 0.0j
    for q, v in m_modes.items():
        if tuple(int(c) for c in q) == zero:
            m0 = complex(v)
            break
    return phi.integral() * rho_norm_sq * m0
