"""Built-in property battery behind the CLI `check` command.

A curated set of fast, deterministic identities covering each subsystem.
This is not the development test suite (run pytest for that); it is meant
for installed deployments and the service health surface.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from .lattice import (bezout_witness, decompose, enumerate_directions,
                      primitive_direction)
from .oracles import averaged_density_oracle
from .resonant import (build_resonant, evolve_resonant, kernel_trace_residual,
                       propagation_pair, operator_window, remainder_term,
                       resonant_term, trace_density_eval, trace_pair)
from .state import evolve, make_state, random_state, resonant_plane_wave
from .symbols import (TimeWindow, constant_coeff, gaussian_coeff,
                      hermitian_symbol, position_symbol)
from .wigner import momentum_marginal_pair, time_averaged_pair, wigner_pair

Check = Tuple[str, Callable[[], Tuple[bool, str]]]


def _check_lattice_reconstruction() -> Tuple[bool, str]:
    box = range(-6, 7)
    dirs = enumerate_directions(2, 9)
    worst = 0
    for p in dirs:
        for k in itertools.product(box, repeat=2):
            dec = decompose(k, p)
            lhs = tuple(p.norm_sq * c for c in k)
            rhs = tuple(dec.n * pc + rc for pc, rc in zip(p.p, dec.r_scaled))
            worst = max(worst, max(abs(a - b) for a, b in zip(lhs, rhs)))
            if dec.class_c != dec.n % p.norm_sq:
                return False, f"coset mismatch at {k}, {p.p}"
    return worst == 0, f"max reconstruction defect {worst} over {len(dirs)} directions"


def _check_bezout() -> Tuple[bool, str]:
    for p in enumerate_directions(3, 14):
        c = bezout_witness(p)
        if sum(a * b for a, b in zip(c, p.p)) != 1:
            return False, f"bezout failed for {p.p}"
    return True, "p . c == 1 for all enumerated directions"


def _check_evolution_unitarity() -> Tuple[bool, str]:
    u = random_state(2, 60, 9, seed=7)
    v = evolve(u, 3.7)
    gap = abs(v.norm_sq - u.norm_sq)
    return gap <= 1e-12 * u.norm_sq, f"norm drift {gap:.3e}"


def _check_marginal_consistency() -> Tuple[bool, str]:
    u = random_state(2, 40, 6, seed=11)
    b = gaussian_coeff(1.0, (0.2, -0.1), 0.7)
    a = hermitian_symbol(2, {(0, 0): b.scaled((2 * math.pi))})
    lhs = wigner_pair(u, 0.25, a).value
    rhs = momentum_marginal_pair(u, 0.25, b)
    gap = abs(lhs - rhs)
    return gap <= 1e-12 * (1 + abs(rhs)), f"gap {gap:.3e}"


def _check_exact_split() -> Tuple[bool, str]:
    u = random_state(2, 80, 10, seed=3)
    a = hermitian_symbol(2, {
        (1, 0): gaussian_coeff(0.8, (0.3, 0.1), 1.1),
        (0, 1): gaussian_coeff(0.5 + 0.2j, (-0.2, 0.4), 0.9),
    })
    phi = TimeWindow(amplitude=1.0, tau=1.0, t0=0.0)
    h = 0.125
    tap = time_averaged_pair(u, h, a, phi).value
    total = resonant_term(u, h, a, phi) + remainder_term(u, h, a, phi)
    gap = abs(tap - total)
    return gap <= 1e-9 * (abs(tap) + u.norm_sq), f"split defect {gap:.3e}"


def _check_mass_partition() -> Tuple[bool, str]:
    u = random_state(2, 70, 8, seed=5)
    R = build_resonant(u, 0.1, primitive_direction((1, 2)))
    gap = abs(R.total_trace - u.norm_sq)
    return gap <= 1e-12 * u.norm_sq, f"trace defect {gap:.3e}"


def _check_positivity() -> Tuple[bool, str]:
    u = random_state(2, 50, 5, seed=13)
    R = build_resonant(u, 0.1, primitive_direction((0, 1)))
    K = operator_window(R, gaussian_coeff(1.0, (0.0, 0.0), 1.0), R.max_index)
    eigs = np.linalg.eigvalsh(K.entries)
    floor = -1e-10 * max(R.total_trace, 1.0)
    return float(eigs.min()) >= floor, f"min eigenvalue {eigs.min():.3e}"


def _check_evolution_trace_invariance() -> Tuple[bool, str]:
    u = random_state(2, 40, 4, seed=17)
    R = build_resonant(u, 0.05, primitive_direction((1, 1)))
    b = gaussian_coeff(1.0, (0.0, 0.0), 0.8)
    before = trace_pair(R, b)
    after = trace_pair(evolve_resonant(R, 2.3), b)
    gap = abs(after - before)
    return gap <= 1e-12 * (1 + abs(before)), f"trace drift {gap:.3e}"


def _check_trace_density_mass() -> Tuple[bool, str]:
    u = make_state(2, {(1, 0): 1.0, (2, 0): 1.0})
    R = build_resonant(u, 0.2, primitive_direction((1, 0)))
    b = constant_coeff(1.0)
    grid = np.arange(512) * (2 * math.pi / 512)
    dens = trace_density_eval(R, 0.7, grid, b)
    mass = float(np.mean(dens)) * 2 * math.pi
    gap = abs(mass - trace_pair(R, b).real)
    return gap <= 1e-8, f"mass defect {gap:.3e}, min density {dens.min():.3e}"


def _check_plane_wave_oracle() -> Tuple[bool, str]:
    profile = {(0, 0): 1.0, (0, 1): 0.5}
    m_modes = {(0, 0): 1.0, (0, 1): 0.25, (0, -1): 0.25}
    phi = TimeWindow()
    u, h = resonant_plane_wave(profile, (1, 0), 32)
    tap = time_averaged_pair(u, h, position_symbol(2, m_modes), phi).value
    oracle = averaged_density_oracle(profile, (1, 0), m_modes, phi)
    gap = abs(tap - oracle)
    mf = propagation_pair(u, h, position_symbol(2, m_modes), phi)
    gap2 = abs(mf - oracle)
    scale = abs(oracle) + sum(abs(v) ** 2 for v in profile.values())
    ok = gap <= 1e-10 * scale and gap2 <= 1e-10 * scale
    return ok, f"pairing gap {gap:.3e}, assembled gap {gap2:.3e}"


def _check_residual_identity() -> Tuple[bool, str]:
    u = random_state(2, 30, 7, seed=23)
    a = hermitian_symbol(2, {(1, 1): gaussian_coeff(0.6, (0.1, 0.2), 1.0)})
    phi = TimeWindow(tau=1.2)
    res = kernel_trace_residual(u, 0.1, a, phi)
    rem = abs(remainder_term(u, 0.1, a, phi))
    gap = abs(res - rem)
    return gap <= 1e-9 * (1 + rem), f"residual vs remainder gap {gap:.3e}"


CHECKS: List[Check] = [
    ("lattice_reconstruction", _check_lattice_reconstruction),
    ("bezout_witness", _check_bezout),
    ("evolution_unitarity", _check_evolution_unitarity),
    ("marginal_consistency", _check_marginal_consistency),
    ("exact_split", _check_exact_split),
    ("mass_partition", _check_mass_partition),
    ("window_positivity", _check_positivity),
    ("evolution_trace_invariance", _check_evolution_trace_invariance),
    ("trace_density_mass", _check_trace_density_mass),
    ("plane_wave_oracle", _check_plane_wave_oracle),
    ("residual_identity", _check_residual_identity),
]


def run_all() -> List[Dict[str, object]]:
    out: List[Dict[str, object]] = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append({"name": name, "passed": bool(ok), "detail": detail})
    return out
