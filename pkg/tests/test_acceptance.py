"""Acceptance battery: one test per criterion, one printed line per result.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL lines
and timings.  Each criterion asserts its stated tolerance and its runtime
budget.
"""

import itertools
import math
import time

import numpy as np
import pytest

from torusres.lattice import (bezout_witness, decompose_block,
                              enumerate_directions, primitive_direction,
                              same_coset)
from torusres.oracles import averaged_density_oracle, wave_packet_limit_oracle
from torusres.resonant import (build_resonant, evolve_resonant, geodesic_grid,
                               hs_bound_rhs, hs_norm_sq_window, coupling_kernel_window,
                               kernel_trace_residual, propagation_pair,
                               operator_window, remainder_term, resonant_term,
                               suggest_window_size, trace_density_eval,
                               trace_norm_bound_gap, trace_pair,
                               vanishing_criterion)
from torusres.state import (PlaneWaveFamily, WavePacketFamily,
                            gaussian_profile_norm_sq, make_state, random_state,
                            resonant_plane_wave, wave_packet)
from torusres.symbols import (TimeWindow, constant_coeff, gaussian_coeff,
                              hermitian_symbol, poly_gaussian_coeff,
                              position_symbol)
from torusres.harness import fit_rate
from torusres.wigner import (classical_limit_gap, liouville_invariance_gap,
                             time_averaged_pair)

TWO_PI = 2.0 * math.pi

_PACKETS = {}


def packet(sigma, h, xi0=(1.0, 0.0), trunc=1e-12):
    key = (sigma, h, xi0, trunc)
    if key not in _PACKETS:
        _PACKETS[key] = wave_packet((0.0, 0.0), xi0, sigma, h, trunc)
    return _PACKETS[key]


def _pack_rows(rows):
    # injective int64 key per integer row (exact, bounds-checked)
    lows = rows.min(axis=0)
    sizes = rows.max(axis=0) - lows + 1
    strides = np.ones(rows.shape[1], dtype=np.int64)
    for i in range(rows.shape[1] - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    assert int(strides[0]) * int(sizes[0]) < 2**62
    return (rows - lows) @ strides


def _report(num, ok, elapsed, budget, detail):
    line = (f"CRITERION {num:02d} {'PASS' if ok else 'FAIL'} "
            f"({elapsed:.1f}s < {budget}s): {detail}")
    print(line)
    assert ok, line
    assert elapsed < budget, line


def test_criterion_01_lattice_bijection():
    start = time.time()
    ok = True
    detail = ""
    rng = np.random.default_rng(0)
    for d in (2, 3):
        axes = [np.arange(-15, 16, dtype=np.int64)] * d
        grids = np.meshgrid(*axes, indexing="ij")
        box = np.stack([g.reshape(-1) for g in grids], axis=1)
        dirs = enumerate_directions(d, 30)
        for p in dirs:
            pv = p.as_array()
            n, r_scaled = decompose_block(box, p)
            # reconstruction and orthogonality, exact integers
            if not np.array_equal(p.norm_sq * box, n[:, None] * pv + r_scaled):
                ok, detail = False, f"reconstruction failed for {p.p} (d={d})"
                break
            if np.any(r_scaled @ pv != 0):
                ok, detail = False, f"offset not orthogonal for {p.p}"
                break
            # injectivity of k -> (n, r_scaled)
            if np.unique(_pack_rows(np.column_stack([n, r_scaled]))).size \
                    != box.shape[0]:
                ok, detail = False, f"collision for {p.p}"
                break
            # shared offset forces congruent line indices (well-defined class):
            # the offset must determine the class, so appending the class to
            # the offset rows cannot create new distinct rows
            classes = n % p.norm_sq
            n_offsets = np.unique(_pack_rows(r_scaled)).size
            n_pairs = np.unique(
                _pack_rows(np.column_stack([r_scaled, classes]))).size
            if n_pairs != n_offsets:
                ok, detail = False, f"coset law broken for {p.p}"
                break
            # congruent indices share offsets; incongruent never do
            sample = rng.integers(0, box.shape[0], size=40)
            for i, j in zip(sample[::2], sample[1::2]):
                shares = bool(np.array_equal(r_scaled[i], r_scaled[j]))
                congruent = same_coset(int(n[i]) + 3 * p.norm_sq, int(n[j]), p)
                if shares and not congruent:
                    ok, detail = False, f"same_coset inconsistent for {p.p}"
                    break
                if congruent and classes[i] != classes[j]:
                    ok, detail = False, f"class map inconsistent for {p.p}"
                    break
            if not ok:
                break
            if sum(a * b for a, b in zip(bezout_witness(p), p.p)) != 1:
                ok, detail = False, f"bezout failed for {p.p}"
                break
        if not ok:
            break
    if ok:
        detail = "exact reconstruction/coset law, d=2,3, |p|^2<=30, box 31^d"
    _report(1, ok, time.time() - start, 30, detail)


def _zero_mean_symbols():
    return [
        hermitian_symbol(2, {
            (1, 0): gaussian_coeff(0.8, (0.3, 0.1), 1.1),
            (0, 1): gaussian_coeff(0.5 + 0.2j, (-0.2, 0.4), 0.9),
        }),
        hermitian_symbol(2, {
            (1, 1): gaussian_coeff(0.7, (0.0, 0.0), 1.3),
            (0, 2): gaussian_coeff(0.4, (0.5, -0.5), 0.8),
            (2, 1): gaussian_coeff(0.25 - 0.1j, (0.2, 0.2), 1.0),
        }),
        hermitian_symbol(2, {
            (1, -1): poly_gaussian_coeff(0.5, (0.1, 0.0), 1.2, (1, 0)),
            (3, 0): gaussian_coeff(0.3, (-0.4, 0.3), 0.7),
        }),
    ]


def test_criterion_02_exact_split():
    start = time.time()
    phi = TimeWindow()
    symbols = _zero_mean_symbols()
    worst = 0.0
    hs = itertools.cycle((0.5, 0.1, 0.02))
    for seed in range(20):
        u = random_state(2, 200, 16, seed=1000 + seed)
        h = next(hs)
        for a in symbols:
            tap = time_averaged_pair(u, h, a, phi).value
            rt = resonant_term(u, h, a, phi)
            rem = remainder_term(u, h, a, phi)
            rel = abs(tap - rt - rem) / (abs(tap) + u.norm_sq)
            worst = max(worst, rel)
    ok = worst <= 1e-9
    _report(2, ok, time.time() - start, 60,
            f"20 states x 3 symbols, worst split defect {worst:.2e} <= 1e-9")


def test_criterion_03_residual_rate():
    start = time.time()
    phi = TimeWindow()
    a = hermitian_symbol(2, {
        (0, 1): gaussian_coeff(0.7, (0.6, 0.35), 0.8),
        (1, 0): gaussian_coeff(0.4, (0.6, 0.35), 0.8),
    })
    series = []
    for h in [2.0**-k for k in range(3, 9)]:
        u = packet(0.2, h)
        series.append((h, kernel_trace_residual(u, h, a, phi)))
    slope, r2 = fit_rate(series)
    ok = slope >= 0.9 and r2 >= 0.98
    _report(3, ok, time.time() - start, 120,
            f"residual slope {slope:.2f} >= 0.9, R^2 {r2:.4f} >= 0.98")


def test_criterion_04_trace_bound():
    start = time.time()
    dirs = [primitive_direction(p) for p in [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1)]]
    coeffs = [
        constant_coeff(1.0),
        gaussian_coeff(0.9, (0.1, -0.2), 0.7),
        gaussian_coeff(2.0, (0.0, 0.0), 1.5),
        poly_gaussian_coeff(0.6, (0.2, 0.0), 1.0, (2, 0)),
        gaussian_coeff(0.5, (-0.5, 0.5), 0.4),
    ]
    worst_gap = 0.0
    worst_eig = 0.0
    for seed in range(50):
        u = random_state(2, 36, 6, seed=2000 + seed)
        om = dirs[seed % len(dirs)]
        R = build_resonant(u, 0.1, om)
        for b in coeffs:
            gap = trace_norm_bound_gap(R, b)
            worst_gap = min(worst_gap, gap)
        K = operator_window(R, coeffs[1], R.max_index)
        eig = float(np.linalg.eigvalsh(K.entries).min()) / max(R.total_trace, 1e-30)
        worst_eig = min(worst_eig, eig)
    ok = worst_gap >= -1e-10 and worst_eig >= -1e-10
    _report(4, ok, time.time() - start, 60,
            f"50 states x 5 coeffs, min gap {worst_gap:.1e}, "
            f"min scaled eigenvalue {worst_eig:.1e}")


def test_criterion_05_hs_bound():
    start = time.time()
    rng = np.random.default_rng(3)
    windows = [TimeWindow(tau=t) for t in (0.7, 1.0, 1.4)]
    worst_slack = math.inf
    worst_tail = 0.0
    for trial in range(10):
        n_modes = int(rng.integers(2, 5))
        half = {}
        while len(half) < n_modes:
            q = tuple(int(c) for c in rng.integers(-3, 4, size=2))
            if q == (0, 0) or q in half or tuple(-c for c in q) in half:
                continue
            half[q] = gaussian_coeff(
                complex(rng.normal(), rng.normal()) * 0.5,
                tuple(rng.normal(size=2) * 0.5), float(rng.uniform(0.6, 1.4)))
        a = hermitian_symbol(2, half)
        phi = windows[trial % len(windows)]
        xi = rng.normal(size=2) * 0.7
        from torusres.lattice import directions_of_modes
        lhs = 0.0
        for om in sorted(directions_of_modes(a.modes), key=lambda p: p.p):
            M = suggest_window_size(a, om, phi, tol=1e-13)
            K = coupling_kernel_window(om, xi, a, phi, M)
            lhs += hs_norm_sq_window(K)
            worst_tail = max(worst_tail, K.tail_bound)
        rhs = hs_bound_rhs(a, phi)
        worst_slack = min(worst_slack, (rhs - lhs) / rhs)
    ok = worst_slack >= -1e-9 and worst_tail < 1e-12
    _report(5, ok, time.time() - start, 30,
            f"10 symbols, min relative slack {worst_slack:.3e}, "
            f"max tail {worst_tail:.1e} < 1e-12")


def test_criterion_06_liouville_invariance():
    start = time.time()
    coeffs = [
        constant_coeff(1.0),
        gaussian_coeff(0.9, (0.2, 0.2), 0.8),
        poly_gaussian_coeff(0.4, (0.0, 0.1), 1.1, (0, 2)),
    ]
    times = [-10.0, -3.3, 0.7, 4.1, 10.0]
    worst = 0.0
    ok = True
    for seed in range(20):
        u = random_state(2, 80, 10, seed=3000 + seed)
        for t in times:
            for b in coeffs:
                gap = liouville_invariance_gap(u, 0.1, b, t)
                bound = 1e-12 * u.norm_sq * b.sup_norm()
                worst = max(worst, gap / max(bound, 1e-300))
                if gap > bound:
                    ok = False
    _report(6, ok, time.time() - start, 10,
            f"20 states x 5 times x 3 coeffs, worst gap/bound {worst:.2e}")


def test_criterion_07_density_matrix_evolution():
    start = time.time()
    dirs = [primitive_direction(p) for p in [(1, 0), (0, 1), (1, 1), (1, 2)]]
    b = constant_coeff(1.0)
    dt = 1e-4
    worst_defect = 0.0
    worst_trace = 0.0
    for seed in range(10):
        u = random_state(2, 18, 2, seed=4000 + seed)
        om = dirs[seed % len(dirs)]
        R = build_resonant(u, 0.2, om)
        M = R.max_index
        kp = operator_window(evolve_resonant(R, dt), b, M).entries
        km = operator_window(evolve_resonant(R, -dt), b, M).entries
        k0 = operator_window(R, b, M).entries
        mm, nn = np.meshgrid(np.arange(-M, M + 1), np.arange(-M, M + 1),
                             indexing="ij")
        expect = 1j * (nn**2 - mm**2) / (2 * om.norm_sq) * k0
        worst_defect = max(worst_defect,
                           float(np.abs((kp - km) / (2 * dt) - expect).max()))
        t_ref = trace_pair(R, b)
        drift = abs(trace_pair(evolve_resonant(R, 5.3), b) - t_ref)
        worst_trace = max(worst_trace, drift / max(abs(t_ref), 1e-300))
    ok = worst_defect <= 1e-6 and worst_trace <= 1e-12
    _report(7, ok, time.time() - start, 10,
            f"10 measures, max ODE defect {worst_defect:.2e} <= 1e-6, "
            f"trace drift {worst_trace:.2e} <= 1e-12")


M_MODES_8 = {(0, 0): 1.0, (1, 0): 0.25, (-1, 0): 0.25, (0, 1): 0.25,
             (0, -1): 0.25, (2, 1): 0.15, (-2, -1): 0.15, (0, 3): 0.1,
             (0, -3): 0.1}


def test_criterion_08_wave_packet_propagation():
    start = time.time()
    phi = TimeWindow()
    sym = position_symbol(2, M_MODES_8)
    oracle = wave_packet_limit_oracle(M_MODES_8, phi,
                                      gaussian_profile_norm_sq(0.2, 2), 2)
    dirs = [primitive_direction(p) for p in [(0, 1), (1, 1), (1, -1)]]
    hs = [2.0**-k for k in range(4, 11)]
    masses = {p.p: [] for p in dirs}
    gaps = []
    for h in hs:
        u = packet(0.2, h)
        for p in dirs:
            from torusres.state import near_hyperplane_mass
            masses[p.p].append(near_hyperplane_mass(u, p, 5.0))
        gaps.append(abs(time_averaged_pair(u, h, sym, phi).value - oracle))
    ok = True
    details = []
    for p, series in masses.items():
        mono = all(b < a for a, b in zip(series, series[1:]))
        ok = ok and mono and series[-1] < 0.01
        details.append(f"mass{p}={series[-1]:.1e}")
    gap_mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    gap_ok = gaps[-1] < 0.05 * abs(oracle)
    ok = ok and gap_mono and gap_ok
    _report(8, ok, time.time() - start, 180,
            "masses monotone, " + " ".join(details)
            + f", pairing gap {gaps[-1]:.2e} < 0.05|oracle|={0.05 * abs(oracle):.2e}")


def test_criterion_09_resonant_plane_wave():
    start = time.time()
    phi = TimeWindow(tau=0.5)
    profile = {(0, 0): 1.0, (0, 1): 0.6, (0, -1): 0.4, (1, 0): 0.3, (1, 1): 0.2}
    m = {(0, 0): 1.0, (0, 1): 0.3, (0, -1): 0.3, (1, 0): 0.2, (-1, 0): 0.2}
    sym = position_symbol(2, m)
    oracle = averaged_density_oracle(profile, (1, 0), m, phi)
    scale = abs(oracle) + sum(abs(v) ** 2 for v in profile.values())
    gaps, mf_gaps = [], []
    for n in (8, 16, 32, 64):
        u, h = resonant_plane_wave(profile, (1, 0), n)
        gaps.append(abs(time_averaged_pair(u, h, sym, phi).value - oracle))
        mf_gaps.append(abs(propagation_pair(u, h, sym, phi) - oracle))
    floor = 1e-13 * scale
    mono = all(b < a or (a <= floor and b <= floor)
               for a, b in zip(gaps, gaps[1:]))
    ok = (gaps[-1] <= 0.02 * scale and mono and mf_gaps[-1] <= 0.02 * scale)
    _report(9, ok, time.time() - start, 60,
            f"pairing gaps {['%.1e' % g for g in gaps]}, assembled gap "
            f"{mf_gaps[-1]:.1e}, tolerance {0.02 * scale:.2e}")


def test_criterion_10_classical_limit_rate():
    start = time.time()
    a = hermitian_symbol(2, {
        (0, 1): gaussian_coeff(0.7, (0.6, 0.35), 0.8),
        (1, 0): gaussian_coeff(0.4, (0.6, 0.35), 0.8),
    })
    series = []
    for h in [2.0**-k for k in range(3, 9)]:
        u = packet(1.0, h)
        series.append((h, classical_limit_gap(u, h, a, 1.0)))
    slope, r2 = fit_rate(series)
    ok = slope >= 0.9
    _report(10, ok, time.time() - start, 60,
            f"classical gap slope {slope:.3f} >= 0.9 (R^2 {r2:.4f})")


def test_criterion_11_vanishing_dichotomy():
    start = time.time()
    hs = [2.0**-k for k in range(3, 9)]
    fam_wp = WavePacketFamily(x0=(0.0, 0.0), xi0=(1.0, 0.0), sigma=0.5)
    p10 = primitive_direction((1, 0))
    wp_series = vanishing_criterion(fam_wp, p10, 5.0, hs)
    wp_ok = (all(b <= a for a, b in zip(wp_series, wp_series[1:]))
             and wp_series[-1] <= 1e-8)

    profile = {(0, 0): 1.0, (0, 1): 0.5, (0, -1): 0.5}
    mass = sum(abs(v) ** 2 for v in profile.values())
    fam_pw = PlaneWaveFamily(profile=tuple(profile.items()), direction=(1, 0))
    p01 = primitive_direction((0, 1))
    pw_series = vanishing_criterion(fam_pw, p01, 5.0,
                                    [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    pw_ok = all(v >= 0.9 * mass for v in pw_series)
    ok = wp_ok and pw_ok
    _report(11, ok, time.time() - start, 30,
            f"packet series -> {wp_series[-1]:.1e}, plane-wave floor "
            f"{min(pw_series):.3f} >= {0.9 * mass:.3f}")


def test_criterion_12_trace_density():
    start = time.time()
    # hand formula for the two-mode state
    R = build_resonant(make_state(2, {(1, 0): 1.0, (2, 0): 1.0}), 0.5,
                       primitive_direction((1, 0)))
    grid = geodesic_grid(R.omega, 1024)
    dens = trace_density_eval(R, 0.0, grid, constant_coeff(1.0))
    hand = (1.0 / math.pi) * (1.0 + np.cos(grid))
    hand_err = float(np.max(np.abs(dens - hand)))

    # nonnegativity and mass for a generic evolved measure
    u = random_state(2, 60, 7, seed=90)
    om = primitive_direction((1, 2))
    Rg = build_resonant(u, 0.15, om)
    b = gaussian_coeff(1.0, (0.05, -0.1), 0.9)
    grid_g = geodesic_grid(om, 1024)
    dens_g = trace_density_eval(Rg, 1.3, grid_g, b)
    mass = float(np.mean(dens_g)) * TWO_PI * math.sqrt(om.norm_sq)
    mass_err = abs(mass - trace_pair(evolve_resonant(Rg, 1.3), b).real)
    nonneg = float(dens_g.min()) >= -1e-15 and float(dens.min()) >= -1e-15

    # corollary shadow: the assembled limiting position density of the
    # oscillating-profile family is a trigonometric polynomial; spot-check
    # nonnegativity on a 128^2 spatial grid
    profile = {(0, 0): 1.0, (0, 1): 0.6, (0, -1): 0.4, (1, 0): 0.3, (1, 1): 0.2}
    phi = TimeWindow()
    kdir = (1, 0)
    xs = np.arange(128) * (TWO_PI / 128)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    density = np.zeros_like(X)
    for q1 in range(-2, 3):
        for q2 in range(-2, 3):
            q = (q1, q2)
            if q1 * kdir[0] + q2 * kdir[1] != 0:
                continue
            coeff = averaged_density_oracle(profile, kdir, {q: 1.0}, phi)
            density += (coeff * np.exp(1j * (q1 * X + q2 * Y))).real / phi.integral()
    density /= TWO_PI**2
    grid_ok = float(density.min()) >= -1e-12

    ok = (hand_err <= 1e-10 and mass_err <= 1e-8 and nonneg and grid_ok)
    _report(12, ok, time.time() - start, 10,
            f"hand-formula err {hand_err:.1e} <= 1e-10, mass err {mass_err:.1e}"
            f" <= 1e-8, densities nonnegative (assembled min {density.min():.2e})")
