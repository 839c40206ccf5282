"""Resonance-aware Wigner analysis of free Schrodinger dynamics on the flat torus."""

__version__ = "0.1.0"

from .lattice import (LatticePoint, LineDecomposition, PrimitiveDirection,
                      bezout_witness, decompose, directions_of_modes,
                      enumerate_directions, group_by_lines, primitive_direction,
                      same_coset)
from .state import (FourierState, StateFamily, WavePacketFamily, PlaneWaveFamily,
                    RandomModesFamily, ShellFamily, SuperpositionFamily, evolve,
                    h_oscillation_tail, make_state, near_hyperplane_mass, norm_sq,
                    position_density_pair, random_state, resonant_plane_wave,
                    state_from_json, state_to_json, wave_packet)
from .symbols import (CoefficientFn, Symbol, TimeWindow, constant_coeff,
                      eval_symbol_coeff, gaussian_coeff, hermitian_symbol,
                      mean_mode, poly_gaussian_coeff, position_symbol,
                      symbol_from_modes, window_transform, zero_mean_part)
from .wigner import (PairingResult, classical_limit_gap, liouville_invariance_gap,
                     momentum_marginal_pair, time_averaged_pair, wigner_pair)
from .resonant import (OperatorWindowMatrix, ResonantAtom, ResonantMeasure,
                       build_resonant, domination_gap, evolve_resonant,
                       hs_bound_rhs, hs_norm_sq_window, coupling_kernel_window,
                       kernel_trace_residual, propagation_pair, measure_from_json,
                       measure_to_json, operator_window, remainder_term,
                       resonant_term, density_fourier_coefficient,
                       trace_density_eval, trace_norm_bound_gap, trace_pair,
                       vanishing_criterion)
from .oracles import averaged_density_oracle, wave_packet_limit_oracle
from .config import ExperimentConfig
from .harness import ConfigError, fit_rate, run_experiment
