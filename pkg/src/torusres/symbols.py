"""Phase-space observables with finitely many spatial modes.

An observable ``a(x, xi)`` is stored as coefficients against the orthonormal
exponential basis ``psi_k(x) = (2 pi)^{-d/2} exp(i k . x)``, each coefficient
being a closed-form function of the momentum variable.  All coefficient
families (constant, Gaussian bump, monomial times Gaussian) expose exact
values, gradients and sup-norm bounds, so downstream truncations always carry
computable tails.  Time windows are Gaussians with a closed-form transform
under the convention ``phi_hat(s) = integral phi(t) exp(-i s t) dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .lattice import LatticePoint

Complex = Union[complex, float]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CoefficientFn:
    """Momentum coefficient from a closed-form parametric family.

    kind "constant":       c
    kind "gaussian":       c * exp(-|xi - center|^2 / (2 width^2))
    kind "poly_gaussian":  c * prod (xi - center)_i^powers_i * gaussian
    """

    kind: str
    c: complex = 1.0
    center: Optional[Tuple[float, ...]] = None
    width: float = 1.0
    powers: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian", "poly_gaussian"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind != "constant" and self.width <= 0:
            raise ValueError("width must be positive")
        if self.kind == "poly_gaussian" and not self.powers:
            raise ValueError("poly_gaussian needs powers")

    def _offset(self, xi: np.ndarray) -> np.ndarray:
        if self.center is None:
            return xi
        return xi - np.asarray(self.center, dtype=float)

    def value(self, xi) -> np.ndarray | complex:
        """Evaluate at one point (shape (d,)) or a batch (shape (N, d))."""
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 1
        pts = xi[None, :] if single else xi
        if self.kind == "constant":
            out = np.full(pts.shape[0], self.c, dtype=np.complex128)
        else:
            z = self._offset(pts)
            out = self.c * np.exp(-0.5 * np.sum(z * z, axis=1) / self.width**2)
            if self.kind == "poly_gaussian":
                mono = np.ones(pts.shape[0])
                for axis, power in enumerate(self.powers):
                    if power:
                        mono = mono * z[:, axis] ** power
                out = out * mono
        return complex(out[0]) if single else out

    def gradient(self, xi: Sequence[float]) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.kind == "constant":
            return np.zeros(xi.shape[0], dtype=np.complex128)
        z = self._offset(xi)
        gauss = math.exp(-0.5 * float(z @ z) / self.width**2)
        if self.kind == "gaussian":
            return -self.c * gauss * z / self.width**2
        dim = xi.shape[0]
        pw = [self.powers[i] if i < len(self.powers) else 0 for i in range(dim)]
        grad = np.empty(dim, dtype=np.complex128)
        for i in range(dim):
            rest = np.prod([z[j] ** pw[j] for j in range(dim) if j != i])
            poly_part = pw[i] * z[i] ** (pw[i] - 1) if pw[i] else 0.0
            grad[i] = self.c * gauss * rest * (poly_part - z[i] ** (pw[i] + 1) / self.width**2)
        return grad

    def sup_norm(self) -> float:
        if self.kind == "constant":
            return abs(self.c)
        if self.kind == "gaussian":
            return abs(self.c)
        return abs(self.c) * np.prod([_axis_max(p, self.width) for p in self.powers])

    def grad_sup_norm(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "gaussian":
            return abs(self.c) * math.exp(-0.5) / self.width
        total = 0.0
        for i, p in enumerate(self.powers):
            rest = np.prod([_axis_max(pj, self.width)
                            for j, pj in enumerate(self.powers) if j != i])
            axis_bound = p * _axis_max(p - 1, self.width) + _axis_max(p + 1, self.width) / self.width**2
            total += abs(self.c) * rest * axis_bound
        return float(total)

    @property
    def nonnegative(self) -> bool:
        if self.c.imag != 0 or self.c.real < 0:
            return False
        if self.kind == "poly_gaussian":
            return all(p % 2 == 0 for p in self.powers)
        return True

    def scaled(self, factor: Complex) -> "CoefficientFn":
        return replace(self, c=self.c * complex(factor))


def _axis_max(power: int, width: float) -> float:
    # max over z of |z|^power * exp(-z^2 / (2 width^2))
    if power <= 0:
        return 1.0
    return (power * width * width) ** (power / 2) * math.exp(-power / 2)


def constant_coeff(c: Complex) -> CoefficientFn:
    return CoefficientFn(kind="constant", c=complex(c))


def gaussian_coeff(c: Complex, center: Sequence[float], width: float) -> CoefficientFn:
    return CoefficientFn(kind="gaussian", c=complex(c),
                         center=tuple(float(x) for x in center), width=float(width))


def poly_gaussian_coeff(c: Complex, center: Sequence[float], width: float,
                        powers: Sequence[int]) -> CoefficientFn:
    return CoefficientFn(kind="poly_gaussian", c=complex(c),
                         center=tuple(float(x) for x in center), width=float(width),
                         powers=tuple(int(p) for p in powers))


ZERO_COEFF = CoefficientFn(kind="constant", c=0.0)


@dataclass(frozen=True)
class Symbol:
    """Observable ``a(x, xi) = sum_k a_k(xi) psi_k(x)`` with finite mode set."""

    d: int
    modes: Mapping[LatticePoint, CoefficientFn]
    hermitian: bool = False

    def __post_init__(self):
        for k in self.modes:
            if len(k) != self.d:
                raise ValueError(f"mode {k} does not match dimension {self.d}")

    def sorted_modes(self) -> list[LatticePoint]:
        return sorted(self.modes)


def symbol_from_modes(d: int, modes: Mapping[Sequence[int], CoefficientFn],
                      hermitian: bool = False) -> Symbol:
    return Symbol(d=d, modes={tuple(int(c) for c in k): fn for k, fn in modes.items()},
                  hermitian=hermitian)


def hermitian_symbol(d: int, half_modes: Mapping[Sequence[int], CoefficientFn]) -> Symbol:
    """Real-valued observable built from one mode of each +/- pair.

    The conjugate partner at -k is added automatically; a mode at 0 must have
    a real coefficient.
    """
    out: Dict[LatticePoint, CoefficientFn] = {}
    for k, fn in half_modes.items():
        kk = tuple(int(c) for c in k)
        neg = tuple(-c for c in kk)
        if kk in out or (neg in out and neg != kk):
            raise ValueError(f"mode {kk} given twice")
        out[kk] = fn
        if neg == kk:
            if fn.c.imag != 0:
                raise ValueError("zero mode of a real symbol needs a real coefficient")
        else:
            out[neg] = replace(fn, c=fn.c.conjugate())
    return Symbol(d=d, modes=out, hermitian=True)


def position_symbol(d: int, m_modes: Mapping[Sequence[int], Complex]) -> Symbol:
    """Momentum-independent observable m(x) = sum m_hat(q) e^{i q.x}.

    Plane-wave coefficients pick up the factor (2 pi)^{d/2} when re-expressed
    against the orthonormal basis.
    """
    scale = _TWO_PI ** (d / 2)
    modes = {tuple(int(c) for c in q): constant_coeff(scale * complex(v))
             for q, v in m_modes.items()}
    herm = all(
        tuple(-c for c in q) in modes
        and abs(modes[tuple(-c for c in q)].c - modes[q].c.conjugate()) <= 1e-15 * (1 + abs(modes[q].c))
        for q in modes
    )
    return Symbol(d=d, modes=modes, hermitian=herm)


def eval_symbol_coeff(a: Symbol, k: Sequence[int], xi: Sequence[float]) -> complex:
    """Coefficient a_k evaluated at xi; zero for absent modes."""
    fn = a.modes.get(tuple(int(c) for c in k))
    if fn is None:
        return 0.0j
    return complex(fn.value(np.asarray(xi, dtype=float)))


def mean_mode(a: Symbol) -> CoefficientFn:
    """Spatial average of the observable as a momentum coefficient.

    Averaging over the torus keeps only the zero mode and contributes the
    basis normalization (2 pi)^{-d/2}.
    """
    fn = a.modes.get((0,) * a.d)
    if fn is None:
        return ZERO_COEFF
    return fn.scaled(_TWO_PI ** (-a.d / 2))


def zero_mean_part(a: Symbol) -> Symbol:
    """Copy of the observable with its spatial average removed."""
    zero = (0,) * a.d
    return Symbol(d=a.d, modes={k: fn for k, fn in a.modes.items() if k != zero},
                  hermitian=a.hermitian)


@dataclass(frozen=True)
class TimeWindow:
    """Gaussian time window A exp(-(t - t0)^2 / (2 tau^2))."""

    amplitude: float = 1.0
    tau: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def value(self, t) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.exp(-0.5 * ((t - self.t0) / self.tau) ** 2)

    def transform(self, s) -> np.ndarray | complex:
        """phi_hat(s) = A tau sqrt(2 pi) exp(-i s t0) exp(-tau^2 s^2 / 2)."""
        s_arr = np.asarray(s, dtype=float)
        scale = self.amplitude * self.tau * math.sqrt(_TWO_PI)
        out = scale * np.exp(-0.5 * (self.tau * s_arr) ** 2)
        if self.t0 != 0.0:
            out = out * np.exp(-1j * s_arr * self.t0)
        if s_arr.ndim == 0:
            return complex(out)
        return out

    def integral(self) -> float:
        return self.amplitude * self.tau * math.sqrt(_TWO_PI)

    def transform_sup(self) -> float:
        return self.amplitude * self.tau * math.sqrt(_TWO_PI)


def window_transform(phi: TimeWindow, s: float) -> complex:
    """Closed-form transform of the window at frequency s."""
    return complex(phi.transform(s))
