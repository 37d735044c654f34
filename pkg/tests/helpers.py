"""Dense-vector oracle used to cross-check the sparse exact engine.

Everything here is deliberately independent of the implementation under
test: states become flat numpy arrays indexed by mixed-radix basis
tuples, and gates are applied by explicit loops over those arrays.
"""

from __future__ import annotations

import cmath
from fractions import Fraction

import numpy as np

from qkdlab.register import PureState
from qkdlab.ring import CycloElem


def state_vector(state: PureState) -> np.ndarray:
    """Flatten a PureState into a dense complex vector (state's wire order)."""
    n = len(state.wires)
    vec = np.zeros(state.dim**n, dtype=complex)
    scale = float(state.scale_sq) ** 0.5 * state.dim ** (-state.scale_exp / 2)
    for basis, amp in state.terms.items():
        idx = 0
        for v in basis:
            idx = idx * state.dim + v
        vec[idx] = amp.to_complex() * scale
    return vec


def _indices(dim: int, n: int):
    for idx in range(dim**n):
        digits = []
        rest = idx
        for _ in range(n):
            digits.append(rest % dim)
            rest //= dim
        yield idx, tuple(reversed(digits))


def dense_hadamard(vec: np.ndarray, dim: int, n: int, wire: int, conjugate: bool) -> np.ndarray:
    out = np.zeros_like(vec)
    sign = -1 if conjugate else 1
    root = cmath.exp(sign * 2j * cmath.pi / dim)
    for idx, basis in _indices(dim, n):
        if not vec[idx]:
            continue
        j = basis[wire]
        stride = dim ** (n - 1 - wire)
        base = idx - j * stride
        for t in range(dim):
            out[base + t * stride] += vec[idx] * root ** (j * t) / dim**0.5
    return out


def dense_controlled_shift(
    vec: np.ndarray, dim: int, n: int, control: int, target: int, direction: str
) -> np.ndarray:
    out = np.zeros_like(vec)
    sign = 1 if direction == "right" else -1
    for idx, basis in _indices(dim, n):
        if not vec[idx]:
            continue
        new_t = (basis[target] + sign * basis[control]) % dim
        stride = dim ** (n - 1 - target)
        out[idx + (new_t - basis[target]) * stride] = vec[idx]
    return out


def random_pure_state(rng, dim: int, wires: tuple[str, ...], max_terms: int = 6) -> PureState:
    """A random unnormalized state with monomial rational-times-root amplitudes.

    Basis tuples are distinct, so every stored amplitude is a single
    r * zeta**e monomial and the state's squared norm is exactly rational.
    """
    n_terms = min(int(rng.integers(1, max_terms + 1)), dim ** len(wires))
    terms = {}
    while len(terms) < n_terms:
        basis = tuple(int(x) for x in rng.integers(0, dim, len(wires)))
        if basis in terms:
            continue
        num = int(rng.integers(-4, 5)) or 1
        den = int(rng.integers(1, 4))
        phase = int(rng.integers(0, dim))
        coeffs = [Fraction(0)] * dim
        coeffs[phase] = Fraction(num, den)
        terms[basis] = CycloElem(dim, coeffs)
    return PureState(dim, wires, int(rng.integers(0, 3)), terms)


def assert_vectors_close(actual: np.ndarray, expected: np.ndarray, tol: float = 1e-9):
    assert np.max(np.abs(actual - expected)) < tol
