"""Truncated two-mode Fock space: the independent numerical ground truth.

Everything here is dense and exact within the truncation. Mode A is the left
tensor factor, so the basis index of |n>|N> is n * dim_b + N.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from gravdip.errors import ContractError, TruncationError, ValidityError
from gravdip.pn_potential import CouplingTable, CouplingTerm

log = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-16
NEGATIVE_TOLERANCE = -1e-12
NORM_TOLERANCE = 1e-10
SMSV_TAIL_TOLERANCE = 1e-12


def ladder(dim: int) -> np.ndarray:
    """Annihilation operator L with L|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


@dataclass(frozen=True)
class FockSpace:
    dim_a: int
    dim_b: int
    delta_x: float
    delta_p: float

    def __post_init__(self):
        if self.dim_a < 2 or self.dim_b < 2:
            raise ValidityError(f"Fock dims must be >= 2, got {(self.dim_a, self.dim_b)}", guard="fock_dims")

    @classmethod
    def from_scales(cls, scales, dim_a: int = 12, dim_b: int | None = None) -> "FockSpace":
        return cls(dim_a, dim_a if dim_b is None else dim_b, scales.delta_x, scales.delta_p)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def hbar(self) -> float:
        return 2.0 * self.delta_x * self.delta_p

    def x_single(self, dim: int) -> np.ndarray:
        L = ladder(dim)
        return self.delta_x * (L + L.T).astype(complex)

    def p_single(self, dim: int) -> np.ndarray:
        L = ladder(dim)
        return 1j * self.delta_p * (L.T - L)

    def number_operator(self) -> np.ndarray:
        n_a = np.diag(np.arange(self.dim_a, dtype=float))
        n_b = np.diag(np.arange(self.dim_b, dtype=float))
        return np.kron(n_a, np.eye(self.dim_b)) + np.kron(np.eye(self.dim_a), n_b)

    def basis_index(self, n: int, N: int) -> int:
        return n * self.dim_b + N


@dataclass(frozen=True, eq=False)
class FockOperator:
    matrix: np.ndarray
    space: FockSpace

    def __add__(self, other: "FockOperator") -> "FockOperator":
        return FockOperator(self.matrix + other.matrix, self.space)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def element(self, bra: tuple[int, int], ket: tuple[int, int]) -> complex:
        i = self.space.basis_index(*bra)
        j = self.space.basis_index(*ket)
        return complex(self.matrix[i, j])


@dataclass(frozen=True, eq=False)
class FockState:
    amplitudes: np.ndarray
    space: FockSpace

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def as_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dim_a, self.space.dim_b)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))


def symmetrized_single_mode(x: np.ndarray, p: np.ndarray, pow_x: int, pow_p: int) -> np.ndarray:
    """Average of all distinct orderings of pow_x copies of x and pow_p copies of p."""
    dim = x.shape[0]
    words = set(permutations("x" * pow_x + "p" * pow_p))
    if not words or words == {()}:
        return np.eye(dim, dtype=complex)
    total = np.zeros((dim, dim), dtype=complex)
    for word in sorted(words):
        prod = np.eye(dim, dtype=complex)
        for letter in word:
            prod = prod @ (x if letter == "x" else p)
        total += prod
    return total / len(words)


def assemble_monomial(space: FockSpace, term: CouplingTerm) -> FockOperator:
    order_a = term.pow_xA + term.pow_pA
    order_b = term.pow_xB + term.pow_pB
    if order_a > space.dim_a - 1 or order_b > space.dim_b - 1:
        raise TruncationError(f"term {term.label} needs dims > {(order_a, order_b)}, have {(space.dim_a, space.dim_b)}")
    block_a = symmetrized_single_mode(
        space.x_single(space.dim_a), space.p_single(space.dim_a), term.pow_xA, term.pow_pA
    )
    block_b = symmetrized_single_mode(
        space.x_single(space.dim_b), space.p_single(space.dim_b), term.pow_xB, term.pow_pB
    )
    return FockOperator(term.coeff * np.kron(block_a, block_b), space)


def assemble_table(space: FockSpace, table: CouplingTable) -> FockOperator:
    total = np.zeros((space.dim, space.dim), dtype=complex)
    for term in table:
        total += assemble_monomial(space, term).matrix
    return FockOperator(total, space)


def vacuum_state(space: FockSpace) -> FockState:
    amps = np.zeros(space.dim, dtype=complex)
    amps[0] = 1.0
    return FockState(amps, space)


def basis_state(space: FockSpace, n: int, N: int) -> FockState:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.basis_index(n, N)] = 1.0
    return FockState(amps, space)


def smsv_amplitudes(dim: int, r: float) -> np.ndarray:
    """Single-mode squeezed vacuum with <x^2> = delta_x^2 e^(-2r), renormalized after truncation."""
    amps = np.zeros(dim)
    t = -math.tanh(r)
    a = 1.0 / math.sqrt(math.cosh(r))
    kept = 0.0
    for n in range(0, (dim - 1) // 2 + 1):
        if n > 0:
            a *= t * math.sqrt((2 * n) * (2 * n - 1)) / (2 * n)
        amps[2 * n] = a
        kept += a * a
    tail = 1.0 - kept
    if tail > SMSV_TAIL_TOLERANCE:
        raise TruncationError(
            f"squeezed vacuum r={r:g} loses {tail:.3g} of its norm at dim={dim}; increase the Fock dimension"
        )
    return amps / math.sqrt(kept)


def smsv_state(space: FockSpace, r: float) -> FockState:
    """Product |r>_A |r>_B of identical squeezed vacua."""
    amps = np.kron(smsv_amplitudes(space.dim_a, r), smsv_amplitudes(space.dim_b, r))
    return FockState(amps.astype(complex), space)


def tmsv_state(space: FockSpace, s: float) -> FockState:
    """exp(s (a^+ b^+ - a b)) |00>, integrated on the truncated space."""
    L_a = sp.csr_matrix(ladder(space.dim_a))
    L_b = sp.csr_matrix(ladder(space.dim_b))
    ab = sp.kron(L_a, L_b, format="csr")
    generator = (ab.T - ab) * s
    vac = np.zeros(space.dim)
    vac[0] = 1.0
    amps = expm_multiply(generator, vac)
    return FockState(np.asarray(amps, dtype=complex), space)


def _check_normalized(state: FockState) -> None:
    if abs(state.norm - 1.0) > NORM_TOLERANCE:
        raise ContractError(f"state norm {state.norm:.15g} differs from 1", guard="normalized_state")


def reduced_density_matrix(state: FockState, keep: Literal["A", "B"] = "A") -> np.ndarray:
    M = state.as_matrix()
    if keep == "A":
        return M @ M.conj().T
    if keep == "B":
        return M.T @ M.conj()
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def von_neumann(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < NEGATIVE_TOLERANCE:
        raise ContractError(
            f"reduced density matrix has eigenvalue {evals.min():.3g} < {NEGATIVE_TOLERANCE:g}",
            guard="negative_eigenvalue",
        )
    lam = evals[evals >= EIGEN_FLOOR]
    return float(-np.sum(lam * np.log(lam)))


def partial_trace_entropy(state: FockState, keep: Literal["A", "B"] = "A"):
    from gravdip.perturbation import EntropyValue

    _check_normalized(state)
    return EntropyValue.from_value(von_neumann(reduced_density_matrix(state, keep)))


class Propagator:
    """exp(-i H t / hbar) for H = hbar w (n_A + n_B) + H_AB via one Hermitian eigensolve."""

    def __init__(self, space: FockSpace, hamiltonian: FockOperator, omega_m: float):
        herm = hamiltonian.hermiticity_error()
        scale = max(float(np.max(np.abs(hamiltonian.matrix), initial=0.0)), 1e-300)
        if herm > 1e-12 * scale:
            raise ContractError(f"hamiltonian is not Hermitian (max |H - H^+| = {herm:.3g})", guard="hermitian")
        self.space = space
        # work in units of hbar w so the eigenphases are O(1)
        h = space.number_operator() + hamiltonian.matrix / (space.hbar * omega_m)
        h = 0.5 * (h + h.conj().T)
        if not np.any(h.imag):
            # x x and p p couplings are real in the number basis; real eigh is ~8x faster
            h = h.real
        self.omega_m = omega_m
        self.evals, self.evecs = np.linalg.eigh(h)

    def evolve(self, initial: FockState, t: float) -> FockState:
        if t < 0:
            raise ValidityError(f"t must be >= 0, got {t!r}", guard="nonnegative_time")
        coeffs = self.evecs.conj().T @ initial.amplitudes
        amps = self.evecs @ (np.exp(-1j * self.evals * self.omega_m * t) * coeffs)
        state = FockState(amps, self.space)
        if abs(state.norm - initial.norm) > NORM_TOLERANCE:
            raise ContractError(f"evolution broke the norm: {state.norm:.15g}", guard="norm_preservation")
        return state


def evolve_exact(
    space: FockSpace,
    initial: FockState,
    hamiltonian: FockOperator,
    omega_m: float,
    t: float | Sequence[float],
):
    """Evolve under hbar w (n_A + n_B) + H_AB; ``t`` may be a scalar or a sequence."""
    prop = Propagator(space, hamiltonian, omega_m)
    if np.ndim(t) == 0:
        return prop.evolve(initial, float(t))
    return [prop.evolve(initial, float(tt)) for tt in t]
