"""Quantum states (pure vectors or density operators) in a labeled basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError
from .operators import HermitianOperator

PURE_NORM_ATOL = 1e-12
DENSITY_ATOL = 1e-12
DENSITY_EIG_FLOOR = -1e-10


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector or density operator, tagged with its basis."""

    basis_tag: str
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("provide exactly one of vector or density")
        if self.vector is not None:
            vec = np.asarray(self.vector, dtype=complex).ravel()
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > PURE_NORM_ATOL:
                raise ValueError(f"state vector norm {norm!r} is not 1")
            vec.setflags(write=False)
            object.__setattr__(self, "vector", vec)
        else:
            rho = np.asarray(self.density, dtype=complex)
            if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
                raise ValueError("density must be a square matrix")
            if np.abs(rho - rho.conj().T).max() > DENSITY_ATOL:
                raise ValueError("density operator is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > DENSITY_ATOL:
                raise ValueError("density operator trace is not 1")
            if np.linalg.eigvalsh(rho).min() < DENSITY_EIG_FLOOR:
                raise ValueError("density operator has a negative eigenvalue")
            rho = (rho + rho.conj().T) / 2
            rho.setflags(write=False)
            object.__setattr__(self, "density", rho)

    @classmethod
    def pure(cls, vector, basis_tag: str) -> "QuantumState":
        return cls(basis_tag=basis_tag, vector=vector)

    @classmethod
    def mixed(cls, density, basis_tag: str) -> "QuantumState":
        return cls(basis_tag=basis_tag, density=density)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dim(self) -> int:
        return len(self.vector) if self.is_pure else self.density.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.vector, self.vector.conj())
        return self.density

    def _matrix_of(self, op) -> np.ndarray:
        mat = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
        if mat.shape != (self.dim, self.dim):
            raise BasisMismatchError(
                f"operator dimension {mat.shape} does not match state dimension {self.dim}"
            )
        return mat

    def expectation(self, op) -> float:
        """Real expectation value of a Hermitian operator."""
        mat = self._matrix_of(op)
        if self.is_pure:
            val = np.vdot(self.vector, mat @ self.vector)
        else:
            val = np.trace(mat @ self.density)
        return val.real

    def variance(self, op) -> float:
        # centered evaluation: no catastrophic cancellation for small variances
        mat = self._matrix_of(op)
        if self.is_pure:
            phi = mat @ self.vector
            mean = np.vdot(self.vector, phi).real
            phi -= mean * self.vector
            return np.vdot(phi, phi).real
        mean = np.trace(mat @ self.density).real
        centered = mat - mean * np.eye(self.dim)
        return max(np.trace(centered @ centered @ self.density).real, 0.0)


def commutator_expectation(state: QuantumState, a, b) -> complex:
    """<[A, B]> on the given state (purely imaginary for Hermitian A, B)."""
    amat = state._matrix_of(a)
    bmat = state._matrix_of(b)
    if state.is_pure:
        z = np.vdot(amat @ state.vector, bmat @ state.vector)
    else:
        z = np.trace(amat @ bmat @ state.density)
    return 2j * z.imag


def check_same_basis(state: QuantumState, family) -> None:
    if state.basis_tag != family.basis_tag:
        raise BasisMismatchError(
            f"state basis {state.basis_tag!r} does not match family basis {family.basis_tag!r}"
        )
    if state.dim != family.dim:
        raise BasisMismatchError("state and family dimensions differ")
