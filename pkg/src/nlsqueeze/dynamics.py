"""Coherent spin states and twisting evolutions (one-axis, twist-and-turn)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatchError
from .operators import HermitianOperator
from .spin import DickeBasis, build_spin_operators, parse_dicke_tag
from .states import QuantumState

MODELS = ("OAT", "TAT")


@dataclass(frozen=True)
class EvolutionSpec:
    """Twisting model and dimensionless evolution time."""

    model: str
    tau: float

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")


class HermitianPropagator:
    """Applies exp(-i theta H) for a fixed Hermitian generator H.

    The generator is diagonalized once; each application costs two dense
    matrix-vector products.  Instances are immutable and safe to share.
    """

    def __init__(self, generator: HermitianOperator):
        self.generator = generator
        evals, evecs = np.linalg.eigh(generator.matrix)
        self._evals = evals
        self._evecs = evecs

    def unitary(self, theta: float) -> np.ndarray:
        return (self._evecs * np.exp(-1j * theta * self._evals)) @ self._evecs.conj().T

    def apply(self, state: QuantumState, theta: float) -> QuantumState:
        if state.dim != self.generator.dim:
            raise BasisMismatchError("state dimension does not match the generator")
        if state.is_pure:
            coeffs = self._evecs.conj().T @ state.vector
            vec = self._evecs @ (np.exp(-1j * theta * self._evals) * coeffs)
            vec = vec / np.linalg.norm(vec)
            return QuantumState.pure(vec, state.basis_tag)
        u = self.unitary(theta)
        rho = u @ state.density @ u.conj().T
        rho = (rho + rho.conj().T) / 2
        rho = rho / np.trace(rho).real
        return QuantumState.mixed(rho, state.basis_tag)


def twisting_generator(basis: DickeBasis, model: str) -> HermitianOperator:
    """Jy^2 for OAT, Jy^2 - (N/2) Jz for twist-and-turn."""
    _, jy, jz = build_spin_operators(basis)
    jy2 = jy.matrix @ jy.matrix
    if model == "OAT":
        return HermitianOperator(jy2, "Jy^2", degree=2)
    if model == "TAT":
        return HermitianOperator(
            jy2 - (basis.n_particles / 2) * jz.matrix, "Jy^2 - (N/2) Jz", degree=2
        )
    raise ValueError(f"model must be one of {MODELS}")


@functools.lru_cache(maxsize=32)
def _cached_propagator(model: str, n_particles: int) -> HermitianPropagator:
    return HermitianPropagator(twisting_generator(DickeBasis(n_particles), model))


def coherent_spin_state_z(basis: DickeBasis) -> QuantumState:
    """Maximal-Jz Dicke state: every spin polarized along +z."""
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[0] = 1.0
    return QuantumState.pure(vec, basis.tag)


def evolve(state: QuantumState, spec: EvolutionSpec) -> QuantumState:
    """Evolve a Dicke-basis state under the chosen twisting Hamiltonian.

    The generator eigendecomposition is cached per (model, N) so that a tau
    sweep costs two matrix-vector products per point.
    """
    n = parse_dicke_tag(state.basis_tag)
    if n is None:
        raise BasisMismatchError(
            f"twisting evolution needs a Dicke-basis state, got {state.basis_tag!r}"
        )
    if state.dim != n + 1:
        raise BasisMismatchError("state dimension does not match its Dicke tag")
    return _cached_propagator(spec.model, n).apply(state, spec.tau)
