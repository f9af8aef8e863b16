"""Moment-matrix machinery: covariance and commutator matrices, analytic
optimization of measurement observables and encoding generators, squeezing
coefficients, and the moment-based phase estimator."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cv import parse_fock_tag
from .dynamics import HermitianPropagator
from .errors import CalibrationError, ZeroSignalError
from .operators import HermitianOperator, OperatorFamily
from .spin import DickeBasis, build_spin_family, parse_dicke_tag, spin_family_size
from .states import QuantumState, check_same_basis, commutator_expectation

# retention threshold for the equilibrated covariance spectrum: sits well
# above its ~K*eps eigenvalue noise floor while keeping the genuinely dark
# measurement directions that a coarser cut would throw away together with
# their sensitivity
GAMMA_EPS_REL = 1e-12
KERNEL_LEAK_TOL = 1e-8
IMAG_RESIDUE_TOL = 1e-10


def _centered_moment_table(state: QuantumState, family: OperatorFamily):
    """Complex table Z_kl = <(H_k - <H_k>)(H_l - <H_l>)>.

    Re(Z) is the symmetrized covariance and 2 Im(Z) equals -i<[H_k, H_l]>,
    so one table feeds both matrices.  Centering the operators before the
    products avoids the cancellation that plagues high-degree monomials,
    whose raw second moments dwarf their covariances.
    """
    mats = np.stack([op.matrix for op in family])
    if state.is_pure:
        rows = mats @ state.vector  # rows[k] = H_k |psi>
        mu_c = rows @ state.vector.conj()
        _check_mean_residue(mu_c)
        rows -= mu_c.real[:, None] * state.vector[None, :]
        z = rows.conj() @ rows.T
    else:
        mu_c = np.einsum("kij,ji->k", mats, state.density)
        _check_mean_residue(mu_c)
        centered = mats - mu_c.real[:, None, None] * np.eye(mats.shape[1])[None, :, :]
        b = centered @ state.density
        z = np.einsum("kij,lji->kl", centered, b)
    return z, mu_c.real


def _check_mean_residue(mu_c: np.ndarray) -> None:
    resid = np.abs(mu_c.imag).max()
    if resid > IMAG_RESIDUE_TOL:
        raise ValueError(f"imaginary residue {resid:.2e} in operator means exceeds tolerance")


def covariance_matrix(state: QuantumState, family: OperatorFamily) -> np.ndarray:
    """Symmetrized covariance matrix of the family in the given state."""
    check_same_basis(state, family)
    z, _ = _centered_moment_table(state, family)
    return (z.real + z.real.T) / 2


def commutator_matrix(state: QuantumState, family: OperatorFamily) -> np.ndarray:
    """Real skew-symmetric matrix of -i times commutator expectations."""
    check_same_basis(state, family)
    z, _ = _centered_moment_table(state, family)
    return z.imag - z.imag.T


@dataclass(frozen=True, eq=False)
class MomentData:
    """Covariance/commutator matrices and the regularized moment matrix.

    The pseudo-inversion runs on the variance-equilibrated covariance
    (each member rescaled to unit variance via `scales`), which keeps the
    spectrum well conditioned when the family mixes operator degrees; the
    stored gamma, c and m_matrix refer to the original operators.
    retained_dims holds the kept (trailing, ascending-eigenvalue)
    eigenvector columns of the equilibrated covariance and gamma_eigs its
    full spectrum.  kernel_leakage is the largest norm of an equilibrated
    commutator column along a dropped direction, relative to the Frobenius
    norm of the equilibrated commutator matrix; values above
    KERNEL_LEAK_TOL signal numerical corruption because exact states
    cannot carry signal in a zero-variance direction.
    """

    gamma: np.ndarray
    c: np.ndarray
    m_matrix: np.ndarray
    retained_dims: np.ndarray
    gamma_eigs: np.ndarray
    kernel_leakage: float
    scales: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.gamma.shape[0]

    @property
    def retained_count(self) -> int:
        return self.retained_dims.shape[1]

    @property
    def retained_eigs(self) -> np.ndarray:
        return self.gamma_eigs[self.size - self.retained_count:]

    @property
    def member_scales(self) -> np.ndarray:
        return self.scales if self.scales is not None else np.ones(self.size)

    @property
    def robertson_violated(self) -> bool:
        return self.kernel_leakage > KERNEL_LEAK_TOL


def moment_matrix(gamma: np.ndarray, c: np.ndarray, eps_rel: float = GAMMA_EPS_REL) -> MomentData:
    """Moment matrix C^T Gamma^+ C with a spectral pseudo-inverse of Gamma.

    Both matrices are first equilibrated by the member standard deviations,
    which changes nothing in exact arithmetic but keeps mixed-degree
    families well conditioned.  Eigen-directions of the equilibrated
    covariance with eigenvalue <= eps_rel * lambda_max are dropped; their
    commutator leakage is recorded (not raised) on the returned MomentData.
    """
    gamma = np.asarray(gamma, dtype=float)
    c = np.asarray(c, dtype=float)
    k = gamma.shape[0]
    if gamma.shape != (k, k) or c.shape != (k, k):
        raise ValueError("gamma and c must be square matrices of equal size")
    if np.abs(gamma - gamma.T).max() > 1e-10 * max(1.0, np.abs(gamma).max()):
        raise ValueError("gamma is not symmetric")
    if np.abs(c + c.T).max() > 1e-10 * max(1.0, np.abs(c).max()):
        raise ValueError("c is not skew-symmetric")
    gamma = (gamma + gamma.T) / 2
    c = (c - c.T) / 2

    dev = np.sqrt(np.clip(np.diag(gamma), 0.0, None))
    scales = np.where(dev > 0.0, 1.0 / np.where(dev > 0.0, dev, 1.0), 1.0)
    gamma_eq = gamma * scales[:, None] * scales[None, :]
    c_eq = c * scales[:, None] * scales[None, :]

    evals, evecs = np.linalg.eigh((gamma_eq + gamma_eq.T) / 2)
    lam_top = evals[-1]
    if evals[0] < -1e-10 * max(1.0, lam_top):
        raise ValueError("gamma has a negative eigenvalue beyond tolerance")
    if lam_top > 0:
        keep = evals > eps_rel * lam_top
    else:
        keep = np.zeros(k, dtype=bool)

    retained = evecs[:, keep]
    proj = retained.T @ c_eq  # (r, k)
    if retained.shape[1]:
        m_eq = proj.T @ (proj / evals[keep][:, None])
    else:
        m_eq = np.zeros((k, k))
    m = m_eq * dev[:, None] * dev[None, :]  # undo the equilibration
    m = (m + m.T) / 2

    c_norm = np.linalg.norm(c_eq)
    dropped = evecs[:, ~keep]
    if dropped.shape[1] and c_norm > 0:
        leakage = float(np.linalg.norm(c_eq @ dropped, axis=0).max() / c_norm)
    else:
        leakage = 0.0
    return MomentData(gamma, c, m, retained, evals, leakage, scales)


def moment_data(state: QuantumState, family: OperatorFamily,
                eps_rel: float = GAMMA_EPS_REL) -> MomentData:
    """Covariance, commutator and moment matrices for one state and family."""
    check_same_basis(state, family)
    z, _ = _centered_moment_table(state, family)
    return moment_matrix((z.real + z.real.T) / 2, z.imag - z.imag.T, eps_rel=eps_rel)


def principal_submatrix(matrix: np.ndarray, indices) -> np.ndarray:
    """Rows and columns of `matrix` restricted to `indices`."""
    idx = np.asarray(indices, dtype=int)
    return np.asarray(matrix)[np.ix_(idx, idx)]


def principal_eigenpair(matrix: np.ndarray):
    """Top eigenpair of a symmetric matrix with deterministic conventions.

    Degenerate top eigenvalues are broken by preferring the eigenvector
    whose largest-magnitude coefficient sits at the smallest index; the
    sign is fixed so the first nonzero coefficient is positive.
    """
    matrix = np.asarray(matrix, dtype=float)
    evals, evecs = np.linalg.eigh((matrix + matrix.T) / 2)
    lam = evals[-1]
    tol = 1e-12 * max(1.0, abs(lam))
    candidates = [evecs[:, i] for i in range(len(evals)) if evals[i] >= lam - tol]
    best = min(candidates, key=lambda v: int(np.argmax(np.abs(v))))
    nz = np.flatnonzero(np.abs(best) > 1e-12)
    if nz.size and best[nz[0]] < 0:
        best = -best
    return best.copy(), float(lam)


def optimal_measurement(md: MomentData, n_coeffs, slots=None) -> np.ndarray:
    """Unit-norm measurement coefficients saturating the moment bound.

    Implements the pseudo-inverse version of m ~ Gamma^{-1} C n.  When
    n_coeffs is shorter than the family, it is placed on `slots` (default:
    the leading positions) and zero-padded elsewhere.  Raises
    ZeroSignalError when C n vanishes: no accessible observable responds
    to this generator.
    """
    n_coeffs = np.asarray(n_coeffs, dtype=float)
    k = md.size
    if len(n_coeffs) == k and slots is None:
        n_full = n_coeffs
    else:
        if slots is None:
            slots = list(range(len(n_coeffs)))
        if len(slots) != len(n_coeffs):
            raise ValueError("n_coeffs length must match the generator slots")
        n_full = np.zeros(k)
        n_full[np.asarray(slots, dtype=int)] = n_coeffs
    scales = md.member_scales
    cn_eq = scales * (md.c @ n_full)  # equilibrated signal vector C' n'
    if np.linalg.norm(cn_eq) <= 1e-14 * max(1.0, np.linalg.norm(md.c * scales[:, None] * scales[None, :])):
        raise ZeroSignalError("C n vanishes: zero sensitivity for this generator")
    weights = md.retained_dims.T @ cn_eq
    m = scales * (md.retained_dims @ (weights / md.retained_eigs))
    norm = np.linalg.norm(m)
    if norm == 0.0:
        raise ZeroSignalError("C n lies outside the retained covariance subspace")
    return m / norm


def optimize_generator(md: MomentData, generator_slots):
    """Best generator direction within the given slots.

    Returns the top eigenvector and eigenvalue of the principal submatrix
    of the moment matrix on generator_slots.
    """
    slots = list(generator_slots)
    if not slots:
        raise ValueError("generator_slots must be non-empty")
    m_tilde = principal_submatrix(md.m_matrix, slots)
    return principal_eigenpair(m_tilde)


def _shot_noise_from_tag(basis_tag: str) -> float:
    """Best classical sensitivity for the system behind a basis tag.

    N separable qubits reach at most N; a single coherent bosonic mode
    reaches 2.  Unknown tags yield NaN (no classical reference defined).
    """
    n = parse_dicke_tag(basis_tag)
    if n is not None:
        return float(n)
    if parse_fock_tag(basis_tag) is not None:
        return 2.0
    return math.nan


@dataclass(frozen=True, eq=False)
class SqueezingResult:
    """Optimized inverse squeezing parameter and the vectors achieving it.

    chi2_inv is the quadratic form n^T M n; xi2 the gain coefficient
    F_SN / chi2_inv; m_coeffs the unit-norm optimal measurement (None when
    the generator produces no signal); n_coeffs the generator direction on
    its candidate slots; lambda_max the top eigenvalue of the principal
    submatrix on those slots.
    """

    chi2_inv: float
    xi2: float
    m_coeffs: np.ndarray | None
    n_coeffs: np.ndarray
    lambda_max: float
    kernel_leakage: float = 0.0

    @property
    def robertson_violated(self) -> bool:
        return self.kernel_leakage > KERNEL_LEAK_TOL


def _squeeze_from_md(md: MomentData, slots, n_coeffs, f_sn: float,
                     state: QuantumState | None = None,
                     family: OperatorFamily | None = None) -> SqueezingResult:
    n_coeffs = np.asarray(n_coeffs, dtype=float)
    n_full = np.zeros(md.size)
    n_full[np.asarray(slots, dtype=int)] = n_coeffs
    chi2_inv = float(max(n_full @ md.m_matrix @ n_full, 0.0))
    try:
        m = optimal_measurement(md, n_coeffs, slots=slots)
    except ZeroSignalError:
        m = None
    if m is not None and state is not None and family is not None:
        # re-evaluate the saturating quotient directly on the state: the
        # quadratic form can overshoot bounds like F_Q by the noise of the
        # smallest retained covariance eigenvalues, while the quotient of
        # the (first-order optimal) measurement is stable
        try:
            chi2_inv = 1.0 / chi2_error_propagation(
                state, family.combine(n_full), family.combine(m)
            )
        except ZeroSignalError:
            pass
    _, lam = optimize_generator(md, slots)
    if chi2_inv > 0:
        xi2 = f_sn / chi2_inv
    else:
        xi2 = math.inf if not math.isnan(f_sn) else math.nan
    return SqueezingResult(
        chi2_inv=chi2_inv,
        xi2=xi2,
        m_coeffs=m,
        n_coeffs=n_coeffs,
        lambda_max=lam,
        kernel_leakage=md.kernel_leakage,
    )


def chi2_inverse_opt(state: QuantumState, family: OperatorFamily, n_coeffs,
                     generator_slots=None) -> SqueezingResult:
    """Best inverse squeezing parameter for a fixed generator direction.

    n_coeffs is a unit vector over the generator candidate slots (default:
    the degree-1 family members); the measurement is optimized analytically
    over the full family.
    """
    slots = list(generator_slots) if generator_slots is not None else family.linear_slots()
    n_coeffs = np.asarray(n_coeffs, dtype=float)
    if len(n_coeffs) != len(slots):
        raise ValueError("n_coeffs length must match the generator slots")
    if abs(np.linalg.norm(n_coeffs) - 1.0) > 1e-10:
        raise ValueError("generator direction must be a unit vector")
    md = moment_data(state, family)
    return _squeeze_from_md(md, slots, n_coeffs, _shot_noise_from_tag(family.basis_tag),
                            state=state, family=family)


def chi2_error_propagation(state: QuantumState, generator: HermitianOperator,
                           observable: HermitianOperator) -> float:
    """Error-propagation squeezing parameter (Delta X)^2 / |<[X, H]>|^2."""
    var_x = state.variance(observable)
    var_h = state.variance(generator)
    comm = abs(commutator_expectation(state, observable, generator))
    # Robertson bound |<[X,H]>| <= 2 sqrt(VarX VarH) sets the natural scale
    if comm <= 1e-12 * 2.0 * math.sqrt(max(var_x, 0.0) * max(var_h, 0.0)) or comm == 0.0:
        raise ZeroSignalError("observable carries no signal for this generator")
    return var_x / comm ** 2


def xi2_opt(chi2_inv: float, f_sn: float) -> float:
    """Gain coefficient F_SN / chi^-2; below 1 means quantum enhancement."""
    if chi2_inv <= 0:
        raise ValueError("chi2_inv must be positive")
    return f_sn / chi2_inv


def xi2_spin_order_k(state: QuantumState, basis: DickeBasis, k: int) -> SqueezingResult:
    """Order-k optimized spin squeezing: xi^2 = N / lambda_max(M-tilde).

    The measurement runs over all symmetrized spin monomials of degree
    <= k; the encoding generator is restricted to the three linear slots.
    """
    family = build_spin_family(basis, k)
    md = moment_data(state, family)
    slots = [0, 1, 2]
    n_opt, _ = optimize_generator(md, slots)
    return _squeeze_from_md(md, slots, n_opt, float(basis.n_particles),
                            state=state, family=family)


def spin_squeezing_profile(state: QuantumState, basis: DickeBasis, k_max: int,
                           family: OperatorFamily | None = None) -> list[SqueezingResult]:
    """Squeezing results for every order 1..k_max sharing one moment table.

    The order-k family is a prefix of the order-k_max family, so the
    covariance and commutator matrices are computed once and sliced.
    """
    if family is None:
        family = build_spin_family(basis, k_max)
    if len(family) != spin_family_size(k_max):
        raise ValueError("family does not match k_max")
    check_same_basis(state, family)
    z, _ = _centered_moment_table(state, family)
    gamma = (z.real + z.real.T) / 2
    c = z.imag - z.imag.T
    slots = [0, 1, 2]
    results = []
    for k in range(1, k_max + 1):
        cnt = spin_family_size(k)
        md = moment_matrix(gamma[:cnt, :cnt], c[:cnt, :cnt])
        n_opt, _ = optimize_generator(md, slots)
        results.append(_squeeze_from_md(md, slots, n_opt, float(basis.n_particles),
                                        state=state, family=family.prefix(cnt)))
    return results


ENT_BOUNDARY_TOL = 1e-9


def entanglement_bound(xi2_inv: float) -> int:
    """Largest k with xi2_inv > k: at least that many qubits are entangled.

    The inequality is strict, so values within 1e-9 of an integer boundary
    are not rounded up; floating noise at the classical limit (xi2_inv = 1)
    must not fake a detection.
    """
    if xi2_inv < 0:
        raise ValueError("xi2_inv must be non-negative")
    if not math.isfinite(xi2_inv):
        raise ValueError("xi2_inv must be finite")
    return max(0, math.ceil(xi2_inv - ENT_BOUNDARY_TOL) - 1)


@dataclass(frozen=True)
class EstimatorReport:
    """Predicted vs empirical variance of the moment-based estimator."""

    theta_true: float
    mu: int
    trials: int
    seed: int
    window: tuple
    predicted_variance: float
    empirical_variance: float
    ratio: float
    theta_mean: float
    n_clamped: int


def simulate_moment_estimator(state: QuantumState, generator: HermitianOperator,
                              observable: HermitianOperator, theta_true: float,
                              mu: int, trials: int, seed: int,
                              window: tuple | None = None,
                              grid_points: int = 1001) -> EstimatorReport:
    """Monte Carlo check of (Delta theta_est)^2 = chi^2 / mu.

    Each trial draws mu outcomes from the spectral distribution of the
    observable at theta_true and inverts the calibration curve <X>(theta)
    by monotone bracketing with linear interpolation on a fixed grid over
    the declared window (default: theta_true +- 0.3).
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if trials < 2:
        raise ValueError("need at least two trials to estimate a variance")
    if mu < 30:
        warnings.warn(
            f"mu = {mu} is too small for the central-limit regime the "
            "prediction relies on", stacklevel=2,
        )
    if window is None:
        window = (theta_true - 0.3, theta_true + 0.3)
    lo, hi = float(window[0]), float(window[1])
    if not lo < theta_true < hi:
        raise ValueError("theta_true must lie strictly inside the window")

    prop = HermitianPropagator(generator)
    grid = np.linspace(lo, hi, grid_points)
    curve = np.array([prop.apply(state, t).expectation(observable) for t in grid])
    diffs = np.diff(curve)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise CalibrationError("calibration curve is not monotonic on the window")
    if curve[0] > curve[-1]:
        curve_asc, grid_asc = curve[::-1], grid[::-1]
    else:
        curve_asc, grid_asc = curve, grid

    probe = prop.apply(state, theta_true)
    xvals, xvecs = np.linalg.eigh(observable.matrix)
    if probe.is_pure:
        p = np.abs(xvecs.conj().T @ probe.vector) ** 2
    else:
        p = np.einsum("ij,jk,ki->i", xvecs.conj().T, probe.density, xvecs).real
    p = np.clip(p, 0.0, None)
    p /= p.sum()

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(mu, p, size=trials)
    xbars = counts @ xvals / mu

    n_clamped = int(np.sum((xbars < curve_asc[0]) | (xbars > curve_asc[-1])))
    if n_clamped:
        warnings.warn(
            f"{n_clamped}/{trials} sample means fell outside the calibration "
            "window and were clamped", stacklevel=2,
        )
    theta_est = np.interp(xbars, curve_asc, grid_asc)

    empirical = float(np.var(theta_est, ddof=1))
    predicted = chi2_error_propagation(probe, generator, observable) / mu
    return EstimatorReport(
        theta_true=theta_true,
        mu=mu,
        trials=trials,
        seed=seed,
        window=(lo, hi),
        predicted_variance=predicted,
        empirical_variance=empirical,
        ratio=empirical / predicted,
        theta_mean=float(theta_est.mean()),
        n_clamped=n_clamped,
    )
