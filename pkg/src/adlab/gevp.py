"""Blind group matching by the double-commutator generalized eigenproblem.

Minimizing ||[A, R]||_F^2 / ||A||_F^2 over A = sum_k c_k B_k is the
symmetric-definite problem ``Mmat c = lambda Nmat c`` with

    Mmat_ij = Tr([R, B_i]^H [R, B_j]),   Nmat_ij = Tr(B_i^H B_j).
"""

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator

from .exceptions import DimError, InvalidBasis, InvalidInput, NumericalFailure, SingularGram
from .groups import shift_matrix
from .model import chirp_phase
from .validation import check_hermitian, check_is_fitted

FULL_HERMITIAN_MAX_M = 24
INDEPENDENCE_RTOL = 1e-10
DEGENERACY_RTOL = 1e-10
NAME_RTOL = 0.10
BASIS_NAMES = ("circulant-hermitian", "diagonal-real", "chirp-circulant", "full-hermitian")


@dataclass
class GeneratorBasis:
    """Ordered Hermitian matrices B_1..B_d spanning a real generator subspace."""

    name: str
    matrices: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.matrices, dtype=np.complex128)
        if B.ndim != 3 or B.shape[1] != B.shape[2] or B.shape[0] < 1:
            raise InvalidBasis("basis must be a non-empty stack of square matrices")
        scale = max(1.0, float(np.max(np.abs(B))))
        if np.max(np.abs(B - B.conj().transpose(0, 2, 1))) > 1e-12 * scale:
            raise InvalidBasis("basis matrices must be Hermitian")
        self.matrices = B
        self._gram = None
        w = np.linalg.eigvalsh(self.gram())
        if w[0] <= INDEPENDENCE_RTOL * w[-1]:
            raise SingularGram(f"basis {self.name!r} is linearly dependent "
                               f"(Gram eigenvalues {w[0]:.3e} .. {w[-1]:.3e})")

    @property
    def d(self):
        return self.matrices.shape[0]

    @property
    def M(self):
        return self.matrices.shape[1]

    def gram(self):
        """Nmat, computed once; independence was checked at construction."""
        if self._gram is None:
            flat = self.matrices.reshape(self.d, -1)
            self._gram = _real_symmetric(flat.conj() @ flat.T, "Nmat")
        return self._gram

    def combine(self, coeffs):
        return np.tensordot(np.asarray(coeffs, dtype=float), self.matrices, axes=1)


def _project_identity(B):
    M = B.shape[-1]
    tr = np.trace(B, axis1=-2, axis2=-1).real / M
    return B - tr[:, None, None] * np.eye(M)[None]


def _orthonormalize(B):
    """Frobenius-orthonormalize with real coefficients, so Hermitian stays Hermitian."""
    flat = B.reshape(B.shape[0], -1)
    N = (flat.conj() @ flat.T).real
    L = np.linalg.cholesky(N)
    T = linalg.solve_triangular(L, np.eye(N.shape[0]), lower=True)
    return np.tensordot(T, B, axes=1)


def _circulant_parts(M):
    P = shift_matrix(M)
    Pk = np.eye(M, dtype=np.complex128)
    mats = []
    for k in range(1, M // 2 + 1):
        Pk = Pk @ P
        Pmk = Pk.conj().T
        mats.append((Pk + Pmk) / np.sqrt(2.0))
        if 2 * k != M:
            mats.append((Pk - Pmk) / (1j * np.sqrt(2.0)))
    return mats


def circulant_hermitian_basis(M):
    """(P^k + P^-k)/sqrt2 and (P^k - P^-k)/(i sqrt2), k = 1..M/2, identity removed."""
    B = _orthonormalize(_project_identity(np.array(_circulant_parts(M))))
    return GeneratorBasis("circulant-hermitian", B)


def diagonal_real_basis(M):
    """E_ii - I/M for i = 0..M-2 (the last is dependent once the identity is removed)."""
    E = np.zeros((M - 1, M, M), dtype=np.complex128)
    E[np.arange(M - 1), np.arange(M - 1), np.arange(M - 1)] = 1.0
    return GeneratorBasis("diagonal-real", _orthonormalize(_project_identity(E)))


def chirp_circulant_basis(M, beta, dt=1.0):
    """The circulant-hermitian basis conjugated into the chirp frame."""
    u = chirp_phase(M, dt, beta)
    B = circulant_hermitian_basis(M).matrices
    B = u.conj()[None, :, None] * B * u[None, None, :]
    return GeneratorBasis("chirp-circulant", B)


def full_hermitian_basis(M):
    if M > FULL_HERMITIAN_MAX_M:
        raise InvalidInput(f"full-hermitian basis has d = M^2 - 1 and O(M^6) assembly; "
                           f"refused for M = {M} > {FULL_HERMITIAN_MAX_M}")
    mats = []
    for i in range(M - 1):
        E = np.zeros((M, M), dtype=np.complex128)
        E[i, i] = 1.0
        mats.append(E)
    for i in range(M):
        for j in range(i + 1, M):
            S = np.zeros((M, M), dtype=np.complex128)
            S[i, j] = S[j, i] = 1.0 / np.sqrt(2.0)
            A = np.zeros((M, M), dtype=np.complex128)
            A[i, j] = -1j / np.sqrt(2.0)
            A[j, i] = 1j / np.sqrt(2.0)
            mats.extend([S, A])
    B = _orthonormalize(_project_identity(np.array(mats)))
    return GeneratorBasis("full-hermitian", B)


def make_basis(name, M, beta=0.0, dt=1.0):
    if name == "circulant-hermitian":
        return circulant_hermitian_basis(M)
    if name == "diagonal-real":
        return diagonal_real_basis(M)
    if name == "chirp-circulant":
        return chirp_circulant_basis(M, beta, dt)
    if name == "full-hermitian":
        return full_hermitian_basis(M)
    raise InvalidInput(f"unknown basis {name!r}; choose from {list(BASIS_NAMES)}")


def _real_symmetric(A, what, ref=0.0):
    # ref is the roundoff scale of the entries when A itself is nearly zero
    scale = max(float(np.max(np.abs(A))), ref, np.finfo(float).tiny)
    if np.max(np.abs(A.imag)) > 1e-10 * scale:
        raise NumericalFailure(f"{what} has a non-negligible imaginary part")
    A = A.real
    if np.max(np.abs(A - A.T)) > 1e-10 * scale:
        raise NumericalFailure(f"{what} is not symmetric beyond roundoff")
    return 0.5 * (A + A.T)


def commutators(R, basis):
    """Stack of [R, B_i], each from one batched product."""
    B = basis.matrices
    return np.matmul(R[None], B) - np.matmul(B, R[None])


def assemble_double_commutator(R, basis):
    """(Mmat, Nmat) in Gram-of-commutators form; both real symmetric."""
    R = check_hermitian(R, "R")
    if R.shape[0] != basis.M:
        raise DimError(f"R is {R.shape} but the basis acts on C^{basis.M}")
    d = basis.d
    C = commutators(R, basis).reshape(d, -1)
    b_max = float(np.max(np.linalg.norm(basis.matrices, axis=(1, 2))))
    ref = (np.linalg.norm(R) * b_max) ** 2
    Mmat = _real_symmetric(C.conj() @ C.T, "Mmat", ref)
    return Mmat, basis.gram()


def double_commutator_trace_form(R, basis):
    """Mmat_ij = Tr(B_i^H [R, [R, B_j]]) evaluated literally, for cross-checks."""
    R = check_hermitian(R, "R")
    B = basis.matrices
    C = commutators(R, basis)
    CC = np.matmul(R[None], C) - np.matmul(C, R[None])
    return np.einsum("iab,jab->ij", B.conj(), CC)


@dataclass
class GevpSolution:
    lambda_min: float
    coeffs: np.ndarray
    generator: np.ndarray = None
    delta: float = None
    degenerate: bool = False
    multiplicity: int = 1
    eigenspace: np.ndarray = None
    eigenvalues: np.ndarray = None
    interpretation: str = "unnamed"
    basis: str = None
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "lambda_min": self.lambda_min,
            "delta": self.delta,
            "coeffs": [float(c) for c in self.coeffs],
            "degenerate": self.degenerate,
            "multiplicity": self.multiplicity,
            "interpretation": self.interpretation,
            "basis": self.basis,
            "timings": dict(self.timings),
        }


def _sign_fix(c):
    nz = np.flatnonzero(np.abs(c) > 1e-12 * np.max(np.abs(c)))
    return -c if c[nz[0]] < 0 else c


def solve_gevp(Mmat, Nmat, r_norm=None):
    """Smallest eigenpair of Mmat c = lambda Nmat c by Cholesky reduction.

    The returned coefficients satisfy c^T Nmat c = 1 with the first nonzero
    entry positive. When the smallest eigenvalue is repeated, the N-orthonormal
    eigenspace is returned too and ``coeffs`` is the normalized projection of
    the first basis direction that has one.
    """
    Mmat = _real_symmetric(np.asarray(Mmat, dtype=np.complex128), "Mmat")
    Nmat = _real_symmetric(np.asarray(Nmat, dtype=np.complex128), "Nmat")
    if Mmat.shape != Nmat.shape or Mmat.ndim != 2:
        raise DimError("Mmat and Nmat must be square with the same shape")
    try:
        L = np.linalg.cholesky(Nmat)
    except np.linalg.LinAlgError:
        raise SingularGram("Nmat is not positive definite") from None
    wn = np.linalg.eigvalsh(Nmat)
    if wn[0] <= INDEPENDENCE_RTOL * wn[-1]:
        raise SingularGram("Nmat is numerically singular")
    Linv = linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    S = Linv @ Mmat @ Linv.T
    w, Y = np.linalg.eigh(0.5 * (S + S.T))
    m_norm = float(np.linalg.norm(Mmat))
    lam = float(w[0])
    if lam < -1e-10 * max(m_norm, 0.0 if r_norm is None else r_norm**2):
        raise NumericalFailure(f"smallest eigenvalue {lam:.3e} is negative beyond roundoff")
    lam = max(lam, 0.0)
    # eigenvalues are bounded by 4 ||R||^2 in N-units, so that is the natural scale
    scale = max(float(np.max(np.abs(w))), 0.0 if r_norm is None else 4.0 * r_norm**2)
    tol = DEGENERACY_RTOL * max(scale, np.finfo(float).tiny)
    k = int(np.sum(w - w[0] <= tol)) if m_norm > 0 else len(w)
    Yk = Y[:, :k]
    if k > 1:
        proj = Yk @ Yk.T
        j = int(np.argmax(np.linalg.norm(proj, axis=0) > 1e-8))
        y = proj[:, j] / np.linalg.norm(proj[:, j])
    else:
        y = Yk[:, 0]
    c = _sign_fix(Linv.T @ y)
    delta = None if r_norm is None else float(np.sqrt(lam) / r_norm)
    return GevpSolution(lam, c, delta=delta, degenerate=k > 1, multiplicity=k,
                        eigenspace=Linv.T @ Yk, eigenvalues=w)


def named_generators(M, beta=0.0, dt=1.0):
    """Identity-free, unit-norm Hermitian matrices with human-readable names."""
    named = {}
    parts = _circulant_parts(M)
    idx = 0
    for k in range(1, M // 2 + 1):
        named[f"shift-cos{k}"] = parts[idx]
        idx += 1
        if 2 * k != M:
            named[f"shift-sin{k}"] = parts[idx]
            idx += 1
    named["logdiag"] = np.diag(np.log(np.arange(1, M + 1))).astype(np.complex128)
    if beta != 0.0:
        u = chirp_phase(M, dt, beta)
        for key in [n for n in named if n.startswith("shift")]:
            named["chirp" + key] = u.conj()[:, None] * named[key] * u[None, :]
    out = {}
    for key, A in named.items():
        A = A - np.trace(A).real / M * np.eye(M)
        out[key] = A / np.linalg.norm(A)
    return out


def _nearest_name(A, names):
    A = A / np.linalg.norm(A)
    best, best_d = "unnamed", np.inf
    for key, G in names.items():
        dist = min(np.linalg.norm(A - G), np.linalg.norm(A + G))
        if dist < best_d:
            best, best_d = key, dist
    return (best if best_d <= NAME_RTOL else "unnamed"), float(best_d)


def match_group(R, basis_name="circulant-hermitian", beta=0.0, dt=1.0):
    """Build a basis, assemble, solve, and label the optimal generator."""
    R = check_hermitian(R, "R")
    M = R.shape[0]
    basis = basis_name if isinstance(basis_name, GeneratorBasis) else \
        make_basis(basis_name, M, beta, dt)
    t0 = time.perf_counter()
    Mmat, Nmat = assemble_double_commutator(R, basis)
    t1 = time.perf_counter()
    sol = solve_gevp(Mmat, Nmat, np.linalg.norm(R))
    t2 = time.perf_counter()
    names = named_generators(M, beta, dt)
    if sol.degenerate:
        # inside a degenerate eigenspace, prefer the member closest to a named generator
        Q = np.array([basis.combine(col) for col in sol.eigenspace.T])
        flatQ = Q.reshape(Q.shape[0], -1)
        G = (flatQ.conj() @ flatQ.T).real
        best_norm = 0.0
        for G_named in names.values():
            rhs = (flatQ.conj() @ G_named.ravel()).real
            coef = np.linalg.solve(G, rhs)
            A = np.tensordot(coef, Q, axes=1)
            nrm = np.linalg.norm(A)
            if nrm > best_norm + 1e-12:
                best_norm = nrm
                c = sol.eigenspace @ coef
                sol.coeffs = _sign_fix(c / np.sqrt(c @ Nmat @ c))
    sol.generator = basis.combine(sol.coeffs)
    sol.interpretation, _ = _nearest_name(sol.generator, names)
    sol.basis = basis.name
    sol.timings = {"assemble_s": t1 - t0, "solve_s": t2 - t1}
    return sol


class GevpGroupMatcher(BaseEstimator):
    """Find the generator in a basis span that best commutes with a covariance.

    Parameters
    ----------
    basis : str, default="circulant-hermitian"
    beta, dt : float
        Used by the chirp-circulant basis and chirp-frame names.

    Attributes
    ----------
    lambda_min_, delta_ : float
    coeffs_ : ndarray of shape (d,)
    generator_ : ndarray of shape (M, M)
    interpretation_ : str
    degenerate_ : bool
    """

    def __init__(self, basis="circulant-hermitian", beta=0.0, dt=1.0):
        self.basis = basis
        self.beta = beta
        self.dt = dt

    def fit(self, R, y=None):
        sol = match_group(R, self.basis, self.beta, self.dt)
        self.solution_ = sol
        self.lambda_min_ = sol.lambda_min
        self.delta_ = sol.delta
        self.coeffs_ = sol.coeffs
        self.generator_ = sol.generator
        self.interpretation_ = sol.interpretation
        self.degenerate_ = sol.degenerate
        self.n_features_in_ = sol.generator.shape[0]
        return self

    def score(self, R, y=None):
        """Negative residual of the fitted generator against ``R``."""
        from .residual import delta_generator

        check_is_fitted(self, "generator_")
        return -delta_generator(self.generator_, R)


def random_hermitian_basis(M, d, seed=0):
    """d random Hermitian matrices; independent with probability one when d < M^2."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((d, M, M)) + 1j * rng.standard_normal((d, M, M))
    return GeneratorBasis("random", 0.5 * (B + B.conj().transpose(0, 2, 1)))


def assembly_scaling(M_list=(8, 16, 32), d=63, seed=0, repeats=7):
    """Best-of timings of ``assemble_double_commutator`` at fixed d.

    Returns the per-M seconds and ``spread``: the ratio of the largest to the
    smallest time per d^2 M^2 unit (1.0 is perfect O(d^2 M^2) scaling).
    """
    import timeit

    times = []
    for M in M_list:
        if d >= M * M:
            raise InvalidInput(f"d = {d} must be below M^2 = {M * M} for an independent basis")
        basis = random_hermitian_basis(M, d, seed)
        X = np.random.default_rng(seed + 1).standard_normal((M, M))
        R = (X + X.T).astype(np.complex128)
        timer = timeit.Timer(lambda: assemble_double_commutator(R, basis))
        number, _ = timer.autorange()
        times.append(min(timer.repeat(repeats, number)) / number)
    per_unit = np.array(times) / (d**2 * np.asarray(M_list, float) ** 2)
    return {"M": list(M_list), "d": d, "seconds": times,
            "spread": float(per_unit.max() / per_unit.min())}
