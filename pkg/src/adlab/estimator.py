"""Group-averaged covariance estimator and its spectral diagnostics.

``F_G(x) = sum_g w_g (rho(g) x)(rho(g) x)^H`` is computed with the plain
Euclidean inner product (no dt weighting), so ``trace F_G(x) = sum |x|^2``.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DimError, NumericalFailure
from .groups import GroupRep, make_group
from .validation import check_is_fitted, check_orthonormal, check_vector

DEFAULT_CHUNK = 256
RANK_TOL = 1e-8


def fix_phases(V):
    """Make the largest-magnitude entry of every column real and positive."""
    V = np.array(V, dtype=np.complex128, copy=True)
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(V.shape[1])]
    mag = np.abs(lead)
    factor = np.ones_like(lead)
    nz = mag > 0
    factor[nz] = lead[nz].conj() / mag[nz]
    return V * factor[None, :]


def sorted_eigh(A):
    """Eigenpairs of a Hermitian matrix, eigenvalues descending, phases fixed."""
    w, V = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    return w[order], fix_phases(V[:, order])


@dataclass
class AveragedEstimate:
    operator: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    group_name: str

    @property
    def M(self):
        return self.operator.shape[0]

    def rank(self, tol=RANK_TOL):
        return rank_of_signal_estimate(self, tol)


def _kahan_add(total, comp, term):
    y = term - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def group_averaged_operator(x, G, chunk_size=DEFAULT_CHUNK, debug=False):
    """Accumulate sum_g w_g (rho(g)x)(rho(g)x)^H in fixed-size chunks.

    Chunks are summed in element-list order with Kahan compensation, so the
    result is bit-reproducible for a given ``chunk_size``.
    """
    x = check_vector(x)
    if x.shape[0] != G.M:
        raise DimError(f"signal has length {x.shape[0]} but group {G.name} acts on C^{G.M}")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    M = G.M
    total = np.zeros((M, M), dtype=np.complex128)
    comp = np.zeros_like(total)
    norm2 = float(np.vdot(x, x).real)
    for start in range(0, G.order, chunk_size):
        stop = min(start + chunk_size, G.order)
        Y = G.orbit(x, start, stop)
        if debug:
            # every rank-one term has Frobenius norm |x|^2
            term_norms = np.sum(np.abs(Y) ** 2, axis=0)
            if not np.allclose(term_norms, norm2, rtol=1e-10, atol=1e-300):
                raise NumericalFailure("group element changed the norm of x; not unitary")
        partial = (Y * G.weights[start:stop]) @ Y.conj().T
        total, comp = _kahan_add(total, comp, partial)
    return 0.5 * (total + total.conj().T)


def group_averaged_estimate(x, G, chunk_size=DEFAULT_CHUNK, debug=False):
    """Group-averaged estimator with its descending eigendecomposition.

    Parameters
    ----------
    x : array_like or Signal
        Single observation of length M.
    G : GroupRep
        Finite group acting on C^M.

    Returns
    -------
    AveragedEstimate
    """
    F = group_averaged_operator(x, G, chunk_size, debug)
    w, V = sorted_eigh(F)
    return AveragedEstimate(F, w, V, G.name)


def cyclic_estimate_spectrum(x, check=True):
    """Eigenvalues of the cyclic-group estimator in DFT bin order.

    Uses the periodogram shortcut ``|DFT_k(x)|^2 / M``; with ``check`` the
    dense eigendecomposition is computed too and must agree to 1e-9.
    """
    x = check_vector(x)
    M = x.shape[0]
    spec = np.abs(np.fft.fft(x)) ** 2 / M
    if check:
        from .groups import cyclic_group

        dense = np.sort(np.linalg.eigvalsh(group_averaged_operator(x, cyclic_group(M))))
        scale = max(float(spec.max()), np.finfo(float).tiny)
        if np.max(np.abs(np.sort(spec) - dense)) > 1e-9 * scale:
            raise NumericalFailure("periodogram shortcut disagrees with the dense eigensolver")
    return spec


def subspace_alignment(est, S, r=None):
    """Smallest principal-angle cosine between the top-r eigenvectors and span(S)."""
    S = check_orthonormal(S)
    r = S.shape[1] if r is None else int(r)
    if not 1 <= r <= est.M:
        raise DimError(f"rank {r} outside 1..{est.M}")
    top = est.eigenvectors[:, :r]
    return float(np.min(np.linalg.svd(top.conj().T @ S, compute_uv=False).clip(0.0, 1.0)))


def rank_of_signal_estimate(est, tol=RANK_TOL):
    """Number of eigenvalues above ``tol * lambda_max`` (0 for a zero operator)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam_max = float(np.max(est.eigenvalues))
    if lam_max <= 0:
        return 0
    return int(np.sum(est.eigenvalues > tol * lam_max))


class GroupAveragedCovariance(TransformerMixin, BaseEstimator):
    """Single-observation covariance estimate by averaging over a finite group.

    ``transform`` expands signals in the estimator's eigenbasis; for the
    cyclic group that basis is the DFT (up to ordering and phase).

    Parameters
    ----------
    group : str or GroupRep, default="cyclic"
        Group name (``trivial``, ``cyclic``, ``dihedral``, ``reversal``,
        ``tf-lattice``) or a prebuilt representation.
    chunk_size : int, default=256
        Deterministic accumulation chunk.

    Attributes
    ----------
    covariance_ : ndarray of shape (M, M)
    eigenvalues_ : ndarray of shape (M,)
        Descending.
    eigenvectors_ : ndarray of shape (M, M)
    group_ : GroupRep
    """

    def __init__(self, group="cyclic", chunk_size=DEFAULT_CHUNK):
        self.group = group
        self.chunk_size = chunk_size

    def fit(self, X, y=None):
        x = check_vector(X, "X")
        G = self.group if isinstance(self.group, GroupRep) else make_group(self.group, x.shape[0])
        est = group_averaged_estimate(x, G, self.chunk_size)
        self.group_ = G
        self.covariance_ = est.operator
        self.eigenvalues_ = est.eigenvalues
        self.eigenvectors_ = est.eigenvectors
        self.n_features_in_ = x.shape[0]
        return self

    def _rows(self, X):
        X = np.asarray(getattr(X, "samples", X), dtype=np.complex128)
        X2 = X[None, :] if X.ndim == 1 else X
        if X2.ndim != 2 or X2.shape[1] != self.n_features_in_:
            raise DimError(f"expected rows of length {self.n_features_in_}, got shape {X.shape}")
        return X, X2

    def transform(self, X):
        check_is_fitted(self, "eigenvectors_")
        X, X2 = self._rows(X)
        out = X2 @ self.eigenvectors_.conj()
        return out[0] if X.ndim == 1 else out

    def inverse_transform(self, C):
        check_is_fitted(self, "eigenvectors_")
        C, C2 = self._rows(C)
        out = C2 @ self.eigenvectors_.T
        return out[0] if C.ndim == 1 else out

    def rank(self, tol=RANK_TOL):
        check_is_fitted(self, "eigenvalues_")
        return rank_of_signal_estimate(
            AveragedEstimate(self.covariance_, self.eigenvalues_, self.eigenvectors_,
                             self.group_.name),
            tol,
        )
