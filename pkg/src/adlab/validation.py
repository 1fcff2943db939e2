"""Input validation helpers.

scikit-learn's ``check_array`` refuses complex input, so the checks used by
the estimators live here instead.
"""

import numpy as np

from .exceptions import DimError, InvalidInput, NotFittedError

HERMITIAN_ATOL = 1e-12


def check_vector(x, name="x", min_len=2):
    """Return ``x`` as a 1-D complex128 array of length >= ``min_len``."""
    samples = getattr(x, "samples", x)
    arr = np.asarray(samples)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise DimError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise DimError(f"{name} needs at least {min_len} samples, got {arr.shape[0]}")
    arr = arr.astype(np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    return arr


def check_square(A, name="A"):
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    return arr


def hermitian(A):
    """Exactly symmetrized Hermitian copy of a square matrix."""
    arr = check_square(A)
    return 0.5 * (arr + arr.conj().T)


def check_hermitian(A, name="A", atol=HERMITIAN_ATOL, rtol=1e-12):
    """Validate Hermitian input and return its exactly symmetrized form.

    The tolerance is ``atol + rtol * max|A|`` so that large but legitimate
    operators are not rejected over roundoff.
    """
    arr = check_square(A, name)
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    dev = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if dev > atol + rtol * scale:
        raise InvalidInput(f"{name} is not Hermitian (max asymmetry {dev:.3e})")
    return 0.5 * (arr + arr.conj().T)


def is_psd(A, rel_tol=1e-10):
    """Hermitian PSD up to ``eig >= -rel_tol * trace``."""
    w = np.linalg.eigvalsh(A)
    tr = abs(float(np.real(np.trace(A))))
    return bool(w.min() >= -rel_tol * max(tr, np.finfo(float).tiny))


def check_same_dim(A, B, names=("A", "B")):
    if A.shape != B.shape:
        raise DimError(f"{names[0]} has shape {A.shape} but {names[1]} has {B.shape}")


def check_orthonormal(S, atol=1e-8):
    from .exceptions import InvalidBasis

    S = np.asarray(S, dtype=np.complex128)
    if S.ndim == 1:
        S = S[:, None]
    gram = S.conj().T @ S
    if np.max(np.abs(gram - np.eye(S.shape[1]))) > atol:
        raise InvalidBasis("basis columns are not orthonormal")
    return S


def check_is_fitted(estimator, attributes):
    if isinstance(attributes, str):
        attributes = [attributes]
    if not all(hasattr(estimator, a) for a in attributes):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )
