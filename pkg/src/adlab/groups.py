"""Finite unitary group representations and Lie-algebra generators.

All built-in groups act by monomial matrices (a permutation followed by a
diagonal phase), so they are stored as index/phase tables of size |G|*M and
only expanded to dense M x M matrices on request.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimError, InvalidInput
from .model import chirp_phase

DEFAULT_MAX_GROUP_BYTES = 2**26 * 16


def max_group_bytes():
    raw = os.environ.get("ADLAB_MAX_GROUP_BYTES")
    if raw is None:
        return DEFAULT_MAX_GROUP_BYTES
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidInput(f"ADLAB_MAX_GROUP_BYTES must be an integer, got {raw!r}") from exc


@dataclass
class GroupRep:
    """Finite group acting on C^M with normalized Haar weights.

    Element ``g`` maps ``x`` to ``phases[g] * x[perms[g]]``. Groups built
    from explicit matrices keep them in ``_dense`` instead.

    ``projective`` marks element sets that close only up to a global phase
    (the time-frequency lattice with the central phase dropped).
    """

    name: str
    M: int
    weights: np.ndarray
    perms: np.ndarray = None
    phases: np.ndarray = None
    projective: bool = False
    _dense: list = field(default=None, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0):
            raise InvalidInput("group weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInput(f"group weights sum to {w.sum()!r}, not 1")
        self.weights = w
        if self._dense is None and self.perms is None:
            raise InvalidInput("group needs either permutation tables or dense matrices")

    @property
    def order(self):
        return self.weights.shape[0]

    def __len__(self):
        return self.order

    @property
    def storage_bytes(self):
        return self.order * self.M * self.M * 16

    @property
    def lazy(self):
        """True when dense element storage would exceed the configured cap."""
        return self.storage_bytes > max_group_bytes()

    def element(self, g):
        """Dense matrix rho(g)."""
        if self._dense is not None:
            return self._dense[g]
        U = np.zeros((self.M, self.M), dtype=np.complex128)
        rows = np.arange(self.M)
        U[rows, self.perms[g]] = 1.0 if self.phases is None else self.phases[g]
        return U

    @property
    def elements(self):
        if self._dense is not None:
            return list(self._dense)
        if self.lazy:
            raise MemoryError(
                f"{self.name} group needs {self.storage_bytes} bytes of dense storage; "
                "raise ADLAB_MAX_GROUP_BYTES or use element(g)"
            )
        return [self.element(g) for g in range(self.order)]

    def act(self, g, x):
        x = np.asarray(x)
        if x.shape[0] != self.M:
            raise DimError(f"vector of length {x.shape[0]} for a group acting on C^{self.M}")
        if self._dense is not None:
            return self._dense[g] @ x
        y = x[self.perms[g]]
        return y if self.phases is None else self.phases[g] * y

    def orbit(self, x, start=0, stop=None):
        """Columns rho(g) x for g in [start, stop)."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[0] != self.M:
            raise DimError(f"vector of length {x.shape[0]} for a group acting on C^{self.M}")
        stop = self.order if stop is None else stop
        if self._dense is not None:
            return np.stack([self._dense[g] @ x for g in range(start, stop)], axis=1)
        Y = x[self.perms[start:stop]]
        if self.phases is not None:
            Y = Y * self.phases[start:stop]
        return Y.T

    @classmethod
    def from_matrices(cls, name, matrices, weights=None, projective=False):
        mats = [np.asarray(U, dtype=np.complex128) for U in matrices]
        if not mats:
            raise InvalidInput("a group needs at least one element")
        M = mats[0].shape[0]
        for U in mats:
            if U.shape != (M, M):
                raise DimError("group elements must all be M x M")
        if weights is None:
            weights = np.full(len(mats), 1.0 / len(mats))
        return cls(name, M, np.asarray(weights, float), projective=projective, _dense=mats)


def _uniform(n):
    return np.full(n, 1.0 / n)


def _check_M(M):
    if int(M) != M or M < 2:
        raise InvalidInput(f"group dimension must be an integer >= 2, got {M}")
    return int(M)


def trivial_group(M):
    M = _check_M(M)
    return GroupRep("trivial", M, _uniform(1), perms=np.arange(M)[None, :])


def cyclic_group(M):
    """Powers P^0..P^{M-1} of the cyclic shift (P x)[n] = x[n-1 mod M]."""
    M = _check_M(M)
    n = np.arange(M)
    perms = (n[None, :] - n[:, None]) % M
    return GroupRep("cyclic", M, _uniform(M), perms=perms)


def reversal_group(M):
    M = _check_M(M)
    n = np.arange(M)
    return GroupRep("reversal", M, _uniform(2), perms=np.stack([n, M - 1 - n]))


def dihedral_group(M):
    """Elements P^k followed by J P^k, k = 0..M-1."""
    M = _check_M(M)
    n = np.arange(M)
    shifts = (n[None, :] - n[:, None]) % M
    reflected = (M - 1 - n[None, :] - n[:, None]) % M
    return GroupRep("dihedral", M, _uniform(2 * M), perms=np.concatenate([shifts, reflected]))


def tf_lattice_group(M):
    """rho(k, l) = W^l P^k with (W x)[n] = exp(i 2 pi n / M) x[n].

    Element index is ``k * M + l``. The central phase is dropped, so the set
    closes only up to a global phase.
    """
    M = _check_M(M)
    n = np.arange(M)
    k = np.repeat(n, M)
    l = np.tile(n, M)
    perms = (n[None, :] - k[:, None]) % M
    phases = np.exp(2j * np.pi * l[:, None] * n[None, :] / M)
    return GroupRep("tf-lattice", M, _uniform(M * M), perms=perms, phases=phases,
                    projective=True)


GROUPS = {
    "trivial": trivial_group,
    "cyclic": cyclic_group,
    "dihedral": dihedral_group,
    "reversal": reversal_group,
    "tf-lattice": tf_lattice_group,
}


def make_group(name, M):
    try:
        builder = GROUPS[name]
    except KeyError:
        raise InvalidInput(f"unknown group {name!r}; choose from {sorted(GROUPS)}") from None
    return builder(M)


def shift_matrix(M):
    return np.roll(np.eye(M, dtype=np.complex128), 1, axis=0)


def reversal_matrix(M):
    return np.eye(M, dtype=np.complex128)[::-1]


def modulation_matrix(M):
    return np.diag(np.exp(2j * np.pi * np.arange(M) / M))


def _find(U, mats, projective, atol=1e-10):
    for i, V in enumerate(mats):
        if projective:
            # V = c U with |c| = 1  <=>  |tr(U^H V)| = M
            if abs(abs(np.vdot(U, V)) - U.shape[0]) < atol * U.shape[0]:
                return i
        elif np.max(np.abs(U - V)) < atol:
            return i
    return -1


def multiplication_table(G):
    """table[h, g] = index of rho(h) rho(g) in the element list (-1 if absent)."""
    mats = G.elements
    table = np.empty((G.order, G.order), dtype=int)
    for h, A in enumerate(mats):
        for g, B in enumerate(mats):
            table[h, g] = _find(A @ B, mats, G.projective)
    return table


def unitarity_defect(G):
    eye = np.eye(G.M)
    return max(np.linalg.norm(U.conj().T @ U - eye) for U in G.elements)


def check_haar(G, table=None):
    """Left-invariance of the weights: w[h g] == w[g] for every h."""
    table = multiplication_table(G) if table is None else table
    if np.any(table < 0):
        return False
    return all(np.allclose(G.weights[table[h]], G.weights, atol=1e-15) for h in range(G.order))


@dataclass(frozen=True)
class Generator:
    """A named Lie-algebra element given as one or more Hermitian parts.

    A unitary U = H1 + i H2 is stored as the pair (H1, H2); it commutes with
    R exactly when both parts do.
    """

    name: str
    parts: tuple

    @property
    def M(self):
        return self.parts[0].shape[0]

    @property
    def matrix(self):
        """The single Hermitian matrix, or H1 + i H2 for a unitary pair."""
        if len(self.parts) == 1:
            return self.parts[0]
        return self.parts[0] + 1j * self.parts[1]


def hermitian_parts(U):
    U = np.asarray(U, dtype=np.complex128)
    return (0.5 * (U + U.conj().T), (U - U.conj().T) / 2j)


def shift_generator(M):
    M = _check_M(M)
    return Generator("shift", hermitian_parts(shift_matrix(M)))


def log_diag_generator(M):
    """D = diag(ln 1, ..., ln M)."""
    M = _check_M(M)
    return Generator("logdiag", (np.diag(np.log(np.arange(1, M + 1))).astype(np.complex128),))


def chirp_conj_shift_generator(M, beta, dt=1.0, t0=0.0):
    """Hermitian parts of U^H P U, U = diag(exp(-i pi beta t^2))."""
    M = _check_M(M)
    u = chirp_phase(M, dt, beta, t0)
    Ppsi = u.conj()[:, None] * shift_matrix(M) * u[None, :]
    return Generator("chirpshift", hermitian_parts(Ppsi))


GENERATOR_NAMES = ("shift", "logdiag", "chirpshift")


def make_generator(name, M, beta=0.0, dt=1.0):
    if name == "shift":
        return shift_generator(M)
    if name == "logdiag":
        return log_diag_generator(M)
    if name == "chirpshift":
        return chirp_conj_shift_generator(M, beta, dt)
    raise InvalidInput(f"unknown generator {name!r}; choose from {list(GENERATOR_NAMES)}")
