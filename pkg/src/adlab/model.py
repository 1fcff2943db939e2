"""Signals, covariance models for the three signal classes, and seeded noise.

Covariances are returned as plain ``complex128`` ndarrays that have been
exactly symmetrized; "Hermitian operator" in this package always means such
an array.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInput, InvalidModel
from .validation import check_vector, hermitian

PSD_REL_TOL = 1e-10


@dataclass(frozen=True)
class Signal:
    """A length-M complex sample vector on a uniform time grid."""

    samples: np.ndarray
    dt: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", check_vector(self.samples, "samples"))
        if not self.dt > 0:
            raise InvalidInput(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "origin", float(self.origin))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def M(self):
        return self.samples.shape[0]

    @property
    def times(self):
        return self.origin + self.dt * np.arange(self.M)

    def energy(self):
        """dt-weighted squared L2 norm."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)


def as_signal(x, dt=None):
    if isinstance(x, Signal):
        if dt is not None and dt != x.dt:
            return Signal(x.samples, dt, x.origin)
        return x
    return Signal(np.asarray(x), 1.0 if dt is None else dt)


def time_grid(M, dt, t0=0.0):
    return t0 + dt * np.arange(M)


def _check_psd(R, what):
    w = np.linalg.eigvalsh(R)
    tr = float(np.real(np.trace(R)))
    if w.min() < -PSD_REL_TOL * max(abs(tr), np.finfo(float).tiny):
        raise InvalidModel(f"{what} is not positive semidefinite (min eig {w.min():.3e})")
    return R


def unitary_dft(M):
    return np.fft.fft(np.eye(M), axis=0, norm="ortho")


def circulant(first_column):
    """Circulant matrix C[i, j] = c[(i - j) mod M]."""
    c = np.asarray(first_column)
    idx = np.arange(c.shape[0])
    return c[(idx[:, None] - idx[None, :]) % c.shape[0]]


def make_circulant_covariance(psd):
    """R = F^H diag(psd) F, circulant with eigenvalues ``psd``.

    Examples
    --------
    >>> import numpy as np
    >>> np.allclose(make_circulant_covariance(np.ones(4)), np.eye(4))
    True
    """
    psd = np.asarray(psd, dtype=float)
    if psd.ndim != 1 or psd.shape[0] < 2:
        raise InvalidModel("psd must be a vector of length >= 2")
    if np.any(psd < 0) or not np.all(np.isfinite(psd)):
        raise InvalidModel("psd entries must be finite and nonnegative")
    # first column of F^H diag(psd) F is ifft(psd); build it that way and
    # symmetrize so the result is exactly Hermitian
    c = np.fft.ifft(psd)
    return hermitian(circulant(c))


def lorentzian_psd(M, corner=4.0):
    """Smooth low-pass spectrum on DFT bin order, used as a stationary default."""
    f = np.fft.fftfreq(M) * M
    return 1.0 / (1.0 + (f / corner) ** 2)


def make_fbm_covariance(M, dt, hurst, sigma2=1.0, t0=0.0):
    """Fractional Brownian motion covariance on ``t_i = t0 + i*dt``.

    R[i, j] = (sigma2/2) (|t_i|^2H + |t_j|^2H - |t_i - t_j|^2H).
    """
    if not 0.0 < hurst < 1.0:
        raise InvalidModel(f"Hurst exponent must lie in (0, 1), got {hurst}")
    if not sigma2 > 0:
        raise InvalidModel("sigma2 must be positive")
    if not dt > 0 or M < 2:
        raise InvalidModel("need M >= 2 and dt > 0")
    if t0 < 0:
        raise InvalidModel("fBm grid must start at t0 >= 0")
    t = time_grid(M, dt, t0)
    h2 = 2.0 * hurst
    ti = np.abs(t)[:, None] ** h2
    tj = np.abs(t)[None, :] ** h2
    R = 0.5 * sigma2 * (ti + tj - np.abs(t[:, None] - t[None, :]) ** h2)
    R = hermitian(R.astype(np.complex128))
    return _check_psd(R, "fBm covariance")


def chirp_phase(M, dt, beta, t0=0.0):
    """Diagonal of the chirp-frame unitary, exp(-i pi beta t^2).

    With this sign the chirp covariance is ``U^H C U`` for a circulant ``C``.
    """
    t = time_grid(M, dt, t0)
    return np.exp(-1j * np.pi * beta * t**2)


def wrapped_gaussian_envelope(M, dt, width):
    """Periodized Gaussian A(d) on lags 0..M-1, normalized so A(0) = 1.

    Periodizing keeps the envelope circulant, which is what makes the
    chirp-conjugated shift commute with the chirp covariance exactly. Its
    DFT is a sampled Gaussian, so the envelope is positive definite.
    """
    if not width > 0:
        raise InvalidModel("envelope width must be positive")
    period = M * dt
    n_img = int(np.ceil(9.0 * width / period)) + 1
    lag = np.arange(M) * dt
    env = np.zeros(M)
    for k in range(-n_img, n_img + 1):
        env += np.exp(-((lag + k * period) ** 2) / (2.0 * width**2))
    return env / env[0]


def make_chirp_covariance(M, dt, beta, width, sigma2=1.0, t0=0.0):
    """R[i, j] = sigma2 A(t_i - t_j) exp(i pi beta (t_i^2 - t_j^2))."""
    if not sigma2 > 0:
        raise InvalidModel("sigma2 must be positive")
    if M < 2 or not dt > 0:
        raise InvalidModel("need M >= 2 and dt > 0")
    C = sigma2 * circulant(wrapped_gaussian_envelope(M, dt, width))
    u = chirp_phase(M, dt, beta, t0)
    R = u.conj()[:, None] * C * u[None, :]
    return _check_psd(hermitian(R), "chirp covariance")


def white_noise(M, sigma2=1.0, seed=None, dt=1.0):
    """Circular complex Gaussian noise with E|n[k]|^2 = sigma2."""
    if not sigma2 > 0:
        raise InvalidModel("sigma2 must be positive")
    rng = np.random.default_rng(seed)
    scale = np.sqrt(sigma2 / 2.0)
    z = scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
    return Signal(z, dt)


@dataclass(frozen=True)
class CovarianceModel:
    """One of the three signal classes plus its parameters.

    ``params`` keys: stationary -> ``psd``; self-similar -> ``hurst``,
    ``sigma2``; chirp -> ``beta``, ``width``, ``sigma2``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def realize(self, M, dt=1.0):
        p = dict(self.params)
        if self.kind == "stationary":
            psd = p.get("psd")
            if psd is None:
                psd = lorentzian_psd(M)
            if len(psd) != M:
                raise InvalidModel("psd length does not match M")
            return make_circulant_covariance(psd)
        if self.kind == "self-similar":
            return make_fbm_covariance(
                M, dt, p["hurst"], p.get("sigma2", 1.0), p.get("t0", 0.0)
            )
        if self.kind == "chirp":
            return make_chirp_covariance(
                M, dt, p["beta"], p.get("width", 4 * dt), p.get("sigma2", 1.0)
            )
        raise InvalidModel(f"unknown covariance kind {self.kind!r}")
