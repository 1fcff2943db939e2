"""Classical transforms as group-averaged quantities.

DFT convention throughout: unnormalized forward transform
``X[k] = sum_n x[n] exp(-i 2 pi k n / M)``. Time-domain inner products carry
the sample spacing, ``<x, y> = dt * sum x conj(y)``; continuous Fourier
transforms use ``psi_hat(w) = int psi(t) exp(-i w t) dt``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy import integrate
from sklearn.base import BaseEstimator, TransformerMixin

from .estimator import group_averaged_operator, sorted_eigh
from .exceptions import InvalidInput, NotAdmissible, NumericalFailure, ScaleOutOfRange
from .groups import dihedral_group
from .model import Signal, as_signal

MEXICAN_HAT_NORM = 2.0 / (np.sqrt(3.0) * np.pi**0.25)
WAVELET_KINDS = ("mexican-hat", "morlet", "gaussian")
ADMISSIBILITY_TOL = 1e-8
NORM_TOL = 0.02


# ----------------------------------------------------------------- spectra


def autocorrelation(x):
    """Cyclic autocorrelation R[k] = dt * sum_n x[n+k mod M] conj(x[n])."""
    sig = as_signal(x)
    X = np.fft.fft(sig.samples)
    return sig.dt * np.fft.ifft(np.abs(X) ** 2)


def periodogram(x):
    """|DFT_k(x)|^2 * dt / M.

    Equals ``dt`` times the cyclic-estimator eigenvalues, and
    ``DFT(autocorrelation(x)) == M * periodogram(x)``.
    """
    sig = as_signal(x)
    return np.abs(np.fft.fft(sig.samples)) ** 2 * sig.dt / sig.M


def _real_samples(x):
    sig = as_signal(x)
    if np.max(np.abs(sig.samples.imag)) >= 1e-12:
        raise InvalidInput("DCT spectrum needs a real-valued signal")
    return sig.samples.real.copy()


def dct_matrix(M):
    """Orthonormal DCT-II basis; row k is s_k cos(pi k (n + 1/2) / M)."""
    return scipy.fft.dct(np.eye(M), type=2, norm="ortho", axis=0)


def even_dihedral_estimate(x):
    """Dihedral estimator of the half-sample symmetric extension, on its even part.

    The length-2M extension ``[x, Jx]`` lies in the reflection-even subspace;
    compressing the length-2M dihedral estimator onto that subspace gives an
    M x M operator diagonalized by the DCT-II basis.

    Returns
    -------
    operator, eigenvalues (descending), eigenvectors
    """
    xr = _real_samples(x)
    M = xr.shape[0]
    ext = np.concatenate([xr, xr[::-1]])
    F = group_averaged_operator(ext, dihedral_group(2 * M))
    V = np.vstack([np.eye(M), np.eye(M)[::-1]]) / np.sqrt(2.0)
    F_even = V.T @ F @ V
    F_even = 0.5 * (F_even + F_even.conj().T)
    w, U = sorted_eigh(F_even)
    return F_even, w, U


def dct_spectrum(x, check=True):
    """Eigen-spectrum of the dihedral estimator, in DCT-II index order.

    Value k is ``y_k^2 / (2M)`` with ``y = dct(x, type=2)`` unnormalized. With
    ``check`` (only for M <= 16) the DCT-II basis must diagonalize the
    even-part dihedral operator to 1e-9.
    """
    xr = _real_samples(x)
    M = xr.shape[0]
    y = scipy.fft.dct(xr, type=2)
    spec = y**2 / (2.0 * M)
    if check and M <= 16:
        F_even, _, _ = even_dihedral_estimate(xr)
        C = dct_matrix(M)
        D = C @ F_even.real @ C.T
        scale = max(float(np.max(np.abs(D))), np.finfo(float).tiny)
        off = D - np.diag(np.diag(D))
        if np.max(np.abs(off)) > 1e-9 * scale or np.max(np.abs(np.diag(D) - spec)) > 1e-9 * scale:
            raise NumericalFailure("DCT-II basis does not diagonalize the dihedral estimator")
    return spec


# --------------------------------------------------------------- ambiguity


@dataclass
class AmbiguitySurface:
    """values[k, l]: delay k*dt, Doppler l*df with df = 1/(M dt)."""

    values: np.ndarray
    dt: float
    df: float

    @property
    def energy(self):
        return float(np.sum(np.abs(self.values) ** 2))


def ambiguity(x):
    """A[k, l] = dt * sum_n x[n] conj(x[n-k mod M]) exp(-i 2 pi l n / M)."""
    sig = as_signal(x)
    s = sig.samples
    M = sig.M
    n = np.arange(M)
    lagged = s[(n[None, :] - n[:, None]) % M]
    A = sig.dt * np.fft.fft(s[None, :] * lagged.conj(), axis=1)
    return AmbiguitySurface(A, sig.dt, 1.0 / (M * sig.dt))


def moyal_constant(M):
    """sum |A|^2 / |x|^4 for the discrete ambiguity surface (dt-weighted norm)."""
    return float(M)


# ---------------------------------------------------------------- wavelets


@dataclass(frozen=True)
class Wavelet:
    """Closed-form mother wavelet with unit L2 norm (times ``amplitude``).

    ``gaussian`` is the plain window; it has nonzero mean and is kept to
    exercise the admissibility check.
    """

    kind: str = "mexican-hat"
    omega0: float = 6.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in WAVELET_KINDS:
            raise InvalidInput(f"unknown wavelet {self.kind!r}; choose from {WAVELET_KINDS}")

    @property
    def is_complex(self):
        return self.kind == "morlet"

    def time(self, t):
        t = np.asarray(t, dtype=float)
        g = np.exp(-0.5 * t**2)
        if self.kind == "mexican-hat":
            return self.amplitude * MEXICAN_HAT_NORM * (1.0 - t**2) * g
        if self.kind == "morlet":
            corr = np.exp(-0.5 * self.omega0**2)
            return self.amplitude * np.pi**-0.25 * (np.exp(1j * self.omega0 * t) - corr) * g
        return self.amplitude * np.pi**-0.25 * g

    def freq(self, w):
        w = np.asarray(w, dtype=float)
        root = np.sqrt(2.0 * np.pi)
        if self.kind == "mexican-hat":
            return self.amplitude * MEXICAN_HAT_NORM * root * w**2 * np.exp(-0.5 * w**2)
        if self.kind == "morlet":
            corr = np.exp(-0.5 * self.omega0**2)
            return (self.amplitude * np.pi**-0.25 * root
                    * (np.exp(-0.5 * (w - self.omega0) ** 2) - corr * np.exp(-0.5 * w**2)))
        return self.amplitude * np.pi**-0.25 * root * np.exp(-0.5 * w**2)

    @property
    def norm(self):
        return abs(self.amplitude)

    def default_omega_max(self):
        return 12.0 if self.kind != "morlet" else self.omega0 + 12.0

    def check_admissible(self):
        peak = np.max(np.abs(self.freq(np.linspace(0.0, self.default_omega_max(), 2001))))
        if abs(self.freq(0.0)) > ADMISSIBILITY_TOL * peak:
            raise NotAdmissible(
                f"{self.kind} wavelet has psi_hat(0) = {float(abs(self.freq(0.0))):.3e}; "
                "the Calderon integral diverges"
            )


@dataclass
class CalderonConstant:
    value: float
    error_estimate: float
    coarse_value: float
    omega_max: float
    n_quad: int
    energy_fraction: float


def _midpoint(f, upper, n):
    h = upper / n
    w = (np.arange(n) + 0.5) * h
    return float(np.sum(f(w)) * h)


def calderon_constant(psi, omega_max=None, n_quad=4096):
    """Midpoint-rule value of int_0^omega_max |psi_hat(w)|^2 / w dw.

    The error estimate is the Richardson difference between ``n_quad`` and
    ``2 * n_quad`` points; ``value`` is the fine-grid result.
    """
    if n_quad < 64:
        raise InvalidInput("n_quad must be at least 64")
    psi.check_admissible()
    omega_max = psi.default_omega_max() if omega_max is None else float(omega_max)

    def energy(w):
        return np.abs(psi.freq(w)) ** 2

    total = integrate.quad(energy, 0.0, np.inf, limit=200)[0]
    hints = [psi.omega0] if 0.0 < psi.omega0 < omega_max else None
    inside = integrate.quad(energy, 0.0, omega_max, limit=200, points=hints)[0]
    fraction = inside / total if total > 0 else 0.0
    if fraction < 0.9999:
        raise InvalidInput(
            f"omega_max={omega_max} covers only {fraction:.6f} of the wavelet's spectral energy"
        )

    def integrand(w):
        return energy(w) / w

    coarse = _midpoint(integrand, omega_max, n_quad)
    fine = _midpoint(integrand, omega_max, 2 * n_quad)
    return CalderonConstant(fine, abs(fine - coarse) / 3.0, coarse, omega_max, n_quad, fraction)


def log_scales(a0, octaves, voices):
    """Cell midpoints of a log grid: a0 * 2^((j + 1/2)/voices), j < octaves*voices."""
    if voices < 1 or octaves <= 0 or a0 <= 0:
        raise InvalidInput("need a0 > 0, octaves > 0 and voices >= 1")
    J = int(round(octaves * voices))
    return a0 * 2.0 ** ((np.arange(J) + 0.5) / voices)


def default_scales(M, dt, voices=8):
    """The full resolvable range [2 dt, M dt / 4] on a log grid."""
    octaves = np.log2((M * dt / 4.0) / (2.0 * dt))
    return log_scales(2.0 * dt, octaves, voices)


def check_scales(scales, M, dt):
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0 or np.any(scales <= 0):
        raise InvalidInput("scales must be a nonempty vector of positive reals")
    if np.any(np.diff(scales) <= 0):
        raise InvalidInput("scales must be strictly ascending")
    lo, hi = 2.0 * dt, M * dt / 4.0
    if scales[0] < lo * (1 - 1e-12) or scales[-1] > hi * (1 + 1e-12):
        raise ScaleOutOfRange(
            f"scales must lie in [{lo:g}, {hi:g}] (2 dt .. M dt / 4), got "
            f"[{scales[0]:g}, {scales[-1]:g}]"
        )
    return scales


def sample_atom(psi, a, M, dt):
    """a^{-1/2} psi(t / a) on the cyclic grid, periodized over the window."""
    m = np.arange(M)
    lag = np.where(m < (M + 1) // 2, m, m - M) * dt
    period = M * dt
    n_img = int(np.ceil(12.0 * a / period)) + 1
    h = np.zeros(M, dtype=np.complex128)
    for k in range(-n_img, n_img + 1):
        h += psi.time((lag + k * period) / a)
    return h / np.sqrt(a)


@dataclass
class Scalogram:
    values: np.ndarray
    scales: np.ndarray
    dt: float
    voices: float = None
    coefficients: np.ndarray = field(default=None, repr=False)
    atom_norms: np.ndarray = None

    @property
    def positions(self):
        return self.dt * np.arange(self.values.shape[1])

    @property
    def resolved(self):
        """Scales whose sampled atom keeps its L2 norm to within 2%."""
        return np.abs(self.atom_norms - 1.0) <= NORM_TOL

    def argmax(self):
        j, n = np.unravel_index(np.argmax(self.values), self.values.shape)
        return int(j), int(n)


def _atom_spectra(psi, scales, M, dt):
    atoms = np.stack([sample_atom(psi, a, M, dt) for a in scales])
    norms = np.sqrt(dt * np.sum(np.abs(atoms) ** 2, axis=1)) / psi.norm
    return atoms, np.fft.fft(atoms, axis=1), norms


def wavelet_coefficients(x, psi, scales):
    """W[j, n] = <x, psi_{a_j, b_n}> with cyclic boundary handling."""
    sig = as_signal(x)
    scales = check_scales(scales, sig.M, sig.dt)
    _, H, norms = _atom_spectra(psi, scales, sig.M, sig.dt)
    X = np.fft.fft(sig.samples)
    W = sig.dt * np.fft.ifft(X[None, :] * H.conj(), axis=1)
    return W, norms


def scalogram(x, psi, scales, voices=None):
    """|<x, psi_{a,b}>|^2 over scales a_j and every grid position b_n."""
    sig = as_signal(x)
    W, norms = wavelet_coefficients(sig, psi, scales)
    return Scalogram(np.abs(W) ** 2, np.asarray(scales, float), sig.dt, voices, W, norms)


@dataclass
class Reconstruction:
    signal: np.ndarray
    rel_error: float
    in_band: bool
    c_psi: float


def log_weights(scales):
    """Cell widths in ln(a); exactly ln2 / voices on a uniform log grid."""
    if len(scales) == 1:
        return np.array([np.log(2.0)])
    return np.gradient(np.log(scales))


def calderon_reconstruct(x, psi, scales, tol=0.05):
    """Discrete resolution of identity with weights d(ln a) * db / a.

    For a complex (analytic) wavelet only positive frequencies are
    reproduced, so a real input is recovered as twice the real part.
    """
    sig = as_signal(x)
    scales = check_scales(scales, sig.M, sig.dt)
    c = calderon_constant(psi).value
    _, H, _ = _atom_spectra(psi, scales, sig.M, sig.dt)
    X = np.fft.fft(sig.samples)
    weights = log_weights(scales) / scales
    # sum_j w_j sum_n W[j, n] psi_{a_j, b_n} dt, evaluated per frequency bin
    mult = sig.dt**2 * np.sum(weights[:, None] * np.abs(H) ** 2, axis=0)
    rec = np.fft.ifft(X * mult) / c
    if psi.is_complex and np.max(np.abs(sig.samples.imag)) == 0:
        rec = 2.0 * rec.real
    norm = np.linalg.norm(sig.samples)
    err = float(np.linalg.norm(rec - sig.samples) / norm) if norm > 0 else 0.0
    return Reconstruction(rec, err, err <= tol, c)


# ----------------------------------------------------- estimator wrappers


class Periodogram(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping signal rows to their periodograms."""

    def __init__(self, dt=1.0):
        self.dt = dt

    def fit(self, X, y=None):
        X = np.atleast_2d(np.asarray(X))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.complex128))
        return np.abs(np.fft.fft(X, axis=1)) ** 2 * self.dt / X.shape[1]


class ScalogramTransformer(TransformerMixin, BaseEstimator):
    """Rows of signals to (n_signals, n_scales, M) scalograms."""

    def __init__(self, wavelet="mexican-hat", scales=None, voices=8, dt=1.0):
        self.wavelet = wavelet
        self.scales = scales
        self.voices = voices
        self.dt = dt

    def fit(self, X, y=None):
        X = np.atleast_2d(np.asarray(X))
        M = X.shape[1]
        self.n_features_in_ = M
        self.wavelet_ = self.wavelet if isinstance(self.wavelet, Wavelet) else Wavelet(self.wavelet)
        scales = default_scales(M, self.dt, self.voices) if self.scales is None else self.scales
        self.scales_ = check_scales(scales, M, self.dt)
        return self

    def transform(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.complex128))
        return np.stack([
            scalogram(Signal(row, self.dt), self.wavelet_, self.scales_).values for row in X
        ])

