"""Experiment drivers: discretization rate, uncertainty, replacement sweep, noise floor.

Every Monte-Carlo driver derives trial ``t``'s generator from
``SeedSequence(seed, spawn_key=(t,))``, so serial and parallel runs agree.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .estimator import group_averaged_estimate, group_averaged_operator, subspace_alignment
from .exceptions import Aliasing, EdgeEnergy, InvalidInput
from .groups import cyclic_group
from .model import Signal, as_signal
from .transforms import Wavelet, check_scales, log_weights, wavelet_coefficients

FORMAT_VERSION = "adlab-study v1"
EDGE_FRACTION = 0.10
EDGE_ENERGY_TOL = 1e-6
UNCERTAINTY_FLOOR = 0.48


def trial_rng(seed, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def complex_noise(rng, M, sigma2=1.0):
    return np.sqrt(sigma2 / 2.0) * (rng.standard_normal(M) + 1j * rng.standard_normal(M))


def loglog_slope(x, y):
    """Ordinary least-squares slope of log y on log x, with the RMS fit residual."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return float(coef[0]), resid


# ------------------------------------------------------- discretization


@dataclass(frozen=True)
class ToneSignal:
    """x(t) = sum_k amps[k] exp(i 2 pi freqs[k] t) on the circle [0, duration)."""

    freqs: tuple
    amps: tuple
    duration: float = 1.0

    def __post_init__(self):
        if len(self.freqs) != len(self.amps) or not self.freqs:
            raise InvalidInput("freqs and amps must be nonempty and the same length")
        if not self.duration > 0:
            raise InvalidInput("duration must be positive")

    @property
    def band_edge(self):
        return float(np.max(np.abs(self.freqs)))

    def sample(self, M):
        t = self.duration * np.arange(M) / M
        f = np.asarray(self.freqs, float)
        a = np.asarray(self.amps, dtype=np.complex128)
        return np.exp(2j * np.pi * t[:, None] * f[None, :]) @ a

    def cyclic_autocorrelation(self, tau):
        """r(tau) = (1/T) int_0^T x((t + tau) mod T) conj(x(t)) dt, closed form."""
        T = self.duration
        tau = np.mod(np.asarray(tau, float), T)
        w = 2.0 * np.pi * np.asarray(self.freqs, float)
        a = np.asarray(self.amps, dtype=np.complex128)
        out = np.zeros(tau.shape, dtype=np.complex128)
        for k in range(len(w)):
            for l in range(len(w)):
                dw = w[k] - w[l]
                head = _expint(dw, 0.0, T - tau)
                tail = _expint(dw, T - tau, T)
                out += a[k] * np.conj(a[l]) * (
                    np.exp(1j * w[k] * tau) * head + np.exp(1j * w[k] * (tau - T)) * tail
                )
        return out / T


# off-grid tones whose frequency difference is not an integer multiple of 1/T;
# integer differences can cancel the leading O(1/M) term
DEFAULT_TONES = ToneSignal((1.7, 5.3), (1.0, 0.7))


def _expint(dw, lo, hi):
    """int_lo^hi exp(i dw t) dt, elementwise in lo/hi."""
    if dw == 0.0:
        return np.asarray(hi - lo, dtype=np.complex128)
    return (np.exp(1j * dw * hi) - np.exp(1j * dw * lo)) / (1j * dw)


@dataclass
class ConvergenceResult:
    sizes: list
    errors: list
    slope: float
    fit_residual: float
    sup_errors: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def discretization_error(signal, M):
    """Relative Frobenius distance between F_{Z_M}(x_M) / M and the sampled kernel.

    Both matrices are circulant, so the Frobenius norms are computed on
    their first columns (each lag appears M times in either norm).
    """
    x = signal.sample(M)
    # (F_{Z_M}(x))[i, j] = (1/M) sum_n x[n + i - j] conj(x[n]): the discrete cyclic autocorrelation
    r_disc = np.fft.ifft(np.abs(np.fft.fft(x)) ** 2) / M
    lags = signal.duration * np.arange(M) / M
    r_cont = signal.cyclic_autocorrelation(lags)
    diff = r_disc - r_cont
    fro = float(np.linalg.norm(diff) / np.linalg.norm(r_cont))
    sup = float(np.max(np.abs(diff)) / np.max(np.abs(r_cont)))
    return fro, sup


def discretization_study(signal, M_list):
    """Error of the cyclic estimator against the continuous kernel as M grows."""
    M_list = [int(m) for m in M_list]
    if len(M_list) < 4 or any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise InvalidInput("need at least four strictly ascending grid sizes")
    nyquist = M_list[0] / (2.0 * signal.duration)
    if signal.band_edge >= nyquist:
        raise Aliasing(f"tone at {signal.band_edge:g} is not below the Nyquist frequency "
                       f"{nyquist:g} of the coarsest grid M = {M_list[0]}")
    fro, sup = zip(*(discretization_error(signal, M) for M in M_list))
    if min(fro) > 0:
        slope, resid = loglog_slope(M_list, fro)
    else:
        slope, resid = float("nan"), float("nan")
    return ConvergenceResult(M_list, list(fro), slope, resid, list(sup))


# ---------------------------------------------------------- uncertainty


@dataclass
class UncertaintyResult:
    delta_t: float
    delta_omega: float
    product: float
    grid_artifact: bool

    def to_dict(self):
        return asdict(self)


def _centered_std(grid, density):
    mean = np.sum(grid * density)
    return float(np.sqrt(np.sum((grid - mean) ** 2 * density)))


def _edge_fraction(density, frac=EDGE_FRACTION):
    n = max(1, int(np.ceil(frac * density.shape[0])))
    return float((np.sum(density[:n]) + np.sum(density[-n:])) / np.sum(density))


def uncertainty_check(x):
    """Centered time and angular-frequency spreads of a signal and their product."""
    sig = as_signal(x)
    p_t = np.abs(sig.samples) ** 2
    if p_t.sum() == 0:
        raise InvalidInput("signal is identically zero")
    X = np.fft.fftshift(np.fft.fft(sig.samples))
    p_w = np.abs(X) ** 2
    if _edge_fraction(p_t) > EDGE_ENERGY_TOL:
        raise EdgeEnergy("signal has non-negligible energy in the outer time window")
    if _edge_fraction(p_w) > EDGE_ENERGY_TOL:
        raise EdgeEnergy("signal has non-negligible energy near the band edge")
    omega = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(sig.M, sig.dt))
    dt_spread = _centered_std(sig.times, p_t / p_t.sum())
    dw_spread = _centered_std(omega, p_w / p_w.sum())
    prod = dt_spread * dw_spread
    return UncertaintyResult(dt_spread, dw_spread, prod, prod < UNCERTAINTY_FLOOR)


def gaussian_pulse(M, dt=1.0, center=None, width=None, beta=0.0):
    """exp(-(t - c)^2 / (2 w^2) + i pi beta (t - c)^2) on t = n dt.

    The default width balances the time and frequency tails inside the
    outer-10% windows.
    """
    T = M * dt
    center = T / 2.0 if center is None else center
    if width is None:
        width = np.sqrt(0.4 * T * dt / (0.8 * np.pi))
    t = dt * np.arange(M) - center
    return Signal(np.exp(-(t**2) / (2.0 * width**2) + 1j * np.pi * beta * t**2), dt)


# ------------------------------------------------ generator commutator


def derivative_matrix(M, dt, stencil="central"):
    """Cyclic first-derivative matrix: second-order central or Fourier spectral."""
    if stencil == "central":
        D = np.zeros((M, M))
        idx = np.arange(M)
        D[idx, (idx + 1) % M] = 1.0
        D[idx, (idx - 1) % M] = -1.0
        return D / (2.0 * dt)
    if stencil == "spectral":
        k = np.fft.fftfreq(M, dt) * 2.0 * np.pi
        if M % 2 == 0:
            k[M // 2] = 0.0
        F = np.fft.fft(np.eye(M), axis=0)
        return np.fft.ifft(1j * k[:, None] * F, axis=0)
    raise InvalidInput(f"unknown stencil {stencil!r}; use 'central' or 'spectral'")


def interior_test_vectors(M, dt=1.0):
    """Smooth vectors that vanish (below 1e-17) on the outer 10% of indices."""
    T = M * dt
    t = dt * np.arange(M)
    width = T / 30.0
    vecs = []
    # modulation fixed in physical units so refinement resolves it too
    for c, w0 in ((0.5, 0.0), (0.45, 0.0), (0.55, 0.0), (0.5, 12.0 * np.pi / T)):
        vecs.append(np.exp(-((t - c * T) ** 2) / (2 * width**2) + 1j * w0 * t))
    n = int(np.ceil(EDGE_FRACTION * M))
    for v in vecs:
        v[:n] = 0.0
        v[-n:] = 0.0
    return vecs


@dataclass
class CommutatorCheck:
    M: int
    dt: float
    stencil: str
    deviation: float
    per_vector: list
    boundary_deviation: float

    def to_dict(self):
        return asdict(self)


def commutator_generator_check(M, dt=1.0, stencil="central", vectors=None):
    """max_v ||([A1, A2] + iI) v|| / ||v|| with A1 = -i D, A2 = diag(t).

    The interior vectors probe the identity away from the wrap; a vector at
    the boundary is also evaluated and reported, where the check must fail.
    """
    if M < 32:
        raise InvalidInput("generator commutator check needs M >= 32")
    D = derivative_matrix(M, dt, stencil)
    A1 = -1j * D
    A2 = np.diag(dt * np.arange(M)).astype(np.complex128)
    K = A1 @ A2 - A2 @ A1 + 1j * np.eye(M)
    vectors = interior_test_vectors(M, dt) if vectors is None else vectors
    per = [float(np.linalg.norm(K @ v) / np.linalg.norm(v)) for v in vectors]
    edge = np.zeros(M, dtype=np.complex128)
    edge[0] = edge[-1] = 1.0
    boundary = float(np.linalg.norm(K @ edge) / np.linalg.norm(edge))
    return CommutatorCheck(M, dt, stencil, max(per), per, boundary)


# --------------------------------------------------- replacement sweep


@dataclass
class ReplacementResult:
    snr_db: list
    alignment_mean: list
    alignment_sem: list
    noiseless_alignment: float
    monotone: bool
    trials: int
    M: int

    def to_dict(self):
        return asdict(self)


def grid_tone(M, k, power=1.0):
    return Signal(np.sqrt(power) * np.exp(2j * np.pi * k * np.arange(M) / M))


def replacement_snr_sweep(s, snr_db, trials=100, seed=0):
    """Mean alignment of the top cyclic-estimator eigenvector with span{s}.

    Each trial uses one noise draw scaled to every SNR (common random
    numbers), so the curve is not muddied by independent draws per point.
    """
    sig = as_signal(s)
    x = sig.samples
    if trials < 50:
        raise InvalidInput("the replacement sweep needs at least 50 trials")
    M = sig.M
    G = cyclic_group(M)
    S = (x / np.linalg.norm(x))[:, None]
    p_s = float(np.mean(np.abs(x) ** 2))
    snr_db = [float(v) for v in snr_db]
    align = np.zeros((len(snr_db), trials))
    for t in range(trials):
        n = complex_noise(trial_rng(seed, t), M)
        for i, snr in enumerate(snr_db):
            sigma = np.sqrt(p_s * 10.0 ** (-snr / 10.0))
            est = group_averaged_estimate(x + sigma * n, G)
            align[i, t] = subspace_alignment(est, S, 1)
    noiseless = subspace_alignment(group_averaged_estimate(x, G), S, 1)
    mean = align.mean(axis=1)
    sem = align.std(axis=1, ddof=1) / np.sqrt(trials)
    order = np.argsort(snr_db)
    m_sorted, s_sorted = mean[order], sem[order]
    # nondecreasing up to 3 standard errors of the difference
    monotone = bool(np.all(np.diff(m_sorted) >= -3 * np.hypot(s_sorted[1:], s_sorted[:-1])))
    return ReplacementResult(snr_db, mean.tolist(), sem.tolist(), float(noiseless),
                             monotone, trials, M)


def random_alignment_null(M, hits, trials):
    """Two-sided binomial p-value for ``hits`` correct top bins against 1/M."""
    return float(stats.binomtest(int(hits), int(trials), 1.0 / M).pvalue)


@dataclass
class CrossTermResult:
    trial_counts: list
    mean_norms: list
    slope: float
    fit_residual: float

    def to_dict(self):
        return asdict(self)


def cross_term_decay(s, trial_counts=(16, 32, 64, 128, 256, 512), repetitions=32, seed=0,
                     sigma2=1.0):
    """||mean_t (F(s+n_t) - F(s) - F(n_t))||_F versus the number of trials.

    For each repetition the running mean is read off at every count, and the
    norms are averaged over repetitions before fitting the log-log slope.
    For a single tone the cross term lives on one DFT bin, so one repetition
    gives a Rayleigh-distributed norm; many repetitions are needed.
    """
    x = as_signal(s).samples
    M = x.shape[0]
    G = cyclic_group(M)
    counts = sorted(int(c) for c in trial_counts)
    Fs = group_averaged_operator(x, G)
    norms = np.zeros((repetitions, len(counts)))
    for r in range(repetitions):
        total = np.zeros((M, M), dtype=np.complex128)
        done = 0
        for j, n_target in enumerate(counts):
            while done < n_target:
                n = complex_noise(trial_rng(seed, r * counts[-1] + done), M, sigma2)
                total += group_averaged_operator(x + n, G) - Fs - group_averaged_operator(n, G)
                done += 1
            norms[r, j] = np.linalg.norm(total / done)
    mean_norms = norms.mean(axis=0)
    slope, resid = loglog_slope(counts, mean_norms)
    return CrossTermResult(counts, mean_norms.tolist(), slope, resid)


# ------------------------------------------------------- noise floor


@dataclass
class NoiseFloorResult:
    M: int
    trials: int
    scales: list
    per_scale_power: list
    per_scale_sem: list
    per_scale_constant: bool
    omega: list
    affine_diagonal: list
    affine_slope: float
    affine_slope_band: list
    affine_expected_diagonal: list
    cyclic_diagonal: list
    cyclic_max_z: float
    cyclic_flat: bool
    omega_scaling_observed: bool
    exploratory: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _dtft(x, omega, dt):
    n = np.arange(x.shape[0])
    return np.exp(-1j * np.outer(omega, n) * dt) @ x


def affine_fourier_diagonal(n, scales, dt):
    """Fourier diagonal of sum_j w_j sum_b (rho(a_j, b) n)(rho(a_j, b) n)^H.

    rho(a, b) is dilation then cyclic translation, with dilation realized on
    the band-limited interpolant: (rho(a) n)^(w) = sqrt(a) N(a w), and zero
    where a w leaves the band. Translations over the grid only change
    phases, so the diagonal is M dt times the dilation term.
    """
    M = n.shape[0]
    omega = 2.0 * np.pi * np.fft.fftfreq(M, dt)
    band = np.pi / dt
    w = log_weights(scales) / scales  # d(ln a) / a = da / a^2
    diag = np.zeros(M)
    for a, wa in zip(scales, w):
        aw = a * omega
        inside = np.abs(aw) < band
        val = np.zeros(M)
        val[inside] = a * np.abs(_dtft(n, aw[inside], dt)) ** 2 / M
        diag += wa * val
    return omega, M * dt * diag


def affine_noise_floor_experiment(M=64, scales=None, trials=200, seed=0, sigma2=1.0,
                                  dt=1.0, wavelet="mexican-hat"):
    """Exploratory: white-noise floor under affine versus cyclic averaging."""
    if trials < 100:
        raise InvalidInput("the noise-floor experiment needs at least 100 trials")
    if scales is None:
        scales = np.geomspace(2.0 * dt, M * dt / 4.0, 9)
    scales = check_scales(scales, M, dt)
    psi = Wavelet(wavelet)
    per_scale = np.zeros((trials, scales.size))
    affine = np.zeros((trials, M))
    cyclic = np.zeros((trials, M))
    for t in range(trials):
        n = complex_noise(trial_rng(seed, t), M, sigma2)
        W, norms = wavelet_coefficients(Signal(n, dt), psi, scales)
        # divide out the periodized atom norm so every atom has unit L2 norm
        per_scale[t] = np.mean(np.abs(W) ** 2, axis=1) / norms**2
        omega, affine[t] = affine_fourier_diagonal(n, scales, dt)
        cyclic[t] = np.abs(np.fft.fft(n)) ** 2 / M
    ps_mean = per_scale.mean(axis=0)
    ps_sem = per_scale.std(axis=0, ddof=1) / np.sqrt(trials)
    # E|W|^2 = sigma2 dt for unit-norm atoms, the same at every scale
    ps_ref = sigma2 * dt
    ps_const = bool(np.all(np.abs(ps_mean - ps_ref) <= 5.0 * ps_sem + 0.02 * ps_ref))
    cyc_mean = cyclic.mean(axis=0)
    cyc_sem = cyclic.std(axis=0, ddof=1) / np.sqrt(trials)
    z = float(np.max(np.abs(cyc_mean - sigma2) / cyc_sem))
    aff_mean = affine.mean(axis=0)
    expected = np.zeros(M)
    w = log_weights(scales) / scales
    for a, wa in zip(scales, w):
        expected += wa * a * sigma2 * (np.abs(a * omega) < np.pi / dt)
    expected *= M * dt
    pos = (omega > 0) & (aff_mean > 0)
    slope, _ = loglog_slope(omega[pos], aff_mean[pos])
    band = [float(omega[pos].min()), float(omega[pos].max())]
    observed = bool(abs(slope - 1.0) <= 0.2)
    notes = [
        "exploratory: no pass/fail on the affine slope",
        "the unitary-conjugation average of white noise over a truncated scale range is "
        "sigma2 times a scale-window indicator sum, not proportional to |omega|",
        f"affine log-log slope {slope:.3f} over omega in [{band[0]:.3g}, {band[1]:.3g}] "
        f"({'matches' if observed else 'does not match'} the |omega| scaling)",
    ]
    return NoiseFloorResult(
        M, trials, scales.tolist(), ps_mean.tolist(), ps_sem.tolist(), ps_const,
        omega.tolist(), aff_mean.tolist(), slope, band, expected.tolist(),
        cyc_mean.tolist(), z, z <= 5.0, observed, True, notes,
    )
