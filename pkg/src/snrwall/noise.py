"""White and colored circularly-symmetric Gaussian noise.

Three ways of coloring are provided:

* ``ar1_noise`` runs the AR(1) recursion directly,
* ``cholesky_colored_noise`` mixes independent receiver streams with a
  Cholesky factor of a target receiver covariance (no time correlation),
* ``psd_shaped_noise`` shapes a white frequency-domain basis by the square
  root of a target PSD and returns to the time domain with an IDFT.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import lfilter

from .model import HermitianCovariance, SignalModelParams, statistical_signal_covariance

__all__ = [
    "NotPositiveDefiniteError",
    "NoiseModel",
    "CorrelationModel",
    "white_noise",
    "ar1_noise",
    "ar1_covariance",
    "ar1_autocorrelation",
    "cholesky_colored_noise",
    "psd_shaped_noise",
    "psd_of_ar1",
    "write_diagnostic_csv",
]

SPECTRUM_RTOL = 1e-9
_UNIT_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """Coloring target has no Cholesky factor."""


def _check_variance(variance):
    if not variance > 0:
        raise ValueError(f"noise variance must be positive, got {variance}")


def _check_ar1(a):
    if not abs(a) < 1:
        raise ValueError(f"AR(1) coefficient must satisfy |a| < 1, got {a}")


def _complex_normal(rng, shape, variance):
    # interleaved (re, im) pairs viewed as complex
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    z *= math.sqrt(variance / 2.0)
    return z.view(np.complex128)[..., 0]


def white_noise(length: int, variance: float, seed=None) -> np.ndarray:
    """i.i.d. CN(0, variance) samples; real and imaginary parts each carry half."""
    if length < 1:
        raise ValueError("length must be at least 1")
    _check_variance(variance)
    return _complex_normal(np.random.default_rng(seed), int(length), variance)


def ar1_noise(length: int, a: float, variance: float, seed=None) -> np.ndarray:
    """eta(n) = a * eta(n-1) + eps(n), started in the stationary distribution.

    The innovation variance is ``variance * (1 - a**2)`` so that every sample,
    including the first, has power ``variance``.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    _check_ar1(a)
    _check_variance(variance)
    rng = np.random.default_rng(seed)
    drive = _complex_normal(rng, int(length), variance * (1.0 - a * a))
    drive[0] *= 1.0 / math.sqrt(1.0 - a * a)
    return lfilter([1.0], [1.0, -a], drive)


def ar1_autocorrelation(a: float, lags, variance: float = 1.0) -> np.ndarray:
    _check_ar1(a)
    return variance * np.power(float(a), np.abs(np.asarray(lags)))


def ar1_covariance(smoothing: int, a: float, variance: float = 1.0) -> HermitianCovariance:
    """(Q+1) x (Q+1) covariance with entries ``variance * a**|i-j|``."""
    _check_ar1(a)
    if smoothing < 0:
        raise ValueError("smoothing Q must be nonnegative")
    return HermitianCovariance(toeplitz(ar1_autocorrelation(a, np.arange(smoothing + 1), variance)))


def cholesky_colored_noise(target, length: int, seed=None) -> np.ndarray:
    """Receiver-correlated noise, shape ``(p, length)``.

    With ``R = L L^H`` the output at each time is ``L w(n)`` for independent
    unit white vectors ``w(n)``, so the cross-receiver covariance is ``R``
    while different time instants stay independent.
    """
    r = target.matrix if isinstance(target, HermitianCovariance) else np.asarray(target, dtype=np.complex128)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("coloring target must be square")
    if length < 1:
        raise ValueError("length must be at least 1")
    try:
        lower = np.linalg.cholesky(r)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"coloring target is not positive definite: {exc}") from exc
    w = _complex_normal(np.random.default_rng(seed), (r.shape[0], int(length)), 1.0)
    return lower @ w


def psd_of_ar1(a: float, num_freqs: int, innovation_variance: float | None = None) -> np.ndarray:
    """AR(1) power spectrum on ``num_freqs`` uniform frequencies in [0, 2*pi).

    Defaults the innovation variance to ``1 - a**2`` (unit process power), so
    the grid mean of the returned values is the process variance.
    """
    _check_ar1(a)
    if innovation_variance is None:
        innovation_variance = 1.0 - a * a
    omega = 2.0 * np.pi * np.arange(num_freqs) / num_freqs
    return innovation_variance / np.abs(1.0 - a * np.exp(-1j * omega)) ** 2


def _spectrum_from_autocorrelation(r, length):
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size == 0:
        raise ValueError("autocorrelation must be a non-empty 1-D sequence")
    k = r.size - 1
    if 2 * k >= length:
        raise ValueError(f"autocorrelation with {r.size} lags needs length > {2 * k}, got {length}")
    c = np.zeros(length)
    c[: k + 1] = r
    if k:
        c[-k:] = r[1:][::-1]
    return np.fft.fft(c).real


def psd_shaped_noise(target, length: int, variance: float, seed=None) -> np.ndarray:
    """Gaussian noise with a prescribed spectrum, via the IDFT.

    ``target`` is either a scalar AR(1) coefficient or a real autocorrelation
    sequence ``r[0], r[1], ...`` (two-sided, even). A unit white complex
    basis in the frequency domain is multiplied by ``sqrt(PSD)``, transformed
    with the IDFT and rescaled so that ``mean(|x|**2) == variance`` exactly.
    The resulting process is circular in time with period ``length``.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    _check_variance(variance)
    if np.ndim(target) == 0:
        spectrum = psd_of_ar1(float(target), int(length))
    else:
        spectrum = _spectrum_from_autocorrelation(target, int(length))
    peak = float(np.max(np.abs(spectrum)))
    if peak == 0 or np.min(spectrum) < -SPECTRUM_RTOL * peak:
        raise ValueError("target spectrum has negative entries")
    spectrum = np.clip(spectrum, 0.0, None)

    basis = _complex_normal(np.random.default_rng(seed), int(length), 1.0)
    x = np.fft.ifft(basis * np.sqrt(spectrum))
    power = float(np.mean(np.abs(x) ** 2))
    return x * math.sqrt(variance / power)


def write_diagnostic_csv(path, index, values, index_name: str = "frequency") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([index_name, "value"])
        for i, v in zip(index, values):
            w.writerow([f"{float(i):.17g}", f"{float(v):.17g}"])


@dataclass(frozen=True)
class NoiseModel:
    """Noise description used by the Monte Carlo engine.

    ``kind`` selects the generator: ``white``, ``ar1`` (per-receiver AR(1),
    produced by ``psd_shaped_noise`` or the ``recursive`` filter) or
    ``receiver_correlated`` (Cholesky mixing across receivers with the
    covariance ``target``).
    """

    kind: Literal["white", "ar1", "receiver_correlated"] = "white"
    variance: float = 1.0
    coefficient: float = 0.0
    target: np.ndarray | None = None
    method: Literal["psd", "recursive"] = "psd"

    def __post_init__(self):
        if self.kind not in ("white", "ar1", "receiver_correlated"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.method not in ("psd", "recursive"):
            raise ValueError(f"unknown AR(1) method {self.method!r}")
        _check_variance(self.variance)
        if self.kind == "ar1":
            _check_ar1(self.coefficient)
        if self.kind == "receiver_correlated":
            if self.target is None:
                raise ValueError("receiver_correlated noise needs a target covariance")
            cov = HermitianCovariance(self.target)
            diag = np.real(np.diag(cov.matrix))
            if not np.allclose(diag, self.variance, rtol=1e-12, atol=0):
                raise ValueError("target covariance must have equal diagonal entries equal to the variance")
            object.__setattr__(self, "target", cov.matrix)

    @classmethod
    def white(cls, variance: float = 1.0) -> "NoiseModel":
        return cls("white", variance)

    @classmethod
    def ar1(cls, a: float, variance: float = 1.0, method: str = "psd") -> "NoiseModel":
        return cls("ar1", variance, coefficient=a, method=method)

    @classmethod
    def receiver_correlated(cls, target) -> "NoiseModel":
        if isinstance(target, HermitianCovariance):
            target = target.matrix
        target = np.asarray(target, dtype=np.complex128)
        return cls("receiver_correlated", float(np.real(target[0, 0])), target=target)

    @classmethod
    def two_receiver(cls, rho: complex, variance: float = 1.0) -> "NoiseModel":
        """Two receivers whose noises have correlation coefficient ``rho``."""
        return cls.receiver_correlated(variance * np.array([[1.0, rho], [np.conj(rho), 1.0]]))

    def generate(self, receivers: int, length: int, seed=None) -> np.ndarray:
        """Noise for ``receivers`` streams of ``length`` samples, shape ``(p, N)``."""
        rng = np.random.default_rng(seed)
        if self.kind == "white":
            return _complex_normal(rng, (int(receivers), int(length)), self.variance)
        if self.kind == "receiver_correlated":
            if receivers != self.target.shape[0]:
                raise ValueError(
                    f"coloring target is {self.target.shape[0]}x{self.target.shape[0]} "
                    f"but {receivers} receivers were requested"
                )
            return cholesky_colored_noise(self.target, length, seed=rng)
        if self.method == "recursive":
            rows = [ar1_noise(length, self.coefficient, self.variance, seed=rng) for _ in range(receivers)]
        else:
            rows = [psd_shaped_noise(self.coefficient, length, self.variance, seed=rng) for _ in range(receivers)]
        return np.vstack(rows)

    def statistical_covariance(self, receivers: int, smoothing: int) -> HermitianCovariance:
        """Covariance of the stacked noise vector for ``p`` receivers and ``Q``."""
        eye_t = np.eye(smoothing + 1)
        if self.kind == "white":
            return HermitianCovariance(self.variance * np.eye(receivers * (smoothing + 1)))
        if self.kind == "receiver_correlated":
            if receivers != self.target.shape[0]:
                raise ValueError("receiver count does not match the coloring target")
            return HermitianCovariance(np.kron(self.target, eye_t))
        block = ar1_covariance(smoothing, self.coefficient, self.variance).matrix
        return HermitianCovariance(np.kron(np.eye(receivers), block))


def _normalize(cov) -> np.ndarray:
    a = cov.matrix if isinstance(cov, HermitianCovariance) else np.asarray(cov, dtype=np.complex128)
    d = np.sqrt(np.real(np.diag(a)))
    if np.any(d <= 0):
        raise ValueError("cannot normalize a covariance with a zero diagonal entry")
    return a / np.outer(d, d)


@dataclass(frozen=True)
class CorrelationModel:
    """Normalized correlation coefficients of signal and noise.

    ``signal_corr`` is rho^s, ``noise_corr_h1`` the noise correlation when the
    signal is present and ``noise_corr_h0`` the (possibly different) noise
    correlation when it is absent.
    """

    signal_corr: np.ndarray
    noise_corr_h1: np.ndarray
    noise_corr_h0: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signal_corr, dtype=float)
        if np.iscomplexobj(self.signal_corr) and np.any(np.imag(self.signal_corr) != 0):
            raise ValueError("signal correlation must be real")
        mats = [s, np.asarray(self.noise_corr_h1, dtype=np.complex128), np.asarray(self.noise_corr_h0, dtype=np.complex128)]
        g = s.shape[0]
        for name, m in zip(("signal_corr", "noise_corr_h1", "noise_corr_h0"), mats):
            if m.shape != (g, g):
                raise ValueError(f"{name} must be {g}x{g}, got {m.shape}")
            if np.max(np.abs(np.diag(m) - 1.0)) > _UNIT_TOL:
                raise ValueError(f"{name} must have unit diagonal")
            if np.max(np.abs(m)) > 1.0 + _UNIT_TOL:
                raise ValueError(f"{name} entries must have modulus at most 1")
            if np.max(np.abs(m - m.conj().T)) > _UNIT_TOL:
                raise ValueError(f"{name} must be Hermitian")
        if np.min(s) < -_UNIT_TOL:
            raise ValueError("signal correlation coefficients must be nonnegative")
        for name, m in zip(("signal_corr", "noise_corr_h1", "noise_corr_h0"), mats):
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @property
    def dimension(self) -> int:
        return self.signal_corr.shape[0]

    @classmethod
    def from_covariances(cls, signal_cov, noise_cov_h1, noise_cov_h0) -> "CorrelationModel":
        return cls(np.real(_normalize(signal_cov)), _normalize(noise_cov_h1), _normalize(noise_cov_h0))

    @classmethod
    def for_scenario(
        cls,
        params: SignalModelParams,
        h0_noise: NoiseModel,
        h1_noise: NoiseModel | None = None,
    ) -> "CorrelationModel":
        """Correlation model of a simulation scenario; H1 noise defaults to white."""
        h1_noise = h1_noise or NoiseModel.white(h0_noise.variance)
        p, q = params.receivers, params.smoothing
        unit = SignalModelParams(params.oversampling, 1.0, p, q)
        return cls(
            statistical_signal_covariance(unit).matrix.real,
            _normalize(h1_noise.statistical_covariance(p, q)),
            _normalize(h0_noise.statistical_covariance(p, q)),
        )
