"""Signal model shared by the detector, noise and simulation modules.

Samples from ``p`` synchronized receivers are stacked into fusion-center
vectors of dimension ``g = p * (Q + 1)``::

    x(n) = [x_1(n), x_1(n-1), ..., x_1(n-Q), x_2(n), ..., x_p(n-Q)]^T

The primary-user signal is oversampled BPSK with a rectangular pulse, so its
autocorrelation is a triangle of half-width ``M`` samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import toeplitz

__all__ = [
    "HERMITIAN_RTOL",
    "PSD_RTOL",
    "SampleBlock",
    "VectorSeries",
    "HermitianCovariance",
    "SignalModelParams",
    "Snr",
    "generate_bpsk_signal",
    "signal_autocorrelation",
    "build_smoothed_vectors",
    "statistical_signal_covariance",
]

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class SampleBlock:
    """Complex baseband samples of ``p`` receivers, shape ``(p, N)``."""

    samples: np.ndarray
    sample_period: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.complex128)
        if x.ndim == 1:
            x = x[np.newaxis, :]
        if x.ndim != 2:
            raise ValueError(f"samples must be 2-D (receivers, N), got shape {x.shape}")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("need at least one receiver and one sample")
        object.__setattr__(self, "samples", x)

    @property
    def receivers(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class VectorSeries:
    """Smoothed fusion-center vectors x(n) for n = Q, ..., N-1.

    Row ``k`` of ``vectors`` holds x(Q + k).
    """

    vectors: np.ndarray
    receivers: int
    smoothing: int

    @property
    def dimension(self) -> int:
        return self.receivers * (self.smoothing + 1)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __getitem__(self, k):
        return self.vectors[k]


@dataclass(frozen=True)
class HermitianCovariance:
    """A g x g Hermitian PSD matrix tagged as ``statistical`` or ``sample``.

    The stored matrix is made exactly Hermitian on construction; inputs that
    are not Hermitian within ``HERMITIAN_RTOL`` or that have an eigenvalue
    below ``-PSD_RTOL * max(1, lambda_max)`` are rejected.
    """

    matrix: np.ndarray
    kind: Literal["statistical", "sample"] = "statistical"

    def __post_init__(self):
        if self.kind not in ("statistical", "sample"):
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        a = np.array(self.matrix, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"covariance must be a non-empty square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_RTOL * scale:
            raise ValueError("matrix is not Hermitian")
        a = 0.5 * (a + a.conj().T)
        eig = np.linalg.eigvalsh(a)
        if eig[0] < -PSD_RTOL * max(1.0, eig[-1]):
            raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {eig[0]:.3e})")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SignalModelParams:
    oversampling: int = 4
    symbol_variance: float = 1.0
    receivers: int = 1
    smoothing: int = 0

    def __post_init__(self):
        if int(self.oversampling) != self.oversampling or self.oversampling < 1:
            raise ValueError("oversampling M must be a positive integer")
        if self.symbol_variance < 0:
            raise ValueError("symbol variance must be nonnegative")
        if int(self.receivers) != self.receivers or self.receivers < 1:
            raise ValueError("need at least one receiver")
        if int(self.smoothing) != self.smoothing or self.smoothing < 0:
            raise ValueError("smoothing Q must be a nonnegative integer")

    @property
    def dimension(self) -> int:
        return self.receivers * (self.smoothing + 1)


@dataclass(frozen=True)
class Snr:
    """Signal-to-noise power ratio sigma_s^2 / sigma_eta^2."""

    linear: float = field(default=0.0)

    def __post_init__(self):
        if not self.linear >= 0:
            raise ValueError(f"SNR must be nonnegative, got {self.linear}")

    @classmethod
    def from_db(cls, db: float) -> "Snr":
        return cls(10.0 ** (db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.linear) if self.linear > 0 else -math.inf


def generate_bpsk_signal(num_symbols: int, params: SignalModelParams, seed=None) -> np.ndarray:
    """Oversampled BPSK with a rectangular pulse.

    Draws ``num_symbols`` i.i.d. antipodal symbols of power ``symbol_variance``
    and holds each for ``oversampling`` samples, starting at sample 0. The
    result is complex with zero imaginary part.
    """
    if num_symbols < 1:
        raise ValueError("num_symbols must be at least 1")
    rng = np.random.default_rng(seed)
    amp = math.sqrt(params.symbol_variance)
    symbols = amp * (2.0 * rng.integers(0, 2, size=num_symbols) - 1.0)
    return np.repeat(symbols, params.oversampling).astype(np.complex128)


def signal_autocorrelation(lag: int, params: SignalModelParams) -> float:
    k = abs(lag)
    if k >= params.oversampling:
        return 0.0
    return params.symbol_variance * (1.0 - k / params.oversampling)


def build_smoothed_vectors(block: SampleBlock, smoothing: int) -> VectorSeries:
    """Stack ``smoothing + 1`` consecutive samples of every receiver.

    Within a receiver the newest sample comes first, receivers are laid out
    one after another. Returns ``N - Q`` vectors.
    """
    q = int(smoothing)
    if q < 0:
        raise ValueError("smoothing Q must be nonnegative")
    p, n = block.samples.shape
    if n <= q:
        raise ValueError(f"need N > Q, got N={n}, Q={q}")
    count = n - q
    out = np.empty((count, p * (q + 1)), dtype=np.complex128)
    for i in range(p):
        x = block.samples[i]
        for t in range(q + 1):
            out[:, i * (q + 1) + t] = x[q - t : n - t]
    return VectorSeries(out, receivers=p, smoothing=q)


def statistical_signal_covariance(params: SignalModelParams) -> HermitianCovariance:
    """R_s for synchronized receivers.

    Every receiver sees the same s(n), so each (receiver, receiver) block is
    the same Toeplitz matrix of the triangular autocorrelation.
    """
    row = [signal_autocorrelation(k, params) for k in range(params.smoothing + 1)]
    block = toeplitz(row)
    full = np.kron(np.ones((params.receivers, params.receivers)), block)
    return HermitianCovariance(full, kind="statistical")
