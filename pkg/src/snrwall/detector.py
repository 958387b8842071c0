"""Maximum-minimum eigenvalue (MME) detector."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import HERMITIAN_RTOL, HermitianCovariance, SampleBlock, VectorSeries, build_smoothed_vectors

__all__ = [
    "DEFAULT_LAMBDA_FLOOR",
    "Hypothesis",
    "EigenSpectrum",
    "Decision",
    "sample_covariance",
    "hermitian_eigenvalues",
    "mme_statistic",
    "mme_from_block",
    "decide",
]

# relative to lambda_max; below it lambda_min counts as zero
DEFAULT_LAMBDA_FLOOR = 1e-12


class Hypothesis(str, enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class EigenSpectrum:
    """Real eigenvalues sorted in descending order."""

    values: np.ndarray

    @property
    def dimension(self) -> int:
        return self.values.size

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class Decision:
    statistic: float
    threshold: float
    verdict: Hypothesis


def sample_covariance(vectors) -> HermitianCovariance:
    """Average of x(n) x(n)^H over the series (divisor N - Q).

    Accepts a :class:`VectorSeries` or an array whose rows are the vectors.
    """
    x = vectors.vectors if isinstance(vectors, VectorSeries) else np.asarray(vectors, dtype=np.complex128)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.shape[0] == 0:
        raise ValueError("cannot estimate a covariance from an empty series")
    r = x.T @ x.conj() / x.shape[0]
    return HermitianCovariance(0.5 * (r + r.conj().T), kind="sample")


def _as_matrix(matrix) -> np.ndarray:
    if isinstance(matrix, HermitianCovariance):
        return matrix.matrix
    return np.asarray(matrix, dtype=np.complex128)


def hermitian_eigenvalues(matrix) -> EigenSpectrum:
    a = _as_matrix(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigenvalues need a square matrix")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian")
    return EigenSpectrum(np.linalg.eigvalsh(a)[::-1].copy())


def mme_statistic(matrix, lambda_floor: float = DEFAULT_LAMBDA_FLOOR) -> float:
    """lambda_max / lambda_min, or ``math.inf`` when lambda_min is (numerically) zero."""
    spec = hermitian_eigenvalues(matrix)
    lo, hi = spec.min, spec.max
    if hi <= 0 or lo <= lambda_floor * hi:
        return math.inf
    return max(hi / lo, 1.0)


def mme_from_block(block: SampleBlock, smoothing: int, lambda_floor: float = DEFAULT_LAMBDA_FLOOR) -> float:
    """Statistic of a raw sample block: smooth, estimate the covariance, take the ratio."""
    return mme_statistic(sample_covariance(build_smoothed_vectors(block, smoothing)), lambda_floor)


def decide(statistic: float, threshold: float) -> Decision:
    """Decide H1 when the statistic reaches the threshold, H0 otherwise."""
    if not threshold > 1:
        raise ValueError(f"threshold must exceed 1, got {threshold}")
    verdict = Hypothesis.H1 if statistic >= threshold else Hypothesis.H0
    return Decision(float(statistic), float(threshold), verdict)
