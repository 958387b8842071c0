"""Closed-form bounds on the MME statistic and the resulting SNR-wall bound.

Under H0 the asymptotic statistic is bounded from below by evaluating the
noise covariance on two probe vectors (Rayleigh quotients) built around its
largest off-diagonal correlation. Under H1 it is bounded from above with
Gershgorin intervals. The SNR below which the H1 upper bound does not exceed
the H0 lower bound is a lower bound on the SNR-wall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import HermitianCovariance, Snr
from .noise import CorrelationModel

__all__ = [
    "BoundValidityError",
    "BoundReport",
    "h0_statistic_lower_bound",
    "largest_offdiagonal",
    "correlation_probes",
    "rayleigh_eigen_bounds",
    "gershgorin_bounds",
    "max_offdiag_row_sum",
    "validity_condition",
    "h1_statistic_upper_bound",
    "nonrobustness_inequality",
    "kappa_max_receiver",
    "kappa_max_time",
    "kappa_max_combined",
    "kappa_max",
    "snr_wall_lower_bound",
    "wall_bound",
    "general_wall_bound",
]

PROBE_NORM_TOL = 1e-9
_DIAG_RTOL = 1e-12


class BoundValidityError(ValueError):
    """The Gershgorin lower bound on lambda_min is not positive at this SNR."""


def _matrix(m) -> np.ndarray:
    if isinstance(m, HermitianCovariance):
        return m.matrix
    return np.asarray(m, dtype=np.complex128)


def _snr(snr) -> float:
    value = snr.linear if isinstance(snr, Snr) else float(snr)
    if not value >= 0:
        raise ValueError(f"SNR must be nonnegative, got {value}")
    return value


def h0_statistic_lower_bound(rho_max: float) -> float:
    """alpha_max = (1 + |rho|) / (1 - |rho|) for the largest H0 noise correlation."""
    if not 0 <= rho_max < 1:
        raise ValueError(f"largest noise correlation must lie in [0, 1), got {rho_max}")
    return (1.0 + rho_max) / (1.0 - rho_max)


def largest_offdiagonal(matrix) -> tuple[float, tuple[int, int]]:
    """Modulus and position of the largest off-diagonal entry.

    Ties go to the first occurrence in a row-major scan, which always lies in
    the upper triangle.
    """
    a = _matrix(matrix)
    g = a.shape[0]
    if g < 2:
        raise ValueError("a 1x1 matrix has no off-diagonal entries")
    mag = np.abs(a).astype(float)
    np.fill_diagonal(mag, -1.0)
    flat = int(np.argmax(mag))
    i, j = divmod(flat, g)
    return float(mag[i, j]), (i, j)


def correlation_probes(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Unit probes (e_i +/- e^{-j phi} e_j) / sqrt(2) around the largest correlation."""
    a = _matrix(matrix)
    _, (i, j) = largest_offdiagonal(a)
    phase = np.exp(-1j * np.angle(a[i, j]))
    z1 = np.zeros(a.shape[0], dtype=np.complex128)
    z2 = np.zeros(a.shape[0], dtype=np.complex128)
    z1[i] = z2[i] = 1.0 / math.sqrt(2.0)
    z1[j] = phase / math.sqrt(2.0)
    z2[j] = -phase / math.sqrt(2.0)
    return z1, z2


def rayleigh_eigen_bounds(matrix, z1=None, z2=None) -> tuple[float, float]:
    """(z1^H R z1, z2^H R z2): a lower bound on lambda_max and an upper bound on lambda_min.

    Without explicit probes, :func:`correlation_probes` is used.
    """
    a = _matrix(matrix)
    if z1 is None and z2 is None:
        z1, z2 = correlation_probes(a)
    elif z1 is None or z2 is None:
        raise ValueError("give both probe vectors or neither")
    out = []
    for z in (z1, z2):
        z = np.asarray(z, dtype=np.complex128)
        if abs(np.linalg.norm(z) - 1.0) > PROBE_NORM_TOL:
            raise ValueError("probe vectors must have unit norm")
        out.append(float(np.real(np.vdot(z, a @ z))))
    return out[0], out[1]


def gershgorin_bounds(matrix) -> tuple[float, float]:
    """(upper bound on lambda_max, lower bound on lambda_min) of a Hermitian matrix
    whose diagonal entries are all equal. The lower bound may be negative."""
    a = _matrix(matrix)
    diag = np.real(np.diag(a))
    scale = max(1.0, float(np.max(np.abs(diag))))
    if np.max(np.abs(diag - diag[0])) > _DIAG_RTOL * scale:
        raise ValueError("Gershgorin bounds here need equal diagonal entries")
    radius = max_offdiag_row_sum(a)
    return float(diag[0] + radius), float(diag[0] - radius)


def max_offdiag_row_sum(matrix) -> float:
    a = np.abs(_matrix(matrix))
    return float(np.max(a.sum(axis=1) - np.diag(a))) if a.shape[0] > 1 else 0.0


def _h1_radius(corr: CorrelationModel, snr: float) -> float:
    return max_offdiag_row_sum(corr.noise_corr_h1 + snr * corr.signal_corr)


def validity_condition(corr: CorrelationModel, snr) -> bool:
    """True iff 1 + SNR exceeds the largest H1 Gershgorin radius (normalized)."""
    s = _snr(snr)
    return 1.0 + s > _h1_radius(corr, s)


def h1_statistic_upper_bound(corr: CorrelationModel, snr) -> float | None:
    """Gershgorin bound on the asymptotic H1 statistic; ``None`` where it is undefined."""
    s = _snr(snr)
    radius = _h1_radius(corr, s)
    if not 1.0 + s > radius:
        return None
    return (1.0 + s + radius) / (1.0 + s - radius)


def nonrobustness_inequality(corr: CorrelationModel, snr, rho_max: float) -> bool:
    """Whether the H1 upper bound falls to or below the H0 lower bound at ``snr``."""
    if not 0 < rho_max < 1:
        raise ValueError(f"largest H0 noise correlation must lie in (0, 1), got {rho_max}")
    upper = h1_statistic_upper_bound(corr, snr)
    if upper is None:
        raise BoundValidityError(f"H1 bound undefined at SNR={_snr(snr)}: Gershgorin radius reaches 1 + SNR")
    return upper <= h0_statistic_lower_bound(rho_max)


def kappa_max_receiver(receivers: int) -> float:
    if receivers < 1:
        raise ValueError("need at least one receiver")
    return float(receivers - 1)


def kappa_max_time(smoothing: int, oversampling: int) -> float:
    """Largest off-diagonal row sum of the normalized single-receiver R_s."""
    q, m = int(smoothing), int(oversampling)
    if q < 0 or m < 1:
        raise ValueError("need Q >= 0 and M >= 1")
    if -(-q // 2) >= m:
        return float(m - 1)
    if q % 2 == 0:
        return q - (q * q + 2 * q) / (4 * m)
    return q - (q + 1) ** 2 / (4 * m)


def kappa_max_combined(receivers: int, kappa_time: float) -> float:
    if receivers < 1 or kappa_time < 0:
        raise ValueError("need p >= 1 and a nonnegative time kappa")
    return receivers - 1 + receivers * kappa_time


def kappa_max(receivers: int, smoothing: int, oversampling: int) -> float:
    """kappa_max for synchronized receivers and rectangular-pulse signal."""
    if smoothing == 0:
        return kappa_max_receiver(receivers)
    kt = kappa_max_time(smoothing, oversampling)
    return kt if receivers == 1 else kappa_max_combined(receivers, kt)


@dataclass(frozen=True)
class BoundReport:
    kappa_max: float
    alpha_max: float
    validity_snr_cap: float | None
    wall_linear: float | None
    wall_db: float | None
    defined: bool
    reason: str | None = None

    def to_dict(self) -> dict:
        cap = self.validity_snr_cap
        return {
            "kappa_max": self.kappa_max,
            "alpha_max": self.alpha_max,
            "validity_snr_cap": "unbounded" if cap is not None and math.isinf(cap) else cap,
            "wall_linear": self.wall_linear,
            "wall_db": self.wall_db,
            "defined": self.defined,
        }


def snr_wall_lower_bound(alpha_max: float, kappa_max: float) -> BoundReport:
    """SNR-wall lower bound for white H1 noise.

    The detector is non-robust for
    ``SNR <= (alpha - 1) / (1 + kappa + alpha * (kappa - 1))`` as long as
    ``SNR < 1 / (kappa - 1)`` (no cap when kappa == 1). For kappa < 1 no
    bound is reported.
    """
    if not alpha_max > 1:
        raise ValueError(f"alpha_max must exceed 1, got {alpha_max}")
    if kappa_max < 0:
        raise ValueError("kappa_max must be nonnegative")
    if kappa_max < 1:
        return BoundReport(kappa_max, alpha_max, None, None, None, False, f"kappa_max = {kappa_max:g} < 1")
    cap = math.inf if kappa_max == 1 else 1.0 / (kappa_max - 1.0)
    wall = (alpha_max - 1.0) / (1.0 + kappa_max + alpha_max * (kappa_max - 1.0))
    defined = wall < cap
    reason = None if defined else f"bound {wall:.6g} violates the validity cap {cap:.6g}"
    return BoundReport(kappa_max, alpha_max, cap, wall, 10.0 * math.log10(wall), defined, reason)


def wall_bound(receivers: int, smoothing: int, oversampling: int, rho_max: float) -> BoundReport:
    """Bound for the receiver, time or combined correlation scenario.

    Out-of-range ``rho_max`` yields an undefined report instead of an error.
    """
    kappa = kappa_max(receivers, smoothing, oversampling)
    if not 0 < rho_max < 1:
        alpha = h0_statistic_lower_bound(rho_max) if 0 <= rho_max < 1 else math.inf
        return BoundReport(kappa, alpha, None, None, None, False, f"rho_max = {rho_max:g} outside (0, 1)")
    return snr_wall_lower_bound(h0_statistic_lower_bound(rho_max), kappa)


def general_wall_bound(
    corr: CorrelationModel,
    rho_max: float | None = None,
    snr_max: float = 100.0,
    grid: int = 4001,
    tol: float = 1e-12,
) -> float:
    """Largest SNR_t with the general non-robustness inequality holding on [0, SNR_t].

    Works for correlated H1 noise as well. The inequality is scanned on a
    uniform grid over ``[0, snr_max]`` and the first transition is refined by
    bisection. Returns 0.0 when it fails already at SNR = 0 and ``snr_max``
    when it never fails on the grid. SNRs where the H1 bound is undefined
    end the non-robust region.
    """
    if rho_max is None:
        rho_max, _ = largest_offdiagonal(corr.noise_corr_h0)

    def holds(s):
        try:
            return nonrobustness_inequality(corr, s, rho_max)
        except BoundValidityError:
            return False

    if not holds(0.0):
        return 0.0
    pts = np.linspace(0.0, snr_max, grid)
    lo = 0.0
    for s in pts[1:]:
        if not holds(s):
            hi = float(s)
            break
        lo = float(s)
    else:
        return float(snr_max)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return lo
