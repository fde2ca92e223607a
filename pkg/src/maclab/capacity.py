"""Constellation-constrained mutual information for the two-user Gaussian MAC.

Model: ``y = x1 + x2 + z`` with ``z ~ CN(0, sigma2)``. All estimators are
plain Monte-Carlo averages over noise draws, taken in fixed-size chunks
that each own a private random stream, so the result depends only on
``(inputs, seed, n)`` and not on how many workers evaluated the chunks.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, ValidationError
from .rng import default_seed, stream

CHUNK = 8192


@dataclass(frozen=True)
class NoiseModel:
    """Complex Gaussian noise of total variance ``sigma2`` (2 = unit per dimension)."""

    sigma2: float = 2.0
    seed: int = None

    def __post_init__(self):
        if not (self.sigma2 > 0 and np.isfinite(self.sigma2)):
            raise ValidationError("sigma2", f"noise variance must be positive, got {self.sigma2}")
        if self.seed is None:
            object.__setattr__(self, "seed", default_seed())


@dataclass(frozen=True)
class McEstimate:
    """A Monte-Carlo mean with its standard error.

    ``n_samples == 0`` marks an exact (closed-form) value.
    """

    value: float
    n_samples: int
    std_error: float
    seed: int = None

    def __add__(self, other):
        return McEstimate(
            self.value + other.value,
            min(self.n_samples, other.n_samples),
            float(np.hypot(self.std_error, other.std_error)),
            self.seed,
        )

    def __sub__(self, other):
        return McEstimate(
            self.value - other.value,
            min(self.n_samples, other.n_samples),
            float(np.hypot(self.std_error, other.std_error)),
            self.seed,
        )

    @classmethod
    def exact(cls, value):
        return cls(float(value), 0, 0.0, None)


@dataclass(frozen=True)
class CapacityRegion:
    """Pentagon ``R1 <= r1, R2 <= r2, R1 + R2 <= sum``."""

    r1_max: McEstimate
    r2_max: McEstimate
    sum_max: McEstimate

    @property
    def corners(self):
        r1, r2, s = self.r1_max.value, self.r2_max.value, self.sum_max.value
        r1, r2, s = max(r1, 0.0), max(r2, 0.0), max(s, 0.0)
        a = min(r2, max(s - r1, 0.0))
        b = min(r1, max(s - r2, 0.0))
        return np.array([(0.0, 0.0), (r1, 0.0), (r1, a), (b, r2), (0.0, r2)])


def snr_scale(snr_db, sigma2=2.0):
    """Amplitude factor that takes a unit-energy alphabet to ``SNR = P / sigma2``."""
    return float(np.sqrt(sigma2 * 10.0 ** (snr_db / 10.0)))


def at_snr(c, snr_db, sigma2=2.0):
    """Rescale ``c`` so that its average energy over ``sigma2`` equals the SNR."""
    return c.with_energy(sigma2 * 10.0 ** (snr_db / 10.0))


def _check_n(n):
    n = int(n)
    if n < 1000:
        raise ValidationError("samples", f"need at least 1000 samples, got {n}")
    return n


def _noise(rng, m, sigma2):
    g = rng.standard_normal((m, 2))
    return np.sqrt(sigma2 / 2.0) * (g[:, 0] + 1j * g[:, 1])


def _mc(per_sample, n, seed, tag, workers=1):
    """Mean and standard error of ``per_sample(chunk_index, m)`` over ``n`` samples."""
    sizes = [CHUNK] * (n // CHUNK)
    if n % CHUNK:
        sizes.append(n % CHUNK)
    jobs = list(enumerate(sizes))
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda j: per_sample(*j), jobs))
    else:
        parts = [per_sample(*j) for j in jobs]
    v = np.concatenate(parts)
    return McEstimate(float(v.mean()), n, float(v.std(ddof=1) / np.sqrt(n)), seed)


def _log2_sum_exp(d, z, sigma2):
    """``log2 sum_j exp(-(|d_kj + z|^2 - |z|^2) / sigma2)`` for every sample and k.

    The exponent is ``-(|d|^2 + 2 Re(d conj z)) / sigma2``, which is at most
    ``|z|^2 / sigma2``. ``d`` always contains the zero difference of a point
    with itself, so each sum is at least one and never underflows.
    """
    e = -(np.abs(d) ** 2)[None] - 2.0 * (d.real[None] * z.real[:, None, None] + d.imag[None] * z.imag[:, None, None])
    return np.log2(np.exp(e / sigma2).sum(axis=2))


def _log2_ratio(diff_num, diff_den, z, sigma2):
    """Per-sample mean over k of ``log2(sum_j e^{-|d_kj+z|^2/s2} / sum_i e^{-|e_ki+z|^2/s2})``."""
    return (_log2_sum_exp(diff_num, z, sigma2) - _log2_sum_exp(diff_den, z, sigma2)).mean(axis=1)


def _canonical(points, tol=1e-12):
    """Rotate so the first nonzero point lies on the positive real axis."""
    nz = np.flatnonzero(np.abs(points) > tol)
    if len(nz) == 0:
        return points
    p = points[nz[0]]
    return points * (np.conj(p) / abs(p))


def mi_conditional(c1, noise=None, n=100_000, workers=1):
    """Estimate ``I(x1 : y | x2)`` for a uniform input on ``c1``.

    Once the other user is known the channel is point-to-point, so this is
    the AWGN constellation capacity of ``c1``. The value does not depend on
    an overall rotation of ``c1``; the alphabet is put in a canonical
    orientation first so that rotated copies use identical arithmetic.

    Parameters
    ----------
    c1 : Constellation
        Alphabet at its operating energy (see :func:`at_snr`).
    noise : NoiseModel
    n : int
        Number of noise draws, at least 1000.

    Returns
    -------
    McEstimate
        Bits per channel use.
    """
    noise = noise or NoiseModel()
    n = _check_n(n)
    p = _canonical(c1.points)
    d = p[:, None] - p[None, :]
    n1 = len(p)

    def chunk(j, m):
        z = _noise(stream(noise.seed, "conditional", j), m, noise.sigma2)
        return np.log2(n1) - _log2_sum_exp(d, z, noise.sigma2).mean(axis=1)

    return _mc(chunk, n, noise.seed, "conditional", workers)


def mi_marginal(c1, c2, noise=None, n=100_000, workers=1):
    """Estimate ``I(x2 : y)``, user 2's rate when ``x1 + z`` is treated as noise.

    Parameters
    ----------
    c1, c2 : Constellation
        Alphabets at their operating energy. The relative rotation between
        them matters here, unlike in :func:`mi_conditional`.
    noise : NoiseModel
        Calls with the same seed reuse the same noise draws, which makes
        comparisons between angles low-variance (common random numbers).
    n : int

    Returns
    -------
    McEstimate
    """
    noise = noise or NoiseModel()
    n = _check_n(n)
    x1, x2 = c1.points, c2.points
    n1, n2 = len(x1), len(x2)
    s = (x1[:, None] + x2[None, :]).ravel()
    d_num = s[:, None] - s[None, :]
    # denominator only involves user 1's points, indexed by k1 of each k
    d1 = x1[:, None] - x1[None, :]
    d_den = np.repeat(d1, n2, axis=0)

    def chunk(j, m):
        z = _noise(stream(noise.seed, "marginal", j), m, noise.sigma2)
        return np.log2(n2) - _log2_ratio(d_num, d_den, z, noise.sigma2)

    return _mc(chunk, n, noise.seed, "marginal", workers)


def mi_random_phase(c1, c2, noise=None, n=100_000, workers=1):
    """``I(x2 : y)`` averaged over a uniform random phase applied to ``c2``.

    A fresh phase is drawn with every noise sample.
    """
    noise = noise or NoiseModel()
    n = _check_n(n)
    x1, x2 = c1.points, c2.points
    n1, n2 = len(x1), len(x2)
    d1 = (x1[:, None] - x1[None, :])
    d2 = (x2[:, None] - x2[None, :])
    # index k = (k1, k2) against j = (i1, i2)
    a1 = np.repeat(np.repeat(d1, n2, axis=0), n2, axis=1)
    a2 = np.tile(d2, (n1, n1))
    d_den = np.repeat(d1, n2, axis=0)

    def chunk(j, m):
        rng = stream(noise.seed, "random-phase", j)
        z = _noise(rng, m, noise.sigma2)
        phi = rng.uniform(0.0, 2 * np.pi, m)
        # per-sample difference sets, shifted by the noise
        zz = z[:, None, None]
        a = -(np.abs(a1[None] + np.exp(1j * phi)[:, None, None] * a2[None] + zz) ** 2 - np.abs(zz) ** 2)
        num = np.log2(np.exp(a / noise.sigma2).sum(axis=2))
        r = (num - _log2_sum_exp(d_den, z, noise.sigma2)).mean(axis=1)
        return np.log2(n2) - r

    return _mc(chunk, n, noise.seed, "random-phase", workers)


def capacity_region(c1, c2, noise=None, n=100_000, workers=1):
    """Pentagon of rate pairs allowed by the three mutual-information bounds.

    ``sum_max = I(x1 : y | x2) + I(x2 : y)``.
    """
    noise = noise or NoiseModel()
    r1 = mi_conditional(c1, noise, n, workers)
    r2 = mi_conditional(c2, noise, n, workers)
    m2 = mi_marginal(c1, c2, noise, n, workers)
    return CapacityRegion(r1, r2, r1 + m2)


def gaussian_region(rho):
    """Region for Gaussian inputs at SNR ``rho`` (linear), exact.

    The individual bounds are ``log2(1 + rho/2)`` and the sum bound is
    ``log2(1 + rho)``.
    """
    rho = float(rho)
    if not rho >= 0:
        raise ValidationError("snr", f"SNR must be nonnegative, got {rho}")
    r = McEstimate.exact(np.log2(1 + rho / 2))
    return CapacityRegion(r, r, McEstimate.exact(np.log2(1 + rho)))


def staircase_rates(rho):
    """Successive-decoding corner: ``(log2(1 + rho/2), log2(1 + rho/(2 + rho)))``.

    The two terms add up to the sum bound ``log2(1 + rho)``.
    """
    rho = float(rho)
    if not rho >= 0:
        raise ValidationError("snr", f"SNR must be nonnegative, got {rho}")
    return float(np.log2(1 + rho / 2)), float(np.log2(1 + rho / (2 + rho)))


def real_gaussian_rate(rho):
    """Per-user rate ``0.5 log2(1 + rho)`` when each user owns one real dimension."""
    rho = float(rho)
    if not rho >= 0:
        raise ValidationError("snr", f"SNR must be nonnegative, got {rho}")
    return 0.5 * float(np.log2(1 + rho))
