"""Finite complex constellations, sum alphabets and distance distributions."""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

KINDS = ("PSK", "PAM", "QAM", "custom")

# absolute tolerance on each real coordinate when comparing points
TAU_EQ = 1e-9


class ValidationError(ValueError):
    """Raised when an input is outside the supported domain.

    Parameters
    ----------
    code : str
        Short machine-readable reason, e.g. ``"psk-size"``.
    message : str
        Human readable explanation.
    """

    def __init__(self, code, message):
        super().__init__(f"[{code}] {message}")
        self.code = code


def _is_pow2(m):
    return m >= 1 and (m & (m - 1)) == 0


def _freeze(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Constellation:
    """An ordered finite set of complex points.

    Parameters
    ----------
    points : array_like of complex
        Constellation points, in a fixed order.
    kind : {"PSK", "PAM", "QAM", "custom"}
        Family label. Only ``custom`` may hold a single point.
    theta : float
        Accumulated rotation (radians) applied since construction.
    """

    points: np.ndarray
    kind: str = "custom"
    theta: float = 0.0
    _check: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = _freeze(np.atleast_1d(self.points).ravel())
        object.__setattr__(self, "points", pts)
        if self.kind not in KINDS:
            raise ValidationError("kind", f"unknown constellation kind {self.kind!r}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("finite", "points must be finite")
        if len(pts) < 1 or (len(pts) < 2 and self.kind != "custom"):
            raise ValidationError("size", "need at least two points")
        if self._check and len(_first_of_cluster(pts, TAU_EQ)) != len(pts):
            raise ValidationError("distinct", "points must be distinct")

    @property
    def M(self):
        return len(self.points)

    @property
    def avg_energy(self):
        return float(np.mean(np.abs(self.points) ** 2))

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"Constellation(kind={self.kind!r}, M={self.M}, theta={self.theta:.6g})"

    def rotate(self, theta):
        return rotate(self, theta)

    def scaled(self, factor):
        """Return a copy with every point multiplied by the real ``factor``."""
        return Constellation(self.points * factor, self.kind, self.theta, _check=False)

    def with_energy(self, energy):
        """Return a copy rescaled to the given average energy."""
        e = self.avg_energy
        if e == 0:
            return self
        return self.scaled(np.sqrt(energy / e))

    def to_record(self):
        """Serialize to a JSON-friendly dict ``{kind, M, theta, points}``."""
        return {
            "kind": self.kind,
            "M": self.M,
            "theta": float(self.theta),
            "points": [[float(p.real), float(p.imag)] for p in self.points],
        }

    @classmethod
    def from_record(cls, rec):
        pts = np.array([complex(re, im) for re, im in rec["points"]])
        if "M" in rec and int(rec["M"]) != len(pts):
            raise ValidationError("record", "M does not match the number of points")
        return cls(pts, rec.get("kind", "custom"), float(rec.get("theta", 0.0)))


def make_constellation(kind, M, unit_energy=True):
    """Build a standard constellation.

    Parameters
    ----------
    kind : {"PSK", "PAM", "QAM"}
    M : int
        Number of points. PSK and QAM need a power of two.
    unit_energy : bool
        Scale to unit average energy.

    Returns
    -------
    Constellation
        PSK points are ordered by ascending phase starting at 1, PAM by
        ascending amplitude, QAM by real part then imaginary part.

    Examples
    --------
    >>> make_constellation("PAM", 4).points.real * np.sqrt(5)
    array([-3., -1.,  1.,  3.])
    """
    kind = str(kind).upper() if str(kind).lower() != "custom" else "custom"
    M = int(M)
    if M < 2:
        raise ValidationError("size", f"M must be at least 2, got {M}")
    if kind == "PSK":
        if not _is_pow2(M):
            raise ValidationError("psk-size", f"PSK needs M a power of 2, got {M}")
        n = np.arange(M)
        pts = np.exp(2j * np.pi * n / M)
        # exact values on the axes keep sums like 1 + (-1) exactly zero
        pts.real[np.abs(pts.real) < 1e-15] = 0.0
        pts.imag[np.abs(pts.imag) < 1e-15] = 0.0
    elif kind == "PAM":
        pts = (2.0 * np.arange(M) - (M - 1)).astype(complex)
    elif kind == "QAM":
        if not _is_pow2(M) or M < 4:
            raise ValidationError("qam-size", f"QAM needs M a power of 2 and >= 4, got {M}")
        b = int(np.log2(M))
        ni, nq = 2 ** ((b + 1) // 2), 2 ** (b // 2)
        li = 2.0 * np.arange(ni) - (ni - 1)
        lq = 2.0 * np.arange(nq) - (nq - 1)
        pts = (li[:, None] + 1j * lq[None, :]).ravel()
    else:
        raise ValidationError("kind", f"cannot construct kind {kind!r}; build a custom one from points")
    c = Constellation(pts, kind)
    return c.with_energy(1.0) if unit_energy else c


def rotate(c, theta):
    """Multiply every point by ``exp(i theta)``."""
    theta = float(theta)
    if not np.isfinite(theta):
        raise ValidationError("finite", "rotation angle must be finite")
    return Constellation(c.points * np.exp(1j * theta), c.kind, c.theta + theta, _check=False)


@dataclass(frozen=True, eq=False)
class SumAlphabet:
    """Image of the adder map ``(x1, x2) -> x1 + x2``.

    Attributes
    ----------
    index1, index2 : ndarray of int
        Index pair of every entry, ``index1`` varying slowest.
    points : ndarray of complex
        Sum point of every entry, length ``N1 * N2``.
    distinct_points : ndarray of complex
        Points after merging those equal within the tolerance.
    """

    index1: np.ndarray
    index2: np.ndarray
    points: np.ndarray
    distinct_points: np.ndarray

    @property
    def entries(self):
        return list(zip(self.index1.tolist(), self.index2.tolist(), self.points.tolist()))

    def __len__(self):
        return len(self.points)


def sum_alphabet(c1, c2, tol=TAU_EQ):
    """All pairwise sums of two constellations."""
    n1, n2 = len(c1), len(c2)
    i1, i2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    i1, i2 = i1.ravel(), i2.ravel()
    pts = c1.points[i1] + c2.points[i2]
    pts = np.asarray(pts)
    first = _first_of_cluster(pts, tol)
    return SumAlphabet(i1, i2, _freeze(pts), _freeze(pts[first]))


def _first_of_cluster(pts, tol):
    """Indices of the first member of each cluster of (within ``tol``) equal points."""
    n = len(pts)
    taken = np.zeros(n, dtype=bool)
    keep = []
    for i in range(n):
        if taken[i]:
            continue
        keep.append(i)
        taken |= (np.abs(pts.real - pts[i].real) <= tol) & (np.abs(pts.imag - pts[i].imag) <= tol)
    return np.array(keep, dtype=int)


def is_uniquely_decodable(c1, c2, tol=TAU_EQ):
    """True when every pair ``(x1, x2)`` gives a different sum."""
    s = sum_alphabet(c1, c2, tol)
    return len(s.distinct_points) == len(c1) * len(c2)


@dataclass(frozen=True, eq=False)
class DistanceDistribution:
    """Sorted multiset of squared pairwise distances."""

    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def allclose(self, other, atol=1e-12):
        return len(self) == len(other) and np.allclose(self.values, other.values, rtol=0, atol=atol)

    @property
    def dmin2(self):
        return float(self.values[0]) if len(self.values) else np.inf


def distance_distribution(c):
    """Squared Euclidean distances between all unordered point pairs."""
    p = c.points
    d = [abs(p[i] - p[j]) ** 2 for i, j in combinations(range(len(p)), 2)]
    v = np.sort(np.array(d, dtype=float))
    v.setflags(write=False)
    return DistanceDistribution(v)
