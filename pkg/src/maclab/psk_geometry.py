"""Ring structure of the sum of two rotated M-PSK alphabets and partition distances.

With ``x(n) = exp(i 2 pi n / M)`` and ``x'(n) = exp(i theta) x(n)``, the sum
``x(n) + x'(n + m)`` lies on an outer ring ``O^m`` of radius
``2 cos(pi m / M + theta / 2)`` and ``x(n) + x'(n - m - 1)`` on an inner ring
``I^m`` of radius ``2 cos(pi (m + 1) / M - theta / 2)``, for
``m = 0 .. M/2 - 1``. Each ring carries an M-PSK-like set of points.

A two-cell partition of each alphabet induces four sub-sums
``S1^a + S2^b``; the smallest of their minimum distances (the bottleneck)
is what a trellis labelling based on the partition can guarantee.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .constellation import Constellation, ValidationError, make_constellation, rotate

TIE = 1e-9


def _check_M(M, lo=4):
    M = int(M)
    if M < lo or M & (M - 1):
        raise ValidationError("psk-size", f"M must be a power of 2 and at least {lo}, got {M}")
    return M


def reduce_angle(M, theta, tol=1e-12):
    """Map ``theta`` to the equivalent angle in (0, pi/M].

    The sum alphabet is unchanged by ``theta -> theta + 2 pi / M`` and is
    mirrored by ``theta -> 2 pi / M - theta``.

    Returns
    -------
    theta_r : float
    mirrored : bool
        True if the mirror image was taken.
    """
    period = 2 * np.pi / M
    t = float(np.mod(theta, period))
    if t < tol or period - t < tol:
        raise ValidationError("theta", "angle is a multiple of 2 pi / M; the pair is not uniquely decodable")
    if t > np.pi / M + tol:
        return period - t, True
    return min(t, np.pi / M), False


def _check_theta(M, theta, tol=1e-12):
    theta = float(theta)
    if not (0 < theta <= np.pi / M + tol):
        raise ValidationError("theta", f"theta must lie in (0, pi/M], got {theta}")
    return min(theta, np.pi / M)


def outer_radius(M, m, theta):
    return 2 * np.cos(np.pi * np.asarray(m) / M + theta / 2)


def inner_radius(M, m, theta):
    return 2 * np.cos(np.pi * (np.asarray(m) + 1) / M - theta / 2)


@dataclass(frozen=True, eq=False)
class RingStructure:
    """Concentric-ring description of ``M-PSK + exp(i theta) M-PSK``.

    Attributes
    ----------
    outer_radii, inner_radii : ndarray
        Radii of ``O^m`` and ``I^m`` for ``m = 0 .. M/2 - 1``.
    point_assignment : dict
        ``(n, n') -> (ring, m, phase)`` with ring ``"O"`` or ``"I"``.
    """

    M: int
    theta: float
    outer_radii: np.ndarray
    inner_radii: np.ndarray
    point_assignment: dict

    @property
    def n_rings(self):
        r = np.sort(np.concatenate([self.outer_radii, self.inner_radii]))
        return int(1 + np.count_nonzero(np.diff(r) > TIE))

    def radius(self, ring, m):
        return (self.outer_radii if ring == "O" else self.inner_radii)[m]

    def chain(self):
        """Radii in the interleaved order ``I^{M/2-1}, O^{M/2-1}, I^{M/2-2}, ..., O^0``."""
        h = self.M // 2
        out = []
        for m in range(h - 1, -1, -1):
            out += [self.inner_radii[m], self.outer_radii[m]]
        return np.array(out)


def ring_structure(M, theta):
    """Closed-form rings and the ring of every sum point.

    ``theta`` is first reduced to (0, pi/M]; the description refers to the
    reduced angle.
    """
    M = _check_M(M)
    theta, _ = reduce_angle(M, theta)
    h = M // 2
    m = np.arange(h)
    assign = {}
    for n in range(M):
        for n2 in range(M):
            k = (n2 - n) % M
            if k < h:
                ring, mm = "O", k
                phase = 2 * np.pi * n / M + np.pi * mm / M + theta / 2
            else:
                ring, mm = "I", M - 1 - k
                phase = 2 * np.pi * n / M - np.pi * (mm + 1) / M + theta / 2
            assign[(n, n2)] = (ring, mm, float(np.mod(phase, 2 * np.pi)))
    return RingStructure(M, theta, outer_radius(M, m, theta), inner_radius(M, m, theta), assign)


def _increasing(seq):
    d = np.diff(seq)
    return bool(np.all(d > 0)) if len(d) else True, float(d.min()) if len(d) else np.inf


def _geq(lhs, rhs, tol=1e-12):
    slack = np.atleast_1d(np.asarray(lhs) - np.asarray(rhs))
    if slack.size == 0:
        return True, np.inf
    return bool(np.all(slack >= -tol)), float(slack.min())


def verify_monotone_propositions(M, theta):
    """Evaluate the monotonicity and distance inequalities of the ring radii.

    Returns
    -------
    dict
        name -> (holds, worst_slack). Slack is the smallest increment for
        "increasing" statements and the smallest ``lhs - rhs`` for
        inequalities. Failures are reported, not raised.

    Notes
    -----
    Checked statements, with ``w = exp(i 2 pi / M)``, ``d`` the Euclidean
    distance and ``h = M/2``:

    - ``outer_minus_inner``: ``r(O^k) - r(I^k)`` increasing, k = 0..h-1
    - ``outer_minus_next_inner``: ``r(O^k) - r(I^{k+1})`` increasing, k = 0..h-2
    - ``inner_minus_next_outer``: ``r(I^k) - r(O^{k+1})`` increasing, k = 0..h-2
    - ``interleaving``: ``r(I^{h-1}) <= r(O^{h-1}) <= r(I^{h-2}) <= ... <= r(O^0)``
    - ``diagonal_vs_outer_chord``: ``d(r(I^{q-1}), r(O^q) w) >= d(r(O^q), r(O^q) w)``, q = 1..h-1
    - ``outer_chord_vs_d1``: ``d(r(O^q), r(O^q) w) >= 2 r(O^{h-1}) sin(2 pi/M)``, q = 1..h-3, M >= 8
    - ``inner_chord_vs_d2``: ``d(r(I^q), r(I^q) w) >= 2 r(I^{h-1}) sin(2 pi/M)``, q = 1..h-3, M >= 8
    - ``radial_gap_vs_d2``: ``|r(O^{q-1}) - r(I^q)| >= 2 r(I^{h-1}) sin(2 pi/M)``, q = h-1
    - ``inner_diagonal_vs_chord``: ``d(r(O^{q-1}), r(I^q) w) >= d(r(I^q), r(I^q) w)``, q = 1..h-3
    - ``inner_diagonal_vs_radial``: ``d(r(O^{q-1}), r(I^q) w) >= |r(O^{q-1}) - r(I^q)|``, q = h-1
    """
    M = _check_M(M)
    theta = _check_theta(M, theta)
    h = M // 2
    O = lambda m: outer_radius(M, m, theta)
    I = lambda m: inner_radius(M, m, theta)
    w = np.exp(2j * np.pi / M)
    k = np.arange(h)
    out = {
        "outer_minus_inner": _increasing(O(k) - I(k)),
        "outer_minus_next_inner": _increasing(O(k[:-1]) - I(k[:-1] + 1)),
        "inner_minus_next_outer": _increasing(I(k[:-1]) - O(k[:-1] + 1)),
    }
    ch = ring_structure(M, theta).chain()
    out["interleaving"] = _geq(np.diff(ch), 0.0)
    q = np.arange(1, h)
    out["diagonal_vs_outer_chord"] = _geq(np.abs(I(q - 1) - O(q) * w), np.abs(O(q) - O(q) * w))
    q3 = np.arange(1, h - 2)
    d1 = 2 * O(h - 1) * np.sin(2 * np.pi / M)
    d2 = 2 * I(h - 1) * np.sin(2 * np.pi / M)
    if M >= 8:
        out["outer_chord_vs_d1"] = _geq(np.abs(O(q3) - O(q3) * w), d1)
        out["inner_chord_vs_d2"] = _geq(np.abs(I(q3) - I(q3) * w), d2)
    qe = h - 1
    out["radial_gap_vs_d2"] = _geq(abs(O(qe - 1) - I(qe)), d2)
    out["inner_diagonal_vs_chord"] = _geq(np.abs(O(q3 - 1) - I(q3) * w), np.abs(I(q3) - I(q3) * w))
    out["inner_diagonal_vs_radial"] = _geq(abs(O(qe - 1) - I(qe) * w), abs(O(qe - 1) - I(qe)))
    return out


def angular_separation_checks(M, theta, tol=1e-9):
    """Check the phase-difference rules between sum points by direct arithmetic.

    For every pair of sum points the phase difference predicted from the
    ring indices is compared with ``arg`` of the actual points:

    - same ring ``O^m`` (or ``I^m``): ``2 pi (n - n') / M``
    - ``O^m`` vs ``I^m``: ``2 pi (n - n') / M + pi (2m + 1) / M``
    - ``O^m`` vs ``I^{m-1}``: ``2 pi (n - n') / M + 2 pi m / M``
    - ``I^m`` vs ``O^{m-1}``: ``2 pi (n - n') / M - 2 pi m / M``

    Returns
    -------
    dict
        rule name -> (all_hold, number_of_pairs_checked).
    """
    M = _check_M(M)
    theta = _check_theta(M, theta)
    h = M // 2
    x = np.exp(2j * np.pi * np.arange(M) / M)
    pt = lambda n, n2: x[n % M] + np.exp(1j * theta) * x[n2 % M]

    def same(a, b, pred):
        d = np.angle(a / b) - pred
        return abs(np.angle(np.exp(1j * d))) < tol

    res = {"same_ring": [], "outer_vs_inner": [], "outer_vs_lower_inner": [], "inner_vs_lower_outer": []}
    for m in range(h):
        for n in range(M):
            for n2 in range(M):
                base = 2 * np.pi * (n - n2) / M
                res["same_ring"].append(same(pt(n, n + m), pt(n2, n2 + m), base))
                res["same_ring"].append(same(pt(n, n - m - 1), pt(n2, n2 - m - 1), base))
                res["outer_vs_inner"].append(
                    same(pt(n, n + m), pt(n2, n2 - m - 1), base + np.pi * (2 * m + 1) / M)
                )
                if m >= 1:
                    res["outer_vs_lower_inner"].append(
                        same(pt(n, n + m), pt(n2, n2 - m), base + 2 * np.pi * m / M)
                    )
                    res["inner_vs_lower_outer"].append(
                        same(pt(n, n - m - 1), pt(n2, n2 + m - 1), base - 2 * np.pi * m / M)
                    )
    return {k: (bool(all(v)), len(v)) for k, v in res.items()}


@dataclass(frozen=True)
class Partition2:
    """Split of ``range(M)`` into two cells of equal size."""

    set_a: tuple
    set_b: tuple

    def __post_init__(self):
        a, b = tuple(sorted(int(i) for i in self.set_a)), tuple(sorted(int(i) for i in self.set_b))
        object.__setattr__(self, "set_a", a)
        object.__setattr__(self, "set_b", b)
        if set(a) & set(b):
            raise ValidationError("partition", "cells must be disjoint")
        if len(a) != len(b):
            raise ValidationError("partition", "cells must have equal size")
        if sorted(a + b) != list(range(len(a) + len(b))):
            raise ValidationError("partition", "cells must cover 0..M-1")

    @property
    def M(self):
        return len(self.set_a) + len(self.set_b)

    @property
    def cells(self):
        return (self.set_a, self.set_b)

    def labels(self):
        """0/1 cell label of each index."""
        lab = np.zeros(self.M, dtype=int)
        lab[list(self.set_b)] = 1
        return lab

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels)
        return cls(tuple(np.flatnonzero(labels == 0)), tuple(np.flatnonzero(labels == 1)))


def ungerboeck_split(c):
    """Even-index and odd-index points of an ordered alphabet.

    For M-PSK this doubles the minimum angular separation to ``4 pi / M``.
    """
    M = c.M if isinstance(c, Constellation) else int(c)
    if M % 2:
        raise ValidationError("odd-size", f"cannot split an odd-size alphabet (M={M})")
    return Partition2(tuple(range(0, M, 2)), tuple(range(1, M, 2)))


@dataclass(frozen=True)
class PartitionReport:
    """Minimum distances of the four sub-sums ``S1^a + S2^b`` (linear).

    ``dee``, ``deo``, ``doe`` and ``doo`` refer to cells (a, a), (a, b),
    (b, a) and (b, b); for parity splits a is the even cell.
    """

    dee: float
    deo: float
    doe: float
    doo: float
    p1: Partition2 = None
    p2: Partition2 = None

    @property
    def bottleneck(self):
        return min(self.dee, self.deo, self.doe, self.doo)

    @property
    def squared(self):
        return {k: getattr(self, k) ** 2 for k in ("dee", "deo", "doe", "doo")}

    def to_record(self, M=None, theta=None):
        rec = {"M": M, "theta": theta}
        rec.update({k: getattr(self, k) for k in ("dee", "deo", "doe", "doo")})
        rec["bottleneck"] = self.bottleneck
        if self.p1 is not None:
            rec["optimal_partition_indices"] = [list(self.p1.cells), list(self.p2.cells)]
        return rec


def _dmin(points):
    p = np.asarray(points)
    if len(p) < 2:
        return np.inf
    d = np.abs(p[:, None] - p[None, :])
    return float(d[np.triu_indices(len(p), 1)].min())


def partition_sumset_dmin(p1, p2, c1, c2):
    """Brute-force minimum distance of each sub-sum ``S1^a + S2^b``."""
    if p1.M != c1.M or p2.M != c2.M:
        raise ValidationError("partition", "partition size does not match the alphabet")
    x1, x2 = c1.points, c2.points
    d = {}
    for i, a in enumerate(p1.cells):
        for j, b in enumerate(p2.cells):
            d[(i, j)] = _dmin((x1[list(a)][:, None] + x2[list(b)][None, :]).ravel())
    return PartitionReport(d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)], p1, p2)


def psk_pair(M, theta):
    """``(M-PSK, exp(i theta) M-PSK)`` with unit-energy points."""
    c = make_constellation("PSK", M)
    return c, rotate(c, theta)


def dmin_formula_ee(M, theta):
    """Closed-form ``d_ee = d_oo = 4 sin(theta/2) sin(2 pi / M)`` for parity splits."""
    M = _check_M(M, 8)
    theta = _check_theta(M, theta)
    return float(4 * np.sin(theta / 2) * np.sin(2 * np.pi / M))


def dmin_formula_eo(M, theta):
    """Closed-form ``d_eo = d_oe`` for parity splits.

    The smaller of the diagonal distance ``d(r(I^{q-1}), r(O^q) e^{i 2 pi/M})``,
    ``q = M/2 - 1``, and the chord ``2 r(O^{M/2-1}) sin(2 pi / M)`` between
    neighbouring points on the innermost ring of the sub-sum, which equals
    ``4 sin(pi/M - theta/2) sin(2 pi / M)``.
    """
    M = _check_M(M, 8)
    theta = _check_theta(M, theta)
    q = M // 2 - 1
    w = np.exp(2j * np.pi / M)
    diag = abs(inner_radius(M, q - 1, theta) - outer_radius(M, q, theta) * w)
    chord = 2 * outer_radius(M, M // 2 - 1, theta) * np.sin(2 * np.pi / M)
    return float(min(diag, chord))


def has_cyclic_run(labels, run=3):
    """True if some cell holds ``run`` cyclically consecutive indices."""
    lab = np.asarray(labels)
    M = len(lab)
    ext = np.concatenate([lab, lab[: run - 1]])
    for s in range(M):
        if np.all(ext[s : s + run] == ext[s]):
            return True
    return False


def _balanced_labels(M):
    """All 0/1 label vectors with ``M/2`` ones and label 0 on index 0."""
    h = M // 2
    out = []
    for ones in combinations(range(1, M), h):
        lab = np.zeros(M, dtype=np.int8)
        lab[list(ones)] = 1
        out.append(lab)
    return np.array(out)


def _canonical_rotation(lab):
    """Lexicographically smallest cyclic shift (with cell relabelling)."""
    M = len(lab)
    cands = []
    for s in range(M):
        r = np.roll(lab, -s)
        if r[0] == 1:
            r = 1 - r
        cands.append(tuple(r.tolist()))
    return min(cands)


@dataclass(frozen=True, eq=False)
class SearchResult:
    best: PartitionReport
    maximizers: list
    n_evaluated: int
    ungerboeck: PartitionReport

    @property
    def ungerboeck_optimal(self):
        return self.ungerboeck.bottleneck >= self.best.bottleneck - TIE


def exhaustive_partition_search(M, theta, prune=True, tol=TIE):
    """Best balanced two-cell partitions of both alphabets for the bottleneck.

    The first partition is enumerated up to a common rotation of both
    alphabets (which only rotates the sum set) and up to swapping its cell
    names; the second is enumerated in full. With ``prune`` every partition
    with three cyclically consecutive indices in one cell is skipped, since
    such partitions provably lose to the parity split.

    Parameters
    ----------
    M : int
        Alphabet size, 4, 8 or 16.
    theta : float
        Rotation in (0, pi/M].
    prune : bool
    tol : float
        Distance tie tolerance.

    Returns
    -------
    SearchResult
        ``maximizers`` is a list of ``(Partition2, Partition2)`` in
        lexicographic order of their label vectors; ``best`` is the first.
    """
    M = _check_M(M)
    if M > 16:
        raise ValidationError("search-size", f"exhaustive search supports M <= 16, got {M}")
    theta = _check_theta(M, theta)
    c1, c2 = psk_pair(M, theta)
    x1, x2 = c1.points, c2.points
    # D[n1, n1', n2, n2'] = |x1(n1) - x1(n1') + x2(n2) - x2(n2')|
    d1 = x1[:, None] - x1[None, :]
    d2 = x2[:, None] - x2[None, :]
    D = np.abs(d1[:, :, None, None] + d2[None, None, :, :])
    iu = np.triu_indices(M, 1)
    labs2 = _balanced_labels(M)
    if prune:
        labs2 = labs2[[not has_cyclic_run(l) for l in labs2]]
    reps = sorted({_canonical_rotation(l) for l in labs2})
    labs1 = np.array(reps, dtype=np.int8)
    # for every P2: same-cell mask over ordered (n2, n2') pairs
    same2 = labs2[:, :, None] == labs2[:, None, :]
    big = np.inf
    best_val, found = -1.0, []
    n_eval = 0
    for lab1 in labs1:
        same1 = lab1[:, None] == lab1[None, :]
        # pairs with n1 != n1' in the same cell, or n1 == n1' (then n2 != n2')
        off = same1 & ~np.eye(M, dtype=bool)
        g_off = np.where(off[:, :, None, None], D, big).min(axis=(0, 1))
        # n1 == n1': distance is |d2(n2, n2')| for n2 != n2'
        g_diag = np.abs(d2).copy()
        np.fill_diagonal(g_diag, big)
        G = np.minimum(g_off, g_diag)
        vals = np.where(same2, G[None], big).reshape(len(labs2), -1).min(axis=1)
        n_eval += len(labs2)
        top = vals.max()
        if top > best_val + tol:
            best_val = top
            found = []
        if top >= best_val - tol:
            for idx in np.flatnonzero(vals >= best_val - tol):
                found.append((tuple(lab1.tolist()), tuple(labs2[idx].tolist())))
    found.sort()
    maxim = [(Partition2.from_labels(a), Partition2.from_labels(b)) for a, b in found]
    best = partition_sumset_dmin(maxim[0][0], maxim[0][1], c1, c2)
    ung = ungerboeck_split(M)
    return SearchResult(best, maxim, n_eval, partition_sumset_dmin(ung, ung, c1, c2))


def example_partitions():
    """The 8-PSK partition pair whose bottleneck beats the parity split at small angles.

    Listed in 1-based indices as ``{1,2,4,6} / {3,5,7,8}`` for user 1 and
    ``{1,4,5,8} / {2,3,6,7}`` for user 2, with ``x(8)`` the same point as
    ``x(0)``.
    """
    to0 = lambda s: tuple(sorted(i % 8 for i in s))
    p1 = Partition2(to0((1, 2, 4, 6)), to0((3, 5, 7, 8)))
    p2 = Partition2(to0((1, 4, 5, 8)), to0((2, 3, 6, 7)))
    return p1, p2
