"""Two-user MIMO multiple access channel with phase-compensating transmitters.

Each user has ``Nt`` antennas and the receiver one. Per channel use

    y = sqrt(rho / (2 Nt)) (x1 . h1 + x2 . h2) + n,   n ~ CN(0, 1),

with ``h_ji ~ CN(0, 1)``. When the transmitters know the channel phases
they pre-rotate, and the effective channels become the magnitudes
``|h_ji|``. Over a block of ``l`` uses with codewords ``X`` and ``Y`` from
linear designs, ``y = c (Hhat1 x + Hhat2 y_vars) + n`` with
``c = sqrt(rho / (2 Nt))`` and ``Hhat_j = sum_i |h_ji| A_i``.

Two code families are covered. SOD: both users use the same separable
design with regular QAM variables; the in-phase and quadrature parts
decouple. ROD: both users use the same real design, user 1 with real PAM
and user 2 with the PAM turned by 90 degrees, so the users sit in
orthogonal real dimensions and every real symbol decodes on its own.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .capacity import CHUNK, McEstimate
from .constellation import ValidationError, make_constellation, rotate
from .designs import make_rod, make_sod
from .rng import default_seed, stream

SCHEMES = ("ROD", "SOD")
BER_GRID_DB = (0.0, 5.0, 10.0, 15.0, 20.0)
TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MacChannel:
    """Channel realisation(s) of the two users.

    Attributes
    ----------
    h1, h2 : ndarray, shape (..., Nt)
        Complex fading coefficients.
    rho : float
        Average receive SNR, linear.
    csit_p : bool
        If set the transmitters compensate the phases and the effective
        channels are ``|h1|`` and ``|h2|``.
    """

    h1: np.ndarray
    h2: np.ndarray
    rho: float = 1.0
    csit_p: bool = True

    @property
    def Nt(self):
        return np.shape(self.h1)[-1]

    @property
    def gain(self):
        """Amplitude factor ``sqrt(rho / (2 Nt))``."""
        return float(np.sqrt(self.rho / (2 * self.Nt)))

    def effective(self):
        if self.csit_p:
            return np.abs(self.h1), np.abs(self.h2)
        return np.asarray(self.h1), np.asarray(self.h2)


def _rayleigh(rng, shape):
    g = rng.standard_normal(shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def draw_channel(Nt, rho, rng, size=None, csit_p=True):
    """Draw i.i.d. CN(0, 1) channels for both users."""
    shape = (() if size is None else (int(size),)) + (2, int(Nt))
    h = _rayleigh(rng, shape)
    return MacChannel(h[..., 0, :], h[..., 1, :], float(rho), csit_p)


def _check_rho(rho):
    rho = float(rho)
    if not (rho >= 0 and np.isfinite(rho)):
        raise ValidationError("snr", f"SNR must be a nonnegative finite number, got {rho}")
    return rho


def db_to_linear(snr_db):
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)


def losslessness_residual(design, h1, h2=None):
    """``max |Hhat Hhat^T - (|h1|^2 + |h2|^2) I|`` with ``Hhat = [Hhat1, Hhat2]``.

    Both users employ ``design`` (the SOD pair uses identical structures in
    each real dimension). With ``h2`` omitted the single-user form is
    checked. Channels are taken in magnitude, as after phase compensation.
    """
    hs = [np.abs(np.asarray(h1))] + ([] if h2 is None else [np.abs(np.asarray(h2))])
    H = np.concatenate([design.effective_channel(h) for h in hs], axis=-1)
    HH = np.einsum("...rv,...sv->...rs", H, H)
    target = sum((h**2).sum(axis=-1) for h in hs)
    I = np.eye(design.l)
    return float(np.abs(HH - target[..., None, None] * I).max())


def _check_n(n):
    n = int(n)
    if n < 10_000:
        raise ValidationError("samples", f"need at least 10000 channel draws, got {n}")
    return n


def _channel_mc(per_draw, Nt, n, seed, tag="channel", workers=1):
    """Monte-Carlo mean of ``per_draw(h1, h2)`` over CN(0, 1) channels.

    Channel draws depend only on ``(seed, tag, Nt, chunk)``; estimators that
    share the tag see the same channels.
    """
    sizes = [CHUNK] * (n // CHUNK) + ([n % CHUNK] if n % CHUNK else [])

    def run(j):
        h = _rayleigh(stream(seed, tag, Nt, j), (sizes[j], 2, Nt))
        return per_draw(h[:, 0], h[:, 1])

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(j) for j in range(len(sizes))]
    v = np.concatenate(parts)
    return McEstimate(float(v.mean()), n, float(v.std(ddof=1) / np.sqrt(n)), seed)


def mac_sum_capacity(Nt, rho, n=100_000, seed=None, csit_p=True, workers=1):
    """Sum capacity ``E log2(1 + rho/(2 Nt) (|h1|^2 + |h2|^2))``.

    With ``csit_p`` the magnitude channels are used, otherwise the raw
    complex ones; the norms, and so the estimates, coincide.
    """
    rho, n = _check_rho(rho), _check_n(n)
    seed = default_seed() if seed is None else seed
    if rho == 0:
        return McEstimate(0.0, n, 0.0, seed)

    def f(h1, h2):
        if csit_p:
            h1, h2 = np.abs(h1), np.abs(h2)
        g = (np.abs(h1) ** 2).sum(axis=1) + (np.abs(h2) ** 2).sum(axis=1)
        return np.log2(1 + rho / (2 * Nt) * g)

    return _channel_mc(f, int(Nt), n, seed, workers=workers)


def _logdet2(HHt, a):
    l = HHt.shape[-1]
    sign, ld = np.linalg.slogdet(np.eye(l) + a * HHt)
    return ld / np.log(2)


def stbc_mutual_info(design, rho, scheme="SOD", n=100_000, seed=None, workers=1):
    """Mutual information per channel use of a code pair built on ``design``.

    SOD: each real dimension carries ``y_d = c Hhat z_d + n_d`` with
    ``Hhat = [Hhat1, Hhat2]``, real variables of variance 1/2 and noise of
    variance 1/2; the two dimensions together give
    ``(1/l) log2 det(I + rho/(2 Nt) Hhat Hhat^T)``.

    ROD: user ``j`` owns one real dimension with unit-variance PAM
    variables, giving ``(1/(2l)) log2 det(I + (rho/Nt) Hhat_j Hhat_j^T)``
    per user; the two users are summed.
    """
    if scheme not in SCHEMES:
        raise ValidationError("scheme", f"scheme must be one of {SCHEMES}, got {scheme!r}")
    rho, n = _check_rho(rho), _check_n(n)
    seed = default_seed() if seed is None else seed
    Nt, l = design.Nt, design.l

    def f(h1, h2):
        H1 = design.effective_channel(np.abs(h1))
        H2 = design.effective_channel(np.abs(h2))
        if scheme == "SOD":
            H = np.concatenate([H1, H2], axis=-1)
            return _logdet2(H @ np.swapaxes(H, -1, -2), rho / (2 * Nt)) / l
        a = rho / Nt
        return sum(_logdet2(H @ np.swapaxes(H, -1, -2), a) for H in (H1, H2)) / (2 * l)

    return _channel_mc(f, Nt, n, seed, workers=workers)


def rod_closed_form_capacity(Nt, rho, n=100_000, seed=None, workers=1):
    """``E log2(1 + (rho/Nt) |h|^2)`` for a single CN(0, I_Nt) vector ``h``.

    The capacity of an ``Nt x 1`` channel, which is what the ROD scheme
    achieves in sum. Uses its own channel draws.
    """
    rho, n = _check_rho(rho), _check_n(n)
    seed = default_seed() if seed is None else seed

    def f(h1, h2):
        return np.log2(1 + rho / Nt * (np.abs(h1) ** 2).sum(axis=1))

    return _channel_mc(f, int(Nt), n, seed, tag="single-user-channel", workers=workers)


# ---------------------------------------------------------------- decoding


def _product_levels(c, tol=TOL):
    """In-phase and quadrature levels if ``c`` is a Cartesian product set."""
    p = np.asarray(c.points)
    re = np.unique(np.round(p.real / tol) * tol)
    im = np.unique(np.round(p.imag / tol) * tol)
    grid = re[:, None] + 1j * im[None, :]
    if len(re) * len(im) != len(p):
        return None
    hit = np.abs(p[:, None] - grid.ravel()[None, :]).min(axis=0)
    if np.any(hit > 10 * tol):
        return None
    return re, im


def _index_of(points, values):
    return np.abs(values[..., None] - points).argmin(axis=-1)


def _batched(y, channel):
    y = np.asarray(y)
    single = y.ndim == 1
    h1, h2 = channel.effective()
    h1, h2 = np.atleast_2d(h1), np.atleast_2d(h2)
    return np.atleast_2d(y), h1, h2, single


def _real_group_ml(yd, H, levels, c, batch=512):
    """Brute-force ``argmin ||yd - c H s||`` over ``s`` in ``levels^K``, per row."""
    K = H.shape[-1]
    hyp = np.array(list(product(levels, repeat=K)))
    out = np.empty((len(yd), K))
    for s in range(0, len(yd), batch):
        pred = c * np.einsum("kv,trv->tkr", hyp, H[s : s + batch])
        m = ((yd[s : s + batch, None, :] - pred) ** 2).sum(axis=2)
        out[s : s + batch] = hyp[m.argmin(axis=1)]
    return out


def ml_decode_sod(y, channel, design, constellation):
    """Two-group ML decoding of the SOD pair.

    The in-phase and quadrature parts of ``y`` are decoded separately, each
    by exhaustive search over the ``2l`` real variables of both users.

    Parameters
    ----------
    y : ndarray, shape (l,) or (T, l)
    channel : MacChannel
        Same leading shape as ``y``.
    design : OrthogonalDesign
    constellation : Constellation
        Regular QAM (a Cartesian product of in-phase and quadrature levels)
        used by both users.

    Returns
    -------
    idx1, idx2 : ndarray of int, shape (k,) or (T, k)
        Indices into ``constellation.points``.
    """
    lv = _product_levels(constellation)
    if lv is None:
        raise ValidationError(
            "entangled", "SOD decoding needs a regular QAM set; in-phase and quadrature parts are entangled"
        )
    y, h1, h2, single = _batched(y, channel)
    H = np.concatenate([design.effective_channel(h1), design.effective_channel(h2)], axis=-1)
    c = channel.gain
    zi = _real_group_ml(y.real, H, lv[0], c)
    zq = _real_group_ml(y.imag, H, lv[1], c)
    z = zi + 1j * zq
    k = design.k
    pts = np.asarray(constellation.points)
    i1, i2 = _index_of(pts, z[:, :k]), _index_of(pts, z[:, k:])
    return (i1[0], i2[0]) if single else (i1, i2)


def _check_pam_pair(c1, c2, tol=TOL):
    p1, p2 = np.asarray(c1.points), np.asarray(c2.points)
    if np.any(np.abs(p1.imag) > tol) or np.any(np.abs(p2.real) > tol):
        raise ValidationError(
            "orientation", "ROD decoding needs real PAM for user 1 and purely imaginary PAM for user 2"
        )
    return p1.real, p2.imag


def rod_decision_statistics(y, channel, design):
    """Per-symbol statistics ``Hhat_j^T y_dim / (c |h_j|^2)``.

    User 1 is read from the real part and user 2 from the imaginary part.
    Each statistic is its own transmitted symbol plus noise.
    """
    y, h1, h2, single = _batched(y, channel)
    c = channel.gain
    out = []
    for h, yd in ((h1, y.real), (h2, y.imag)):
        H = design.effective_channel(h)
        out.append(np.einsum("trv,tr->tv", H, yd) / (c * (h**2).sum(axis=1))[:, None])
    return (out[0][0], out[1][0]) if single else tuple(out)


def ml_decode_rod(y, channel, design, pam_pair):
    """Single-symbol ML decoding of the ROD pair.

    Parameters
    ----------
    pam_pair : (Constellation, Constellation)
        Real PAM for user 1 and the same set turned by 90 degrees for user 2.

    Returns
    -------
    idx1, idx2 : ndarray of int
    """
    a1, a2 = _check_pam_pair(*pam_pair)
    z1, z2 = rod_decision_statistics(y, channel, design)
    return _index_of(a1, z1), _index_of(a2, z2)


def joint_ml_decode(y, channel, design, c1, c2, batch=4096):
    """Exhaustive ML over all codeword pairs, using the complex metric.

    This is the reference decoder; it ignores every structural shortcut.
    """
    y, h1, h2, single = _batched(y, channel)
    p1, p2 = np.asarray(c1.points), np.asarray(c2.points)
    k = design.k
    idx = np.array(list(product(range(len(p1)), repeat=k)))
    jdx = np.array(list(product(range(len(p2)), repeat=k)))
    X = design.matrix(p1[idx])  # (K1, l, Nt)
    Y = design.matrix(p2[jdx])
    c = channel.gain
    o1, o2 = np.empty((len(y), k), int), np.empty((len(y), k), int)
    for t in range(len(y)):
        u = c * X @ h1[t]  # (K1, l)
        v = c * Y @ h2[t]
        r = y[t][None, :] - u  # residual before user 2
        best, arg = np.inf, (0, 0)
        for s in range(0, len(v), batch):
            m = (np.abs(r[:, None, :] - v[None, s : s + batch, :]) ** 2).sum(axis=2)
            a = np.unravel_index(m.argmin(), m.shape)
            if m[a] < best:
                best, arg = m[a], (a[0], a[1] + s)
        o1[t], o2[t] = idx[arg[0]], jdx[arg[1]]
    return (o1[0], o2[0]) if single else (o1, o2)


# ---------------------------------------------------------------- BER


def _gray(m):
    g = np.arange(m) ^ (np.arange(m) >> 1)
    b = int(np.log2(m))
    return ((g[:, None] >> np.arange(b - 1, -1, -1)) & 1).astype(np.int8)


def scheme_constellations(scheme):
    """Per-user alphabets at two bits per channel use.

    SOD: unit-energy 4-QAM for both users. ROD: unit-energy 4-PAM and its
    90-degree rotation.
    """
    if scheme == "SOD":
        q = make_constellation("QAM", 4)
        return q, q
    if scheme == "ROD":
        p = make_constellation("PAM", 4)
        return p, rotate(p, np.pi / 2)
    raise ValidationError("scheme", f"scheme must be one of {SCHEMES}, got {scheme!r}")


@dataclass(frozen=True)
class BerCurve:
    """Bit error rate over an SNR grid.

    Attributes
    ----------
    snr_db, ber : ndarray
    errors, bits : ndarray of int
    seed : int
    scheme : str
    Nt : int
    """

    snr_db: np.ndarray
    ber: np.ndarray
    errors: np.ndarray
    bits: np.ndarray
    seed: int
    scheme: str
    Nt: int


def _ber_batch(scheme, design, cs, rho, size, rng):
    """Bit errors and bits for one batch of codeword pairs."""
    Nt, k = design.Nt, design.k
    ch = draw_channel(Nt, rho, rng, size)
    h1, h2 = ch.effective()
    if scheme == "ROD":
        lab = _gray(4)
        a1 = np.asarray(cs[0].points)
        a2 = np.asarray(cs[1].points)
        i1, i2 = rng.integers(0, 4, (size, k)), rng.integers(0, 4, (size, k))
    else:
        # 4-QAM: one Gray bit per real dimension
        pts = np.asarray(cs[0].points)
        i1, i2 = rng.integers(0, 4, (size, k)), rng.integers(0, 4, (size, k))
        a1 = a2 = pts
    s = ch.gain * (
        np.einsum("trv,tv->tr", design.effective_channel(h1), a1[i1])
        + np.einsum("trv,tv->tr", design.effective_channel(h2), a2[i2])
    )
    y = s + _rayleigh(rng, (size, design.l))
    if scheme == "ROD":
        d1, d2 = ml_decode_rod(y, ch, design, cs)
        err = (lab[d1] != lab[i1]).sum() + (lab[d2] != lab[i2]).sum()
    else:
        d1, d2 = ml_decode_sod(y, ch, design, cs[0])
        err = _qam_bit_errors(pts, d1, i1) + _qam_bit_errors(pts, d2, i2)
    return int(err), int(4 * k * size)


def _qam_bit_errors(pts, dec, tx):
    a, b = pts[dec], pts[tx]
    return int(((a.real > 0) != (b.real > 0)).sum() + ((a.imag > 0) != (b.imag > 0)).sum())


def ber_simulation(scheme, Nt, snr_grid=BER_GRID_DB, min_errors=100, max_bits=10**7, seed=None,
                   batch=2000, workers=1):
    """Monte-Carlo BER of the SOD or ROD code pair, both users counted.

    Batches of ``batch`` codeword pairs are simulated, each from its own
    random stream keyed by ``(seed, scheme, Nt, snr index, batch index)``.
    A point stops after the first batch at which ``min_errors`` bit errors
    or ``max_bits`` bits are reached, counted in batch order, so the result
    does not depend on ``workers``.
    """
    if scheme not in SCHEMES:
        raise ValidationError("scheme", f"scheme must be one of {SCHEMES}, got {scheme!r}")
    seed = default_seed() if seed is None else seed
    rod = make_rod(Nt)
    design = rod if scheme == "ROD" else make_sod(rod)
    cs = scheme_constellations(scheme)
    snr = np.asarray(snr_grid, dtype=float)
    errs, bits = np.zeros(len(snr), int), np.zeros(len(snr), int)
    wave = max(1, int(workers or 1))
    ex = ThreadPoolExecutor(wave) if wave > 1 else None
    try:
        for i, s in enumerate(snr):
            rho = float(db_to_linear(s))
            run = lambda b: _ber_batch(scheme, design, cs, rho, batch, stream(seed, "ber-" + scheme, Nt, i, b))
            b, e, n, done = 0, 0, 0, False
            while not done:
                ids = range(b, b + wave)
                res = list(ex.map(run, ids)) if ex else [run(j) for j in ids]
                for de, dn in res:
                    e, n = e + de, n + dn
                    if e >= min_errors or n >= max_bits:
                        done = True
                        break
                b += wave
            errs[i], bits[i] = e, n
    finally:
        if ex:
            ex.shutdown()
    return BerCurve(snr, errs / bits, errs, bits, seed, scheme, int(Nt))
