"""Search for the relative rotation that best separates two users' alphabets.

The surrogate metric is

    M(theta) = sum_{k1,k2} log2 sum_{i1,i2} exp(-|d1 + e^{i theta} d2|^2 / (4 sigma2)),

with ``d1 = x(k1) - x(i1)`` and ``d2 = x(k2) - x(i2)``. It upper-bounds the
negated sum-rate term, so smaller is better. Across the angle grid the
metric changes by parts in 1e12 at low SNR, far below double precision
resolution of the neighbouring differences, so everything here is
evaluated in extended precision (``np.longdouble``).
"""

from dataclasses import dataclass

import numpy as np

from .constellation import ValidationError

LD = np.longdouble
# grid points within this relative distance of the minimum are treated as
# exact ties when choosing theta*; it sits a few ulps above longdouble eps
TIE_RTOL = 1e-17
# co-minimizer tolerance used for the reported multiplicity
MULT_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class RotationProfile:
    """Metric values over an angle grid and the selected minimizer.

    Attributes
    ----------
    grid : ndarray
        Angles in degrees, ascending, inside (0, 180).
    metric_values : ndarray of longdouble
    theta_star : float
        Selected minimizer in degrees.
    multiplicity : int
        Grid points within ``mult_rtol`` of the minimum.
    snr_db : float
    ties : ndarray
        Grid angles tied with the minimum at the selection tolerance.
    """

    grid: np.ndarray
    metric_values: np.ndarray
    theta_star: float
    multiplicity: int
    snr_db: float
    ties: np.ndarray

    def summary(self):
        return {
            "theta_star": float(self.theta_star),
            "multiplicity": int(self.multiplicity),
            "snr_db": float(self.snr_db),
        }


def _differences(points):
    p = np.asarray(points, dtype=complex)
    d = p[:, None] - p[None, :]
    return d.real.astype(LD), d.imag.astype(LD)


def metric_profile(c1, thetas, sigma2=2.0, batch=32):
    """Evaluate the rotation metric at many angles (radians).

    Parameters
    ----------
    c1 : Constellation
        Alphabet at its operating energy.
    thetas : array_like
        Angles in radians; longdouble input keeps full precision.
    sigma2 : float
        Total complex noise variance.

    Returns
    -------
    ndarray of longdouble
    """
    if not sigma2 > 0:
        raise ValidationError("sigma2", "noise variance must be positive")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=LD))
    dr, di = _differences(c1.points)
    n = dr.shape[0]
    scale = LD(1) / (LD(4) * LD(sigma2))
    # the (k1 = i1, k2 = i2) term is exp(0) = 1; it is left out of the sum
    # and added back through log1p, which keeps the tiny remainder exact
    eye = np.eye(n, dtype=bool)
    self_term = eye[:, :, None, None] & eye[None, None, :, :]
    out = np.empty(len(thetas), dtype=LD)
    for s in range(0, len(thetas), batch):
        th = thetas[s : s + batch]
        ct, st = np.cos(th)[:, None, None], np.sin(th)[:, None, None]
        rr = ct * dr[None] - st * di[None]
        ri = st * dr[None] + ct * di[None]
        ar = dr[None, :, :, None, None] + rr[:, None, None, :, :]
        ai = di[None, :, :, None, None] + ri[:, None, None, :, :]
        e = np.exp(-(ar * ar + ai * ai) * scale)
        e[:, self_term] = 0
        inner = e.sum(axis=(2, 4))
        out[s : s + batch] = np.log1p(inner).sum(axis=(1, 2))
    return out / np.log(LD(2))


def metric_M(c1, theta, sigma2=2.0):
    """The rotation metric at a single angle ``theta`` (radians)."""
    return metric_profile(c1, [theta], sigma2)[0]


def angle_grid(step_deg=0.0625):
    """Angles ``k * step`` strictly inside (0, 180) degrees, as longdouble."""
    step = LD(str(step_deg)) if not isinstance(step_deg, np.floating) else LD(step_deg)
    if not step > 0:
        raise ValidationError("grid-step", f"grid step must be positive, got {step_deg}")
    k = np.arange(1, int(np.ceil(LD(180) / step)), dtype=LD)
    g = k * step
    return g[g < 180]


def _orthogonalizing(points, tol=1e-12):
    """Angles (deg) that make the alphabet and its rotation orthogonal lines.

    Only a collinear alphabet through the origin has such an angle (90).
    """
    p = np.asarray(points, dtype=complex)
    nz = p[np.abs(p) > tol]
    if len(nz) == 0:
        return []
    u = nz / nz[0]
    return [90.0] if np.all(np.abs(u.imag) <= tol * np.abs(u)) else []


def optimal_rotation(c1, snr_db, grid_step=0.0625, sigma2=2.0, mult_rtol=MULT_RTOL, tie_rtol=TIE_RTOL):
    """Sweep the rotation metric over (0, 180) degrees and pick the minimizer.

    Parameters
    ----------
    c1 : Constellation
        Alphabet of both users; it is rescaled so that ``P1 / sigma2`` equals
        the SNR.
    snr_db : float
    grid_step : float
        Grid spacing in degrees.
    mult_rtol : float
        Relative tolerance for counting co-minimizers.
    tie_rtol : float
        Relative tolerance for the tie set from which theta* is chosen.
        Among ties an orthogonality-inducing angle wins, otherwise the
        least angle.

    Returns
    -------
    RotationProfile

    Examples
    --------
    >>> from maclab.constellation import make_constellation
    >>> float(optimal_rotation(make_constellation("PSK", 2), 0.0, 1.0).theta_star)
    90.0
    """
    grid = angle_grid(grid_step)
    c = c1.with_energy(sigma2 * 10.0 ** (snr_db / 10.0))
    vals = metric_profile(c, grid * (np.pi / LD(180)), sigma2)
    vmin = vals.min()
    scale = abs(vmin) if vmin != 0 else LD(1)
    ties = grid[vals - vmin <= LD(tie_rtol) * scale]
    mult = int(np.count_nonzero(vals - vmin <= LD(mult_rtol) * scale))
    star = None
    for a in _orthogonalizing(c.points):
        if np.any(np.abs(ties - LD(a)) < grid_step / 2):
            star = a
            break
    if star is None:
        star = float(ties.min())
    return RotationProfile(
        grid.astype(float), vals, float(star), mult, float(snr_db), ties.astype(float)
    )
