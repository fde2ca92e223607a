import numpy as np
import pytest

from maclab.capacity import NoiseModel, at_snr, mi_marginal
from maclab.constellation import Constellation, ValidationError, make_constellation, rotate
from maclab.rotation import LD, angle_grid, metric_M, metric_profile, optimal_rotation

bpsk = make_constellation("PSK", 2)
qpsk = make_constellation("PSK", 4)


def test_bpsk_orthogonal_beats_small_angle():
    c = bpsk.with_energy(2.0)
    assert metric_M(c, np.pi / 2) < metric_M(c, 0.01)


@pytest.mark.parametrize("M", [2, 4, 8])
def test_period(M):
    c = make_constellation("PSK", M).with_energy(2 * 10 ** 0.2)
    th = np.linspace(0.05, 2 * np.pi / M - 0.05, 25)
    a = metric_profile(c, th)
    b = metric_profile(c, th + 2 * np.pi / M)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-10


def test_single_point_constant():
    c = Constellation([0.5])
    v = metric_profile(c, [0.1, 1.0, 2.5])
    assert np.all(v == v[0])


def test_grid():
    g = angle_grid(0.0625)
    assert len(g) == 2879 and g[0] == LD("0.0625") and g[-1] == LD("179.9375")
    with pytest.raises(ValidationError):
        angle_grid(0.0)


@pytest.mark.parametrize(
    "c, snr, star",
    [(bpsk, -2.0, 90.0), (qpsk, 4.0, 45.0), (make_constellation("PSK", 8), 6.0, 22.5)],
)
def test_table_examples(c, snr, star):
    assert optimal_rotation(c, snr).theta_star == star


def test_bpsk_multiplicity_one_at_low_snr():
    assert optimal_rotation(bpsk, -2.0).multiplicity == 1


def test_deterministic_profile():
    a = optimal_rotation(qpsk, 2.0, 0.5)
    b = optimal_rotation(qpsk, 2.0, 0.5)
    np.testing.assert_array_equal(a.metric_values, b.metric_values)
    assert a.summary() == b.summary()


def test_ties_are_symmetric_angles():
    assert list(optimal_rotation(qpsk, 0.0).ties) == [45.0, 135.0]
    assert list(optimal_rotation(make_constellation("PSK", 8), 0.0).ties) == [22.5, 67.5, 112.5, 157.5]


@pytest.mark.parametrize("snr", [2.0, 4.0, 6.0])
def test_surrogate_direction_qpsk(snr):
    star = optimal_rotation(qpsk, snr).theta_star
    c = at_snr(qpsk, snr)
    noise = NoiseModel(2.0, 5)
    a = mi_marginal(c, rotate(c, np.deg2rad(star)), noise, 100_000)
    b = mi_marginal(c, c, noise, 100_000)
    assert a.value - b.value > 3 * (a - b).std_error
