import numpy as np
import pytest

from maclab.constellation import ValidationError, make_constellation
from maclab.designs import OrthogonalDesign, difference_ranks, make_rod, make_sod


@pytest.mark.parametrize("Nt", range(1, 9))
def test_hurwitz_radon(Nt):
    d = make_rod(Nt)
    assert d.hurwitz_radon_residual() <= 1e-12
    assert d.k == d.l and d.rate == 1.0
    A = d.rep_matrices
    for i in range(Nt):
        np.testing.assert_allclose(A[i] @ A[i].T, np.eye(d.l), atol=1e-12)


@pytest.mark.parametrize("Nt, l", [(1, 1), (2, 2), (3, 4), (4, 4), (5, 8), (8, 8)])
def test_sizes(Nt, l):
    d = make_rod(Nt)
    assert (d.l, d.Nt) == (l, Nt)


def test_two_antenna_dispersion():
    W = make_rod(2).dispersion_matrices
    np.testing.assert_array_equal(W[0], np.eye(2))
    np.testing.assert_array_equal(W[1], [[0, 1], [-1, 0]])


def test_four_antenna_matrix():
    assert make_rod(4).to_text().split("\n") == [
        "   x1    x2    x3    x4",
        "  -x2    x1   -x4    x3",
        "  -x3    x4    x1   -x2",
        "  -x4   -x3    x2    x1",
    ]


def test_three_antennas_truncates_four():
    np.testing.assert_array_equal(make_rod(3).G, make_rod(4).G[:, :3, :])


def test_orthogonality_of_codewords():
    rng = np.random.default_rng(0)
    for Nt in (2, 3, 4, 8):
        d = make_rod(Nt)
        x = rng.standard_normal(d.k)
        X = d.matrix(x)
        np.testing.assert_allclose(X.T @ X, (x @ x) * np.eye(Nt), atol=1e-12)
        h = rng.standard_normal(Nt)
        np.testing.assert_allclose(X @ h, d.effective_channel(h) @ x, atol=1e-12)


def test_sod_same_structure():
    r = make_rod(4)
    s = make_sod(r)
    assert s.kind == "SOD"
    np.testing.assert_array_equal(s.G, r.G)
    x = np.array([1 + 2j, -1j, 0.5, 3 - 1j])
    np.testing.assert_allclose(s.matrix(x), r.matrix(x.real) + 1j * r.matrix(x.imag))


def test_sod_rejects_bad_input():
    with pytest.raises(ValidationError):
        make_sod(make_sod(make_rod(2)))
    G = make_rod(2).G.copy()
    G[1, 1, 0] = -1.0
    with pytest.raises(ValidationError):
        make_sod(OrthogonalDesign(G))


@pytest.mark.parametrize("Nt", [0, 9])
def test_unsupported_antennas(Nt):
    with pytest.raises(ValidationError):
        make_rod(Nt)


@pytest.mark.parametrize(
    "Nt, kind, alphabet, ranks",
    [(2, "ROD", ("PAM", 4), [2]), (4, "ROD", ("PAM", 4), [4]), (2, "SOD", ("QAM", 4), [1, 2]), (4, "SOD", ("QAM", 4), [2, 4])],
)
def test_difference_ranks(Nt, kind, alphabet, ranks):
    d = make_rod(Nt) if kind == "ROD" else make_sod(make_rod(Nt))
    assert difference_ranks(d, make_constellation(*alphabet)).tolist() == ranks
