"""Independent reference computations used only by the tests."""

from itertools import product

import numpy as np
from scipy import integrate, stats


def _gh2(order):
    t, w = np.polynomial.hermite.hermgauss(order)
    a, b = np.meshgrid(t, t, indexing="ij")
    return (a + 1j * b).ravel(), np.outer(w, w).ravel() / np.pi


def gh_log2_sum(d, sigma2, order=32):
    """``E_z log2 sum_j exp(-(|d_j + z|^2 - |z|^2)/sigma2)`` for each row ``d``, z ~ CN(0, sigma2)."""
    u, w = _gh2(order)
    z = np.sqrt(sigma2) * u  # CN(0, sigma2): real and imaginary parts have variance sigma2/2
    e = -(np.abs(d[:, :, None] + z) ** 2 - np.abs(z) ** 2) / sigma2
    return (np.log2(np.exp(e).sum(axis=1)) * w).sum(axis=1)


def gh_mi_conditional(points, sigma2, order=32):
    p = np.asarray(points)
    d = p[:, None] - p[None, :]
    return float(np.log2(len(p)) - gh_log2_sum(d, sigma2, order).mean())


def gh_mi_marginal(p1, p2, sigma2, order=32):
    p1, p2 = np.asarray(p1), np.asarray(p2)
    s = (p1[:, None] + p2[None, :]).ravel()
    num = gh_log2_sum(s[:, None] - s[None, :], sigma2, order)
    d1 = p1[:, None] - p1[None, :]
    den = gh_log2_sum(np.repeat(d1, len(p2), axis=0), sigma2, order)
    return float(np.log2(len(p2)) - (num - den).mean())


def mac_sum_quadrature(Nt, rho):
    """``E log2(1 + rho/(2 Nt) g)`` with ``g ~ Gamma(2 Nt, 1)``."""
    f = lambda g: np.log2(1 + rho / (2 * Nt) * g) * stats.gamma.pdf(g, 2 * Nt)
    return integrate.quad(f, 0, np.inf, limit=200)[0]


def label_key(lab):
    lab = np.round(np.asarray(lab), 9)
    return tuple(zip(lab.real.tolist(), lab.imag.tolist()))


def product_edges(t1, t2):
    """Edge multiset of the sum of two labelled trellises, by explicit loops."""
    S2 = t2.n_states
    out = []
    for a in range(t1.n_states):
        for b in range(t2.n_states):
            for e1 in range(t1.n_branches):
                for e2 in range(t2.n_branches):
                    lab = t1.labels[a, e1] + t2.labels[b, e2]
                    nxt = t1.next_state[a, e1] * S2 + t2.next_state[b, e2]
                    out.append((a * S2 + b, int(nxt), label_key(lab)))
    return sorted(out)


def enumerated_free_distance(t, max_len):
    """Smallest distance between label sequences that start together with
    different first branches and end in the same state, over lengths up to
    ``max_len``."""
    best = np.inf
    S, B = t.next_state.shape
    for L in range(1, max_len + 1):
        seqs = np.array(list(product(range(B), repeat=L)))
        for s0 in range(S):
            labs = np.empty((len(seqs), L * t.section_length), complex)
            end = np.empty(len(seqs), int)
            for i, br in enumerate(seqs):
                s, row = s0, []
                for b in br:
                    row.append(t.labels[s, b])
                    s = t.next_state[s, b]
                labs[i], end[i] = np.concatenate(row), s
            for e in np.unique(end):
                g = np.flatnonzero(end == e)
                d = (np.abs(labs[g][:, None] - labs[g][None]) ** 2).sum(axis=2)
                first = seqs[g, 0]
                d[first[:, None] == first[None, :]] = np.inf
                best = min(best, d.min())
    return float(best)
