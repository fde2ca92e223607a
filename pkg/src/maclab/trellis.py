"""Labelled trellises, the sum trellis seen by a two-user receiver, free distance and Viterbi.

A trellis is kept in steady-state single-section form: a table
``next_state[s, b]`` giving the successor of state ``s`` along branch
``b``. Every state has the same number of branches. Labels are stored per
branch as a short vector of complex symbols (one symbol per section in
all presets here).
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .constellation import ValidationError, make_constellation, rotate
from .psk_geometry import ungerboeck_split

TIE = 1e-9


@dataclass(frozen=True, eq=False)
class Trellis:
    """Unlabelled single-section trellis.

    Parameters
    ----------
    next_state : array_like of int, shape (n_states, n_branches)
    """

    next_state: np.ndarray

    def __post_init__(self):
        ns = np.array(self.next_state, dtype=int)
        if ns.ndim != 2 or ns.size == 0:
            raise ValidationError("trellis", "next_state must be a nonempty 2-D table")
        if ns.min() < 0 or ns.max() >= ns.shape[0]:
            raise ValidationError("trellis", "next_state entries out of range")
        ns.setflags(write=False)
        object.__setattr__(self, "next_state", ns)

    @property
    def n_states(self):
        return self.next_state.shape[0]

    @property
    def n_branches(self):
        return self.next_state.shape[1]

    def edges(self):
        """Array of ``(from, to, branch)`` rows."""
        s, b = np.meshgrid(np.arange(self.n_states), np.arange(self.n_branches), indexing="ij")
        return np.stack([s.ravel(), self.next_state.ravel(), b.ravel()], axis=1)

    def _reach(self, start, reverse=False):
        adj = [[] for _ in range(self.n_states)]
        for s, t, _ in self.edges():
            if reverse:
                adj[t].append(s)
            else:
                adj[s].append(t)
        seen, todo = {start}, [start]
        while todo:
            u = todo.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    def is_connected(self):
        """Every state reachable from every other state."""
        every = set(range(self.n_states))
        return self._reach(0) == every and self._reach(0, reverse=True) == every

    def state_profile(self, n_sections, start=0):
        """Number of reachable states at each of the ``n_sections + 1`` stages."""
        cur = {start}
        prof = [1]
        for _ in range(n_sections):
            cur = set(self.next_state[sorted(cur)].ravel().tolist())
            prof.append(len(cur))
        return prof


@dataclass(frozen=True, eq=False)
class LabeledTrellis:
    """Trellis with a complex label vector on every branch.

    Attributes
    ----------
    trellis : Trellis
    labels : ndarray of complex, shape (n_states, n_branches, L)
        ``L`` is the section length in symbols.
    label_index : ndarray of int or None
        Constellation indices of the labels, when known.
    """

    trellis: Trellis
    labels: np.ndarray
    label_index: np.ndarray = None

    def __post_init__(self):
        lab = np.array(self.labels, dtype=complex)
        if lab.ndim == 2:
            lab = lab[:, :, None]
        if lab.shape[:2] != self.trellis.next_state.shape:
            raise ValidationError("labels", "label table does not match the trellis shape")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def next_state(self):
        return self.trellis.next_state

    @property
    def n_states(self):
        return self.trellis.n_states

    @property
    def n_branches(self):
        return self.trellis.n_branches

    @property
    def section_length(self):
        return self.labels.shape[2]

    def has_parallel_transitions(self):
        ns = self.next_state
        return any(len(set(row.tolist())) < len(row) for row in ns)


@dataclass(frozen=True, eq=False)
class SumTrellis(LabeledTrellis):
    """Product trellis with state ``(a, b) -> a * S2 + b`` and branch ``(e1, e2) -> e1 * B2 + e2``."""

    components: tuple = None

    def split_state(self, s):
        s2 = self.components[1].n_states
        return np.asarray(s) // s2, np.asarray(s) % s2

    def split_branches(self, branches):
        b2 = self.components[1].n_branches
        branches = np.asarray(branches)
        return branches // b2, branches % b2


def uncoded(n_branches):
    """One state with ``n_branches`` parallel self-loops."""
    return Trellis(np.zeros((1, int(n_branches)), dtype=int))


def two_state():
    """Two states, two branches; branch ``b`` leads to state ``b``."""
    return Trellis(np.array([[0, 1], [0, 1]]))


def four_state():
    """Four states, two branches: the systematic feedback code with parity checks 5, 2 (octal).

    State ``s = 2u + v`` emits the uncoded bit ``z1`` (the branch index) and
    the coded bit ``v``; the label index is ``2 z1 + v`` and the next state
    is ``2 v + (u xor z1)``. States with ``v = 0`` therefore use the even
    cell of a parity split and states with ``v = 1`` the odd cell.
    """
    ns = np.zeros((4, 2), dtype=int)
    for s in range(4):
        u, v = divmod(s, 2)
        for z1 in range(2):
            ns[s, z1] = 2 * v + (u ^ z1)
    return Trellis(ns)


def label_ungerboeck(t, c, split=None):
    """Label branches so every state draws from a single partition cell.

    State ``s`` uses cell ``s mod 2`` of ``split`` and branch ``b`` gets the
    ``b``-th index of that cell, so cells alternate between states and each
    symbol is used equally often when the states are equally likely. With
    ``split=None`` the whole alphabet is one cell.

    Parameters
    ----------
    t : Trellis
    c : Constellation
    split : Partition2 or None
    """
    cells = [tuple(range(c.M))] if split is None else [tuple(x) for x in split.cells]
    if split is not None and split.M != c.M:
        raise ValidationError("labels", "partition does not match the constellation size")
    if any(len(cell) != t.n_branches for cell in cells):
        raise ValidationError(
            "labels", f"out-degree {t.n_branches} does not match cell size {len(cells[0])}"
        )
    idx = np.array([[cells[s % len(cells)][b] for b in range(t.n_branches)] for s in range(t.n_states)])
    return LabeledTrellis(t, c.points[idx][:, :, None], idx)


def sum_trellis(t1, t2):
    """Product trellis whose branch labels are sums of the component labels."""
    if t1.section_length != t2.section_length:
        raise ValidationError(
            "stages", f"section lengths differ ({t1.section_length} vs {t2.section_length})"
        )
    S1, B1 = t1.next_state.shape
    S2, B2 = t2.next_state.shape
    ns = t1.next_state[:, None, :, None] * S2 + t2.next_state[None, :, None, :]
    lab = t1.labels[:, None, :, None, :] + t2.labels[None, :, None, :, :]
    ns = ns.reshape(S1 * S2, B1 * B2)
    lab = lab.reshape(S1 * S2, B1 * B2, -1)
    return SumTrellis(Trellis(ns), lab, None, (t1, t2))


def free_distance(t, return_event=False):
    """Minimum squared Euclidean distance between two paths that split and merge.

    Dijkstra over unordered pairs of distinct states. An event starts from
    a common state with two different branches; if both branches end in
    the same state (parallel transitions) the event has length one.

    Parameters
    ----------
    t : LabeledTrellis
    return_event : bool
        Also return the pair-state sequence of a minimizing event.

    Returns
    -------
    float
    """
    if not t.trellis.is_connected():
        raise ValidationError("disconnected", "free distance needs a connected trellis")
    ns, lab = t.next_state, t.labels
    S, B = ns.shape
    d2 = lambda a, b: float(np.sum(np.abs(a - b) ** 2))
    best, best_event = np.inf, None
    heap, dist, prev = [], {}, {}

    def relax(key, val, parent):
        if val < dist.get(key, np.inf) - 1e-15:
            dist[key] = val
            prev[key] = parent
            heapq.heappush(heap, (val, key))

    for s in range(S):
        for b in range(B):
            for b2 in range(b + 1, B):
                w = d2(lab[s, b], lab[s, b2])
                u, v = ns[s, b], ns[s, b2]
                if u == v:
                    if w < best:
                        best, best_event = w, [("split", s), ("merge", int(u))]
                else:
                    relax((min(u, v), max(u, v)), w, ("split", s))
    while heap:
        val, key = heapq.heappop(heap)
        if val > dist.get(key, np.inf) or val >= best:
            continue
        s, s2 = key
        for b in range(B):
            for b2 in range(B):
                w = val + d2(lab[s, b], lab[s2, b2])
                if w >= best:
                    continue
                u, v = ns[s, b], ns[s2, b2]
                if u == v:
                    best = w
                    best_event = _trace(prev, key) + [("merge", int(u))]
                else:
                    relax((min(u, v), max(u, v)), w, key)
    if return_event:
        return best, best_event
    return best


def _trace(prev, key):
    path = [key]
    while True:
        p = prev[path[-1]]
        if isinstance(p, tuple) and p and p[0] == "split":
            path.append(p)
            break
        path.append(p)
    return path[::-1]


@dataclass(frozen=True, eq=False)
class ViterbiResult:
    branches: np.ndarray
    states: np.ndarray
    symbols: np.ndarray
    metric: float


def encode(t, branches, start_state=0):
    """Label sequence and state sequence produced by a branch sequence."""
    s = int(start_state)
    states, out = [s], []
    for b in np.asarray(branches, dtype=int):
        out.append(t.labels[s, b])
        s = int(t.next_state[s, b])
        states.append(s)
    syms = np.concatenate(out) if out else np.zeros(0, complex)
    return syms, np.array(states)


def viterbi_decode(t, received, sigma2=None, start_state=0, end_state=None):
    """Maximum-likelihood path for ``received`` under squared-Euclidean metric.

    Parameters
    ----------
    t : LabeledTrellis
    received : array_like of complex
        Length must be a multiple of the section length.
    sigma2 : float, optional
        Noise variance. It scales every path metric equally, so the decision
        does not depend on it; accepted for interface symmetry.
    start_state : int or None
        Known initial state, or None for an unknown start.
    end_state : int or None
        Force the final state, or None to take the best survivor.

    Returns
    -------
    ViterbiResult
        Ties are broken toward the lowest (state, branch) index.
    """
    r = np.asarray(received, dtype=complex).ravel()
    L = t.section_length
    if len(r) % L:
        raise ValidationError("length", f"received length {len(r)} is not a multiple of {L}")
    if sigma2 is not None and not sigma2 > 0:
        raise ValidationError("sigma2", "noise variance must be positive")
    n = len(r) // L
    ns, lab = t.next_state, t.labels
    S, B = ns.shape
    frm = np.repeat(np.arange(S), B)
    to = ns.ravel()
    order = np.lexsort((np.arange(S * B), to))
    bounds = np.searchsorted(to[order], np.arange(S + 1))
    pm = np.full(S, np.inf)
    if start_state is None:
        pm[:] = 0.0
    else:
        pm[int(start_state)] = 0.0
    back = np.zeros((n, S), dtype=int)
    flat = lab.reshape(S * B, L)
    for k in range(n):
        bm = np.sum(np.abs(r[k * L : (k + 1) * L][None, :] - flat) ** 2, axis=1)
        cand = pm[frm] + bm
        new = np.full(S, np.inf)
        for s in range(S):
            inc = order[bounds[s] : bounds[s + 1]]
            if len(inc):
                j = inc[np.argmin(cand[inc])]
                new[s] = cand[j]
                back[k, s] = j
        pm = new
    s = int(np.argmin(pm)) if end_state is None else int(end_state)
    metric = float(pm[s])
    edges = np.empty(n, dtype=int)
    for k in range(n - 1, -1, -1):
        edges[k] = back[k, s]
        s = frm[edges[k]]
    branches = edges % B
    syms, states = encode(t, branches, s)
    return ViterbiResult(branches, states, syms, metric)


def parse_trellis(text):
    """Read the text trellis format.

    The first non-comment line holds ``n_states branches_per_state``; each
    following line is ``from to label_index``. The order of a state's lines
    defines its branch numbering. ``#`` starts a comment.

    Returns
    -------
    trellis : Trellis
    label_index : ndarray of int, shape (n_states, branches_per_state)
    """
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise ValidationError("format", "empty trellis description")
    try:
        S, B = (int(x) for x in rows[0])
        edges = [tuple(int(x) for x in r) for r in rows[1:]]
    except ValueError as e:
        raise ValidationError("format", f"non-integer field: {e}") from None
    if any(len(e) != 3 for e in edges):
        raise ValidationError("format", "edge lines need exactly three fields: from to label_index")
    if S <= 0 or B <= 0:
        raise ValidationError("format", "state and branch counts must be positive")
    ns = -np.ones((S, B), dtype=int)
    idx = -np.ones((S, B), dtype=int)
    fill = np.zeros(S, dtype=int)
    for f, t, li in edges:
        if not (0 <= f < S and 0 <= t < S):
            raise ValidationError("format", f"state out of range in edge {f} {t} {li}")
        if fill[f] >= B:
            raise ValidationError("out-degree", f"state {f} has more than {B} branches")
        ns[f, fill[f]], idx[f, fill[f]] = t, li
        fill[f] += 1
    if np.any(fill != B):
        bad = int(np.flatnonzero(fill != B)[0])
        raise ValidationError("out-degree", f"state {bad} has {fill[bad]} branches, expected {B}")
    return Trellis(ns), idx


def format_trellis(t, label_index):
    """Canonical text form: header then edges ordered by state and branch."""
    S, B = t.next_state.shape
    lines = [f"{S} {B}"]
    for s in range(S):
        for b in range(B):
            lines.append(f"{s} {int(t.next_state[s, b])} {int(label_index[s, b])}")
    return "\n".join(lines) + "\n"


def labeled_from_text(text, c, split=None):
    """Build a labelled trellis from the text format and an alphabet.

    When ``split`` is given, each state's labels must come from one cell.
    """
    t, idx = parse_trellis(text)
    if idx.min() < 0 or idx.max() >= c.M:
        raise ValidationError("labels", f"label index outside 0..{c.M - 1}")
    if split is not None:
        cell_of = split.labels()
        for s in range(t.n_states):
            if len(set(cell_of[idx[s]].tolist())) != 1:
                raise ValidationError("cell-purity", f"state {s} mixes partition cells")
    return LabeledTrellis(t, c.points[idx][:, :, None], idx)


def coding_gain_db(d2_coded, d2_ref):
    """Asymptotic gain ``10 log10(d2_coded / d2_ref)``."""
    return float(10 * np.log10(d2_coded / d2_ref))


PRESETS = {"four-state": four_state, "two-state": two_state}
SCENARIOS = ("psk", "pam")


def scenario_alphabets(scenario):
    """Alphabet and relative rotation of the two reference scenarios.

    ``psk``: unit-energy QPSK, user 2 turned by pi/4. ``pam``: unit-energy
    4-PAM, user 2 turned by pi/2.
    """
    if scenario == "psk":
        return make_constellation("PSK", 4), np.pi / 4
    if scenario == "pam":
        return make_constellation("PAM", 4), np.pi / 2
    raise ValidationError("scenario", f"scenario must be one of {SCENARIOS}, got {scenario!r}")


def scenario_sum_trellis(t, scenario):
    """Both users run ``t`` with parity-split labels; returns the sum trellis.

    Parameters
    ----------
    t : Trellis or str
        Unlabelled trellis or a preset name from ``PRESETS``.
    scenario : {"psk", "pam"}
    """
    if isinstance(t, str):
        if t not in PRESETS:
            raise ValidationError("preset", f"unknown trellis preset {t!r}; choose from {sorted(PRESETS)}")
        t = PRESETS[t]()
    c, theta = scenario_alphabets(scenario)
    split = ungerboeck_split(c)
    return sum_trellis(label_ungerboeck(t, c, split), label_ungerboeck(t, rotate(c, theta), split))
