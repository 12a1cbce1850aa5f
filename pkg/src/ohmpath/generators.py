"""Small deterministic graph families for experiments and tests."""

from __future__ import annotations

import itertools

import numpy as np

from .graph import MIN_NODES, Graph, norm_arc


def _check_n(n: int):
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")


def path_graph(n: int) -> Graph:
    _check_n(n)
    return Graph.from_arcs(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    _check_n(n)
    return Graph.from_arcs(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    _check_n(n)
    return Graph.from_arcs(n, itertools.combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    return Graph.from_arcs(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    """G(n, p); may be disconnected."""
    _check_n(n)
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph.from_arcs(n, [a for a, k in zip(pairs, keep) if k])


def planted_hp(n: int, extra: int, seed: int = 0) -> Graph:
    """Random Hamiltonian spine plus ``extra`` random chords.

    The spine endpoints are recorded as ``h_start``/``h_end``. When exactly one
    of them is a leaf it is made the start, as the terminal construction
    requires.
    """
    _check_n(n)
    rng = np.random.default_rng(seed)
    perm = [int(x) for x in rng.permutation(n)]
    spine = {norm_arc(u, v) for u, v in zip(perm, perm[1:])}
    others = [a for a in itertools.combinations(range(n), 2) if a not in spine]
    if not 0 <= extra <= len(others):
        raise ValueError(f"extra must lie in [0, {len(others)}]")
    chosen = [others[int(k)] for k in rng.choice(len(others), size=extra, replace=False)]
    arcs = sorted(spine | set(chosen))
    deg = [0] * n
    for i, j in arcs:
        deg[i] += 1
        deg[j] += 1
    s, t = perm[0], perm[-1]
    if deg[t] == 1 and deg[s] != 1:
        s, t = t, s
    return Graph.from_arcs(n, arcs, h_start=s, h_end=t)


KINDS = ("path", "cycle", "complete", "erdos-renyi", "planted-hp")


def generate(kind: str, n: int, p: float = 0.5, extra: int = 0, seed: int = 0) -> Graph:
    if kind == "path":
        return path_graph(n)
    if kind == "cycle":
        return cycle_graph(n)
    if kind == "complete":
        return complete_graph(n)
    if kind == "erdos-renyi":
        return erdos_renyi(n, p, seed)
    if kind == "planted-hp":
        return planted_hp(n, extra, seed)
    raise ValueError(f"unknown graph kind {kind!r}")


def default_corpus() -> dict[str, Graph]:
    """The desk-scale corpus: paths, cycles, K4..K7 and ten planted-path graphs."""
    corpus: dict[str, Graph] = {}
    for n in range(3, 9):
        corpus[f"path{n}"] = path_graph(n)
    for n in range(4, 8):
        corpus[f"cycle{n}"] = cycle_graph(n)
    for n in range(4, 8):
        corpus[f"complete{n}"] = complete_graph(n)
    for k in range(10):
        n = 5 + k % 4
        corpus[f"planted{k}"] = planted_hp(n, extra=min(n, 2 + k % 5), seed=100 + k)
    return corpus
