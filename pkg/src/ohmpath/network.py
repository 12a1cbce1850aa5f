"""Potentials and currents of the conductance network.

The terminal ``v_in`` is held at potential ``N-1`` and ``v_out`` is grounded.
Only the conducting component containing both terminals carries current; every
other node gets potential zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConductanceOutOfRange, DimensionMismatch, SolverFailure, UnknownNode
from .graph import Arc, AugmentedGraph, HamiltonianPath, path_from_arcs


@dataclass(frozen=True)
class Tolerances:
    eps_g: float = 1e-12  # conductances at or below this count as absent
    tol_current: float = 1e-9  # currents above this belong to the support


DEFAULT_TOL = Tolerances()


def as_config(ag: AugmentedGraph, g, check_range: bool = True) -> np.ndarray:
    """Validate a conductance vector over the original arcs and clamp forced zeros."""
    g = np.array(g, dtype=float)
    if g.shape != (ag.n_base_arcs,):
        raise DimensionMismatch(f"expected {ag.n_base_arcs} conductances, got shape {g.shape}")
    if check_range and (not np.all(np.isfinite(g)) or np.any(g < 0.0) or np.any(g > 1.0)):
        raise ConductanceOutOfRange("conductances must lie in [0, 1]")
    g[ag.forced_zero_mask] = 0.0
    return g


def effective(ag: AugmentedGraph, g) -> np.ndarray:
    """Conductances over all arcs: ``g`` on original arcs, 1 on added arcs."""
    g = as_config(ag, g)
    return np.concatenate([g, np.ones(len(ag.added_arcs))])


def conducting_components(ag: AugmentedGraph, ge, eps_g: float = DEFAULT_TOL.eps_g) -> np.ndarray:
    """Component label per node of the subgraph of arcs with conductance > eps_g.

    Labels are the smallest node id of each component.
    """
    parent = list(range(ag.n_total))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j), c in zip(ag.arcs, np.asarray(ge, dtype=float).tolist()):
        if c > eps_g:
            ri, rj = find(i), find(j)
            if ri != rj:
                if ri < rj:
                    parent[rj] = ri
                else:
                    parent[ri] = rj
    return np.array([find(x) for x in range(ag.n_total)], dtype=np.intp)


def component_sets(labels: np.ndarray) -> list[frozenset[int]]:
    return [frozenset(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels)]


@dataclass(frozen=True)
class NetworkSolution:
    ag: AugmentedGraph = field(repr=False)
    conductances: np.ndarray  # effective, with sub-threshold arcs zeroed
    potentials: np.ndarray
    arc_currents: np.ndarray  # J along ag.arcs[k] = (i, j), i < j
    labels: np.ndarray
    powered: bool
    tol: Tolerances = DEFAULT_TOL
    # interior node ids and the Cholesky factor of their reduced Laplacian
    interior: np.ndarray = field(default=None, repr=False, compare=False)
    factor: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def powered_nodes(self) -> frozenset[int]:
        if not self.powered:
            return frozenset()
        return frozenset(np.flatnonzero(self.labels == self.labels[self.ag.v_in]).tolist())

    @property
    def components(self) -> list[frozenset[int]]:
        return component_sets(self.labels)

    @property
    def currents(self) -> dict[tuple[int, int], float]:
        """Directed current for both orientations of every arc."""
        out = {}
        for (i, j), x in zip(self.ag.arcs, self.arc_currents):
            out[(i, j)] = float(x)
            out[(j, i)] = float(-x)
        return out

    def current(self, i: int, j: int) -> float:
        if i < j:
            return float(self.arc_currents[self.ag.arc_index[(i, j)]])
        return float(-self.arc_currents[self.ag.arc_index[(j, i)]])

    @property
    def support(self) -> frozenset[Arc]:
        on = np.abs(self.arc_currents) > self.tol.tol_current
        return frozenset(a for a, x in zip(self.ag.arcs, on) if x)

    def to_dict(self) -> dict:
        return {
            "potentials": self.potentials.tolist(),
            "currents": {f"{i},{j}": x for (i, j), x in self.currents.items()},
            "powered_nodes": sorted(self.powered_nodes),
            "components": [sorted(c) for c in self.components],
            "support": [list(a) for a in sorted(self.support)],
        }


def _laplacian(n: int, tails, heads, w) -> np.ndarray:
    L = np.zeros((n, n))
    np.add.at(L, (tails, tails), w)
    np.add.at(L, (heads, heads), w)
    np.add.at(L, (tails, heads), -w)
    np.add.at(L, (heads, tails), -w)
    return L


def laplacian(ag: AugmentedGraph, ge) -> np.ndarray:
    """Dense conductance-weighted Laplacian of the augmented graph."""
    return _laplacian(ag.n_total, ag.tails, ag.heads, np.asarray(ge, dtype=float))


def solve_network(ag: AugmentedGraph, g, tol: Tolerances = DEFAULT_TOL) -> NetworkSolution:
    """Solve the Dirichlet problem on the powered component and apply Ohm's law."""
    ge = effective(ag, g)
    labels = conducting_components(ag, ge, tol.eps_g)
    n = ag.n_total
    w = np.where(ge > tol.eps_g, ge, 0.0)
    phi = np.zeros(n)
    powered = labels[ag.v_in] == labels[ag.v_out]
    if not powered:
        return NetworkSolution(ag, w, phi, np.zeros(len(ag.arcs)), labels, False, tol)

    top = float(n - 1)
    phi[ag.v_in] = top
    in_p = labels == labels[ag.v_in]
    in_p[[ag.v_in, ag.v_out]] = False
    interior = np.flatnonzero(in_p)
    factor = None
    if interior.size:
        L = _laplacian(n, ag.tails, ag.heads, w)
        K = L[np.ix_(interior, interior)]
        rhs = -L[interior, ag.v_in] * top
        try:
            factor = scipy.linalg.cho_factor(K, lower=True, check_finite=False)
            x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"reduced Laplacian is not positive definite: {exc}") from None
        if not np.all(np.isfinite(x)):
            raise SolverFailure("non-finite potentials")
        phi[interior] = x
    J = w * (phi[ag.tails] - phi[ag.heads])
    return NetworkSolution(ag, w, phi, J, labels, True, tol, interior, factor)


def current_out(sol: NetworkSolution, i: int) -> list[tuple[int, float]]:
    """Signed currents on all arcs at ``i``, oriented away from ``i``."""
    ag = sol.ag
    if not 0 <= i < ag.n_total:
        raise UnknownNode(f"node {i} not in graph")
    return [(j, sol.current(i, j)) for j in ag.full.adjacency[i]]


def kirchhoff_residuals(sol: NetworkSolution) -> np.ndarray:
    """Net current out of each interior powered node (should vanish)."""
    if not sol.powered:
        return np.zeros(0)
    ag = sol.ag
    net = np.zeros(ag.n_total)
    np.add.at(net, ag.tails, sol.arc_currents)
    np.add.at(net, ag.heads, -sol.arc_currents)
    return net[sol.interior] if sol.interior is not None else np.zeros(0)


def net_terminal_currents(sol: NetworkSolution) -> tuple[float, float]:
    """(net current out of v_in, net current into v_out)."""
    ag = sol.ag
    net = np.zeros(ag.n_total)
    np.add.at(net, ag.tails, sol.arc_currents)
    np.add.at(net, ag.heads, -sol.arc_currents)
    return float(net[ag.v_in]), float(-net[ag.v_out])


def support_path(sol: NetworkSolution) -> HamiltonianPath | None:
    """The absolute current support as a v_in -> v_out Hamiltonian path, if it is one."""
    ag = sol.ag
    return path_from_arcs(ag.n_total, sol.support, ag.v_in, ag.v_out)
