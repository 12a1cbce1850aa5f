"""Out-flow and branching penalties, the weighted objective and its gradient.

For each node ``i`` the outgoing terms are ``x_ik = (J_(i,k)^+)^p``. Then

    O_i = sum_k x_ik
    B_i = sum_{k<l} x_ik x_il = (O_i**2 - sum_k x_ik**2) / 2
    L_outflow = O_out**2 + sum_{i != out} (O_i - 1)**2
    L_branch = sum_i B_i
    total = alpha1 * L_outflow + alpha2 * L_branch

``p = 2`` (the default) keeps the objective continuously differentiable where
currents cross zero; ``p = 1`` gives the unsquared positive parts. Both share
the same zero set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonSmoothPoint, UnknownNode
from .graph import AugmentedGraph
from .network import DEFAULT_TOL, NetworkSolution, Tolerances, as_config, solve_network


@dataclass(frozen=True)
class PenaltyWeights:
    alpha1: float = 1.0
    alpha2: float = 1.0
    exponent: int = 2

    def __post_init__(self):
        if not (self.alpha1 > 0 and self.alpha2 > 0):
            raise ValueError("penalty weights must be positive")
        if self.exponent not in (1, 2):
            raise ValueError("exponent must be 1 or 2")


@dataclass(frozen=True)
class PenaltyReport:
    outflow_per_node: dict[int, float]
    branch_per_node: dict[int, float]
    inflow_per_node: dict[int, float]
    l_outflow: float
    l_branch: float
    total: float
    weights: PenaltyWeights
    gradient: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "outflow_per_node": {str(k): v for k, v in self.outflow_per_node.items()},
            "branch_per_node": {str(k): v for k, v in self.branch_per_node.items()},
            "inflow_per_node": {str(k): v for k, v in self.inflow_per_node.items()},
            "l_outflow": self.l_outflow,
            "l_branch": self.l_branch,
            "total": self.total,
            "weights": {"alpha1": self.weights.alpha1, "alpha2": self.weights.alpha2,
                        "exponent": self.weights.exponent},
            "gradient": None if self.gradient is None else list(self.gradient),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PenaltyReport":
        per = lambda m: {int(k): float(v) for k, v in m.items()}  # noqa: E731
        return cls(
            outflow_per_node=per(d["outflow_per_node"]),
            branch_per_node=per(d["branch_per_node"]),
            inflow_per_node=per(d["inflow_per_node"]),
            l_outflow=float(d["l_outflow"]),
            l_branch=float(d["l_branch"]),
            total=float(d["total"]),
            weights=PenaltyWeights(**d["weights"]),
            gradient=None if d.get("gradient") is None else tuple(map(float, d["gradient"])),
        )


def _terms(sol: NetworkSolution, p: int):
    """Outgoing terms per arc: ``u`` leaves the tail, ``v`` leaves the head."""
    J = sol.arc_currents
    u = np.maximum(J, 0.0)
    v = np.maximum(-J, 0.0)
    if p == 2:
        u, v = u * u, v * v
    return u, v


def _node_sums(ag: AugmentedGraph, u, v) -> np.ndarray:
    out = np.zeros(ag.n_total)
    np.add.at(out, ag.tails, u)
    np.add.at(out, ag.heads, v)
    return out


def _targets(ag: AugmentedGraph) -> np.ndarray:
    t = np.ones(ag.n_total)
    t[ag.v_out] = 0.0
    return t


def outflow_all(sol: NetworkSolution, p: int = 2) -> np.ndarray:
    u, v = _terms(sol, p)
    return _node_sums(sol.ag, u, v)


def outflow(sol: NetworkSolution, i: int, p: int = 2) -> float:
    """Sum over arcs at ``i`` of the p-th power of the positive outgoing current."""
    if not 0 <= i < sol.ag.n_total:
        raise UnknownNode(f"node {i} not in graph")
    return float(outflow_all(sol, p)[i])


def branch_all(sol: NetworkSolution, p: int = 2) -> np.ndarray:
    u, v = _terms(sol, p)
    O = _node_sums(sol.ag, u, v)
    Q = _node_sums(sol.ag, u * u, v * v)
    # O**2 - Q is a sum of nonnegative cross terms; clip rounding below zero
    return np.maximum(0.5 * (O * O - Q), 0.0)


def l_outflow(sol: NetworkSolution, p: int = 2) -> float:
    O = outflow_all(sol, p)
    return float(np.sum((O - _targets(sol.ag)) ** 2))


def l_branch(sol: NetworkSolution, p: int = 2) -> float:
    return float(np.sum(branch_all(sol, p)))


def inflow_all(sol: NetworkSolution) -> np.ndarray:
    """Total positive incoming current per node (a diagnostic, no exponent)."""
    J = sol.arc_currents
    return _node_sums(sol.ag, np.maximum(-J, 0.0), np.maximum(J, 0.0))


def _value(sol: NetworkSolution, w: PenaltyWeights):
    u, v = _terms(sol, w.exponent)
    ag = sol.ag
    O = _node_sums(ag, u, v)
    Q = _node_sums(ag, u * u, v * v)
    B = np.maximum(0.5 * (O * O - Q), 0.0)
    lo = float(np.sum((O - _targets(ag)) ** 2))
    lb = float(np.sum(B))
    return O, B, lo, lb, w.alpha1 * lo + w.alpha2 * lb


def objective_value(ag: AugmentedGraph, g, weights: PenaltyWeights = PenaltyWeights(),
                    tol: Tolerances = DEFAULT_TOL) -> float:
    return _value(solve_network(ag, g, tol), weights)[4]


def _gradient(sol: NetworkSolution, g: np.ndarray, w: PenaltyWeights) -> np.ndarray:
    ag = sol.ag
    nb = ag.n_base_arcs
    grad = np.zeros(nb)
    if not sol.powered:
        if w.exponent == 1:
            raise NonSmoothPoint("no powered component; p=1 objective is not differentiable here")
        # every term is quadratic in currents that vanish to first order
        return grad

    tol = sol.tol
    tails, heads = ag.tails, ag.heads
    labels = sol.labels
    pl = labels[ag.v_in]
    touches = (labels[tails] == pl) | (labels[heads] == pl)
    ge = np.concatenate([g, np.ones(len(ag.added_arcs))])
    if np.any(touches & (ge > 0.0) & (ge < 10 * tol.eps_g)):
        raise NonSmoothPoint("a powered arc has conductance within 10*eps_g of zero")
    J = sol.arc_currents
    cond = sol.conductances
    if w.exponent == 1 and np.any(touches & (cond > 0.0) & (np.abs(J) < tol.tol_current)):
        raise NonSmoothPoint("a conducting arc carries (numerically) zero current with p=1")

    p = w.exponent
    u, v = _terms(sol, p)
    O = _node_sums(ag, u, v)
    # dF/dx for a term x leaving node i: 2*a1*(O_i - t_i) + a2*(O_i - x)
    base = 2.0 * w.alpha1 * (O - _targets(ag)) + w.alpha2 * O
    dF_du = base[tails] - w.alpha2 * u
    dF_dv = base[heads] - w.alpha2 * v
    if p == 2:
        du_dJ = 2.0 * np.maximum(J, 0.0)
        dv_dJ = -2.0 * np.maximum(-J, 0.0)
    else:
        du_dJ = (J > 0.0).astype(float)
        dv_dJ = -(J < 0.0).astype(float)
    dF_dJ = dF_du * du_dJ + dF_dv * dv_dJ

    # adjoint: lambda solves K lambda = dF/dphi on interior nodes
    r = np.zeros(ag.n_total)
    np.add.at(r, tails, dF_dJ * cond)
    np.add.at(r, heads, -dF_dJ * cond)
    lam = np.zeros(ag.n_total)
    if sol.interior is not None and sol.interior.size:
        lam[sol.interior] = scipy.linalg.cho_solve(sol.factor, r[sol.interior], check_finite=False)

    phi = sol.potentials
    dphi = phi[tails] - phi[heads]
    inside = (labels[tails] == pl) & (labels[heads] == pl)
    full = np.where(inside, dphi * (dF_dJ - (lam[tails] - lam[heads])), 0.0)
    grad = full[:nb]
    grad[ag.forced_zero_mask] = 0.0
    return grad


def value_and_gradient(ag: AugmentedGraph, g, weights: PenaltyWeights = PenaltyWeights(),
                       tol: Tolerances = DEFAULT_TOL) -> tuple[float, np.ndarray]:
    g = as_config(ag, g)
    sol = solve_network(ag, g, tol)
    return _value(sol, weights)[4], _gradient(sol, g, weights)


def gradient(ag: AugmentedGraph, g, weights: PenaltyWeights = PenaltyWeights(),
             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Derivative of the total objective with respect to the original-arc conductances.

    One adjoint solve with the cached Cholesky factor of the reduced Laplacian.
    At ``g_a = 0`` the derivative is one-sided (into the cube). Raises
    ``NonSmoothPoint`` where the objective is not differentiable.
    """
    return value_and_gradient(ag, g, weights, tol)[1]


def objective(ag: AugmentedGraph, g, weights: PenaltyWeights = PenaltyWeights(),
              tol: Tolerances = DEFAULT_TOL, with_gradient: bool = False) -> PenaltyReport:
    g = as_config(ag, g)
    sol = solve_network(ag, g, tol)
    O, B, lo, lb, total = _value(sol, weights)
    I = inflow_all(sol)
    grad = tuple(_gradient(sol, g, weights).tolist()) if with_gradient else None
    nodes = range(ag.n_total)
    return PenaltyReport(
        outflow_per_node={i: float(O[i]) for i in nodes},
        branch_per_node={i: float(B[i]) for i in nodes},
        inflow_per_node={i: float(I[i]) for i in nodes},
        l_outflow=lo,
        l_branch=lb,
        total=total,
        weights=weights,
        gradient=grad,
    )
