"""Exit criteria. Each test appends one PASS/FAIL line to the terminal summary."""

import contextlib
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from ohmpath import errors
from ohmpath.generators import complete_graph, cycle_graph, path_graph, planted_hp, star_graph
from ohmpath.graph import Case, Graph, augment, brute_force_hp, decode_target, encode_hp, target_paths
from ohmpath.network import (
    effective,
    kirchhoff_residuals,
    net_terminal_currents,
    solve_network,
    support_path,
)
from ohmpath.optimizer import OptimizerConfig, enumerate_binary, optimize, round_config
from ohmpath.penalty import PenaltyWeights, gradient, l_outflow, objective, objective_value

from oracles import central_difference, hp_by_permutations

ZERO = 1e-10
# configurations with total < ZERO collected across the criteria for the structure check
ZERO_CONFIGS: list[tuple] = []


@contextlib.contextmanager
def criterion(num: int, title: str, limit: float | None = None):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - t0
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  [{num}] {title}: {exc}")
        raise
    extra = f" ({detail['note']})" if "note" in detail else ""
    ACCEPTANCE_LINES.append(f"PASS  [{num}] {title} in {elapsed:.2f}s{extra}")


@pytest.fixture(scope="module")
def paths_by_graph(augmented_corpus):
    return {name: target_paths(ag) for name, ag in augmented_corpus.items()}


def test_01_lemma_reproduction(corpus, augmented_corpus):
    with criterion(1, "encoded oracle paths have zero objective (p=1 and p=2)", limit=10) as d:
        assert len(corpus) >= 20
        assert sum(name.startswith("planted") for name in corpus) == 10
        assert {f"complete{n}" for n in range(4, 8)} <= set(corpus)
        count = 0
        worst = 0.0
        for name, ag in augmented_corpus.items():
            paths = target_paths(ag)
            assert paths, name
            for hp in paths:
                g = encode_hp(ag, hp)
                for p in (1, 2):
                    total = objective_value(ag, g, PenaltyWeights(exponent=p))
                    assert total < ZERO, (name, hp, p, total)
                    worst = max(worst, total)
                ZERO_CONFIGS.append((ag, g))
                count += 1
        d["note"] = f"{len(corpus)} graphs, {count} paths, max total {worst:.1e}"


def test_02_theorem_vertex_verification(augmented_corpus, paths_by_graph):
    with criterion(2, "zero-objective cube vertices equal encoded oracle paths", limit=60) as d:
        margins = {}
        checked = 0
        for name, ag in augmented_corpus.items():
            if ag.n_base_arcs > 16:
                continue
            expected = {tuple(int(x) for x in encode_hp(ag, hp)) for hp in paths_by_graph[name]}
            for p in (1, 2):
                table = enumerate_binary(ag, PenaltyWeights(exponent=p), max_arcs=16)
                zeros = {e.config for e in table if e.objective < ZERO}
                assert zeros == expected, (name, p)
                assert all(e.in_target == (e.config in expected) for e in table)
                positive = [e.objective for e in table if e.objective >= ZERO]
                margins[(name, p)] = min(positive)
                for e in table:
                    if e.objective < ZERO:
                        ZERO_CONFIGS.append((ag, np.array(e.config, dtype=float)))
            checked += 1
        assert checked >= 15
        smallest = min(margins.items(), key=lambda kv: kv[1])
        assert smallest[1] > ZERO
        d["note"] = f"{checked} graphs; smallest margin {smallest[1]:.4f} on {smallest[0][0]} p={smallest[0][1]}"
    for (name, p), m in sorted(margins.items()):
        if p == 2:
            ACCEPTANCE_LINES.append(f"        margin {name:<10} p=2 {m:.6f}  p=1 {margins[(name, 1)]:.6f}")


def test_03_zero_configs_have_path_support(augmented_corpus):
    with criterion(3, "every zero-objective config has a Hamiltonian current support") as d:
        # random configs rarely hit zero; record any that do alongside the collected ones
        rng = np.random.default_rng(2024)
        for ag in augmented_corpus.values():
            for _ in range(20):
                g = rng.uniform(0, 1, ag.n_base_arcs)
                if objective_value(ag, g) < ZERO:
                    ZERO_CONFIGS.append((ag, g))
        # optimizer near-minimizers are continuous and may keep currents far below
        # the objective threshold but above the support threshold; their rounded
        # (binary) configurations are what enter the check
        for name in ("complete4", "complete5", "cycle5", "planted0"):
            ag = augmented_corpus[name]
            run = optimize(ag, OptimizerConfig(starts=4, max_iters=400, rng_seed=1))
            for s in run.starts:
                g = round_config(s.final)
                if objective_value(ag, g) < ZERO:
                    ZERO_CONFIGS.append((ag, g))
        assert ZERO_CONFIGS, "run criteria 1 and 2 first"
        known = {}
        for ag, g in ZERO_CONFIGS:
            sol = solve_network(ag, g)
            hp = support_path(sol)
            assert hp is not None
            if id(ag) not in known:
                if ag.n_total <= 8:
                    known[id(ag)] = set(hp_by_permutations(ag.n_total, ag.full.arcs, ag.v_in, ag.v_out))
                else:
                    known[id(ag)] = {p.nodes for p in brute_force_hp(ag.full, ag.v_in, ag.v_out)}
            assert hp.nodes in known[id(ag)]
        d["note"] = f"{len(ZERO_CONFIGS)} configs"


def _random_case(rng):
    n = int(rng.integers(3, 11))
    arcs = {(i, i + 1) for i in range(n - 1)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.35:
                arcs.add((i, j))
    g0 = Graph.from_arcs(n, arcs)
    leaves = sum(g0.degree(i) == 1 for i in g0.nodes)
    ag = augment(g0) if leaves <= 2 else augment(complete_graph(n))
    g = rng.uniform(0, 1, ag.n_base_arcs)
    g[rng.random(ag.n_base_arcs) < 0.2] = 0.0
    return ag, g


def test_04_circuit_invariants():
    with criterion(4, "Kirchhoff, antisymmetry, maximum principle, conservation on 1000 pairs", limit=30) as d:
        rng = np.random.default_rng(4)
        worst_kcl = worst_cons = 0.0
        powered = 0
        for _ in range(1000):
            ag, g = _random_case(rng)
            sol = solve_network(ag, g)
            cur = sol.currents
            assert all(cur[(j, i)] == -x for (i, j), x in cur.items())
            if not sol.powered:
                assert not np.any(sol.arc_currents) and not np.any(sol.potentials)
                continue
            powered += 1
            kcl = np.max(np.abs(kirchhoff_residuals(sol)), initial=0.0)
            assert kcl < 1e-9
            nodes = sorted(sol.powered_nodes)
            assert np.all(sol.potentials[nodes] >= 0.0) and np.all(sol.potentials[nodes] <= ag.n_total - 1)
            a, b = net_terminal_currents(sol)
            assert abs(a - b) < 1e-9
            worst_kcl, worst_cons = max(worst_kcl, kcl), max(worst_cons, abs(a - b))
        d["note"] = f"{powered} powered, max residual {worst_kcl:.1e}, max imbalance {worst_cons:.1e}"


def test_05_gradient_check():
    with criterion(5, "adjoint gradient vs central differences, rel. err < 1e-6", limit=30) as d:
        graphs = [augment(complete_graph(4)), augment(complete_graph(5)), augment(cycle_graph(6)),
                  augment(path_graph(5)), augment(planted_hp(7, 4, seed=9))]
        rng = np.random.default_rng(5)
        w = PenaltyWeights(1.0, 1.0, 2)
        worst = 0.0
        for ag in graphs:
            for _ in range(20):
                g = rng.uniform(0.05, 0.95, ag.n_base_arcs)
                fd = central_difference(lambda x: objective_value(ag, x, w), g, h=1e-5)
                adj = gradient(ag, g, w)
                err = np.linalg.norm(adj - fd) / np.linalg.norm(fd)
                assert err < 1e-6
                worst = max(worst, err)
        d["note"] = f"max rel. err {worst:.1e}"


def test_06_hand_computed_solves():
    with criterion(6, "P3 hand-computed potentials, currents and out-flow penalty to 1e-12"):
        ag = augment(path_graph(3))
        sol = solve_network(ag, [1.0, 1.0])
        assert np.max(np.abs(sol.potentials - [2, 1, 0])) < 1e-12
        assert np.max(np.abs(sol.arc_currents - [1, 1])) < 1e-12
        sol = solve_network(ag, [1.0, 0.5])
        assert np.max(np.abs(sol.arc_currents - 2 / 3)) < 1e-12
        assert abs(sol.potentials[1] - 4 / 3) < 1e-12
        assert abs(l_outflow(sol, p=1) - 2 / 9) < 1e-12
        assert abs(objective(ag, [1.0, 0.5], PenaltyWeights(exponent=1)).l_outflow - 2 / 9) < 1e-12


def test_07_augmentation_cases():
    with criterion(7, "all four terminal-construction cases and the forced-zero clamp"):
        with pytest.raises(errors.NoHamiltonianPath):
            augment(star_graph(3))
        ag = augment(path_graph(3))
        assert ag.case is Case.TWO_LEAVES and (ag.v_in, ag.v_out, ag.n_total) == (0, 2, 3)
        ag = augment(Graph.from_arcs(4, [(0, 1), (1, 2), (2, 3), (1, 3)]), h_end=3)
        assert ag.case is Case.ONE_LEAF and (ag.v_in, ag.v_out, ag.n_total) == (0, 4, 5)
        assert ag.added_arcs == ((3, 4),)
        ag = augment(complete_graph(3), 0, 1)
        assert ag.case is Case.NO_LEAVES and ag.added_nodes == (3, 4) and ag.n_total == 5
        assert set(ag.added_arcs) == {(0, 3), (1, 4)}
        ag = augment(Graph.from_arcs(5, [(0, 1), (2, 3), (3, 4), (2, 4)]), require_connected=False)
        assert ag.forced_zero_arcs == {(0, 1)}
        assert effective(ag, [1.0, 1.0, 1.0, 1.0])[0] == 0.0
        assert solve_network(ag, [1.0, 1.0, 1.0, 1.0]).arc_currents[0] == 0.0


def test_08_optimizer_soundness():
    with criterion(8, "200 seeded runs on K4-K6: no false positives, monotone descent", limit=120) as d:
        found = 0
        hits = 0
        starts = 0
        for n in (4, 5, 6):
            ag = augment(complete_graph(n))
            oracle = {hp.nodes for hp in target_paths(ag)}
            runs = 67 if n < 6 else 66
            for seed in range(runs):
                run = optimize(ag, OptimizerConfig(starts=1, max_iters=400, rng_seed=seed))
                for s in run.starts:
                    starts += 1
                    values = [v for _, v in s.trajectory]
                    assert all(b <= a for a, b in zip(values, values[1:]))
                    if s.hit_target:
                        hits += 1
                        assert decode_target(ag, round_config(s.final)).nodes in oracle
                if run.classification.value == "HamiltonianPathFound":
                    found += 1
                    assert run.path.nodes in oracle
                    assert np.array_equal(encode_hp(ag, run.path), np.array(run.rounded))
        d["note"] = f"success rate {found}/200 = {found / 200:.2f}"
        assert starts == 200


def test_09_hyperplane(augmented_corpus, paths_by_graph):
    with criterion(9, "target configurations lie on the hyperplane sum = N-1") as d:
        count = 0
        for name, ag in augmented_corpus.items():
            for hp in paths_by_graph[name]:
                ge = effective(ag, encode_hp(ag, hp))
                assert ge.sum() == ag.n_total - 1
                count += 1
        d["note"] = f"{count} configurations"
