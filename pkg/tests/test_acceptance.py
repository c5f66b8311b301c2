"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria execute.  Tolerances are fixed here, not tuned at runtime.
"""
import time

import numpy as np
import pytest
import scipy.sparse as sp

from mgbench import (CycleParams, a_norm, apply_amli,
                     apply_amli_ns, apply_amli_tilde, apply_amli_tilde_ns,
                     apply_backslash, apply_v_cycle, as_csr, assemble_poisson,
                     build_geometric, geometric_prolongator, nonlinear_pcg,
                     rap, run_pcg, stationary_solve)
from mgbench.cli import run_experiment
from mgbench.verify import check_error_representation, check_two_grid_factor

SEED = 20240501

REFERENCE_V_COUNTS = (9, 11, 12, 13, 13)      # published counts, k = 5..9
TABLE1_TOLERANCE = 3

P1 = CycleParams(n_inner=1)
P2 = CycleParams(n_inner=2)


def _report(num, name, ok, detail):
    print("ACCEPTANCE %2d %-34s %s  (%s)" % (num, name,
                                             "PASS" if ok else "FAIL", detail))
    return ok


def _experiment(problem, **overrides):
    config = {
        "problem": problem,
        "cycles": ["v", "amli", "amli-tilde"],
        "npcg": [1, 2],
        "truncation": "full",
        "smoother": "gs",
        "weight": 1.0,
        "sweeps": 1,
        "theta": 0.08,
        "min_coarse": 50,
        "max_levels": 20,
        "tol": 1e-6,
        "max_iter": 2000,
        "seed": SEED,
    }
    config.update(overrides)
    return run_experiment(config)


def _counts(rows, col_labels, column):
    i = col_labels.index(column)
    return [row[i].iterations if row[i].converged else 10 ** 9
            for _, row in rows]


@pytest.fixture(scope="module")
def poisson_hierarchies():
    return {k: build_geometric("poisson", k) for k in range(2, 7)}


@pytest.fixture(scope="module")
def jump_hierarchy():
    return build_geometric("jump", 6)


def test_criterion_01_table1_trend():
    t0 = time.perf_counter()
    rows, cols = _experiment("poisson", k_range=[5, 6, 7, 8, 9])
    elapsed = time.perf_counter() - t0
    v = _counts(rows, cols, "V")
    bt2 = _counts(rows, cols, "Btilde_npcg2")
    within = all(abs(a - b) <= TABLE1_TOLERANCE
                 for a, b in zip(v, REFERENCE_V_COUNTS))
    nondec = all(a <= b for a, b in zip(v, v[1:]))
    bt2_const = len(set(bt2)) == 1 and bt2[0] <= 6
    never_exceed = True
    for label in ("Bhat_npcg1", "Bhat_npcg2", "Btilde_npcg1", "Btilde_npcg2"):
        c = _counts(rows, cols, label)
        never_exceed &= all(a <= b for a, b in zip(c, v))
    ok = within and nondec and bt2_const and never_exceed and elapsed < 120.0
    detail = "V=%s Btilde2=%s %.0fs" % (v, bt2, elapsed)
    assert _report(1, "table1_poisson_trend", ok, detail), detail


def test_criterion_02_table2_trend():
    t0 = time.perf_counter()
    rows, cols = _experiment("jump", k_range=[5, 6, 7, 8])
    elapsed = time.perf_counter() - t0
    v = _counts(rows, cols, "V")
    bt2 = _counts(rows, cols, "Btilde_npcg2")
    growth = v[-1] / v[0]
    ok = (growth >= 1.5 and max(bt2) - min(bt2) <= 2 and elapsed < 180.0)
    detail = "V=%s (x%.2f) Btilde2=%s %.0fs" % (v, growth, bt2, elapsed)
    assert _report(2, "table2_jump_trend", ok, detail), detail


def test_criterion_03_table3_trend():
    t0 = time.perf_counter()
    rows, cols = _experiment("ua_poisson", sizes=[3969, 16129, 65025],
                             npcg=[2], sweeps=2)
    elapsed = time.perf_counter() - t0
    v = _counts(rows, cols, "V")
    bh2 = _counts(rows, cols, "Bhat_npcg2")
    bt2 = _counts(rows, cols, "Btilde_npcg2")
    superlinear = (v[1] - v[0] > 0) and (v[2] - v[1] > v[1] - v[0])
    bh2_band = max(bh2) - min(bh2) <= 4
    bt2_band = max(bt2) - min(bt2) <= 4
    ok = superlinear and bh2_band and bt2_band and elapsed < 300.0
    detail = ("V=%s Bhat2=%s (width %d) Btilde2=%s (width %d) %.0fs"
              % (v, bh2, max(bh2) - min(bh2), bt2, max(bt2) - min(bt2), elapsed))
    assert _report(3, "table3_ua_trend", ok, detail), detail


def test_criterion_04_pcg_orthogonality(poisson_hierarchies):
    # 100 solves: 20 per level k=2..6; three full PCG steps keep every
    # residual far enough above the floating-point floor for the relative
    # orthogonality measurement to be meaningful
    params = CycleParams(n_inner=3)
    worst_dir = 0.0
    worst_res = 0.0
    solves = 0
    for k in range(2, 7):
        h = poisson_hierarchies[k]
        A = h.finest.A
        rng = np.random.default_rng(SEED + k)
        for _ in range(20):
            f = rng.standard_normal(A.shape[0])
            state = run_pcg(A, lambda g: apply_amli(h, h.n_levels, g, P1),
                            f, params)
            solves += 1
            dirs = state.directions
            for i in range(len(dirs)):
                for j in range(i):
                    val = abs(np.dot(dirs[i][1], dirs[j][0]))
                    val /= np.sqrt(dirs[i][2] * dirs[j][2])
                    worst_dir = max(worst_dir, val)
            for i in range(1, len(state.residuals)):
                r = state.residuals[i]
                nr = np.linalg.norm(r)
                for j in range(i):
                    p = dirs[j][0]
                    val = abs(np.dot(r, p)) / (nr * np.linalg.norm(p))
                    worst_res = max(worst_res, val)
    ok = worst_dir <= 1e-10 and worst_res <= 1e-10 and solves == 100
    detail = "dir=%.2e res=%.2e over %d solves" % (worst_dir, worst_res, solves)
    assert _report(4, "pcg_orthogonality", ok, detail), detail


def test_criterion_05_key_identity(poisson_hierarchies):
    worst = 0.0
    count = 0
    for k in range(2, 7):
        h = poisson_hierarchies[k]
        A = h.finest.A
        rng = np.random.default_rng(SEED + 10 * k)
        for params in (P1, P2):
            for _ in range(10):
                v = rng.standard_normal(A.shape[0])
                count += 1
                e = v - apply_amli_tilde(h, h.n_levels, A @ v, params)
                gap = abs(a_norm(A, e) ** 2 - np.dot(A @ e, v))
                worst = max(worst, gap / a_norm(A, v) ** 2)
    ok = worst <= 1e-10 and count == 100
    detail = "max gap %.2e over %d samples" % (worst, count)
    assert _report(5, "pcg_energy_identity", ok, detail), detail


def _chain_slacks(h, params, samples, seed):
    worst = np.inf
    for k in range(2, h.n_levels + 1):
        A = h.level(k).A
        rng = np.random.default_rng(seed + k)
        for _ in range(samples):
            v = rng.standard_normal(A.shape[0])
            nv2 = a_norm(A, v) ** 2
            Av = A @ v
            q_t = np.dot(A @ (v - apply_amli_tilde(h, k, Av, params)), v)
            q_h = np.dot(A @ (v - apply_amli(h, k, Av, params)), v)
            q_v = np.dot(A @ (v - apply_v_cycle(h, k, Av)), v)
            worst = min(worst, q_t / nv2, (q_h - q_t) / nv2, (q_v - q_h) / nv2)
    return worst


def test_criterion_06_symmetric_chain(poisson_hierarchies, jump_hierarchy):
    worst = np.inf
    for h in (poisson_hierarchies[6], jump_hierarchy):
        for params in (P1, P2):
            worst = min(worst, _chain_slacks(h, params, 100, SEED))
    ok = worst >= -1e-12
    detail = "min slack %.2e (both problems, n=1,2)" % worst
    assert _report(6, "symmetric_comparison_chain", ok, detail), detail


def _ns_slacks(h, params, samples, seed):
    worst = np.inf
    for k in range(2, h.n_levels + 1):
        A = h.level(k).A
        rng = np.random.default_rng(seed + k)
        for _ in range(samples):
            v = rng.standard_normal(A.shape[0])
            nv = a_norm(A, v)
            Av = A @ v
            r_t = a_norm(A, v - apply_amli_tilde_ns(h, k, Av, params))
            r_h = a_norm(A, v - apply_amli_ns(h, k, Av, params))
            r_b = a_norm(A, v - apply_backslash(h, k, Av))
            worst = min(worst, (r_h - r_t) / nv, (r_b - r_h) / nv)
    return worst


def test_criterion_07_nonsymmetric_chain(poisson_hierarchies, jump_hierarchy):
    worst = np.inf
    for h in (poisson_hierarchies[6], jump_hierarchy):
        for trunc in ("full", 0, "sd"):
            for n in (1, 2):
                params = CycleParams(n_inner=n, truncation=trunc,
                                     kind="amli_nonsymmetric")
                worst = min(worst, _ns_slacks(h, params, 100, SEED))
    ok = worst >= -1e-12
    detail = "min slack %.2e (full, window(0), sd)" % worst
    assert _report(7, "nonsymmetric_comparison_chain", ok, detail), detail


def test_criterion_08_one_step_scalar_relation(poisson_hierarchies):
    rng = np.random.default_rng(SEED)
    worst = 0.0

    def check(A, precond, f):
        nonlocal worst
        bf = precond(f)
        alpha = np.dot(bf, f) / np.dot(A @ bf, bf)
        out = nonlinear_pcg(A, precond, f, P1)
        worst = max(worst, np.linalg.norm(out - alpha * bf)
                    / np.linalg.norm(out))

    for _ in range(25):
        M = rng.standard_normal((30, 30))
        A = as_csr(sp.csr_matrix(M @ M.T + 30.0 * np.eye(30)))
        d = 1.0 / A.diagonal()
        f = rng.standard_normal(30)
        check(A, lambda g: d * g + 0.1 * np.tanh(g), f)
    h = poisson_hierarchies[3]
    for _ in range(25):
        f = rng.standard_normal(h.finest.A.shape[0])
        check(h.finest.A, lambda g: apply_amli(h, 3, g, P1), f)
    ok = worst <= 1e-13
    detail = "max deviation %.2e" % worst
    assert _report(8, "one_step_scalar_relation", ok, detail), detail


def test_criterion_09_error_representation(poisson_hierarchies):
    h = poisson_hierarchies[3]
    worst = 0.0
    for k in (2, 3):
        rep = check_error_representation(h, k, seed=SEED)
        worst = max(worst, rep.violation)
    ok = worst <= 1e-12
    detail = "max identity violation %.2e" % worst
    assert _report(9, "error_representation", ok, detail), detail


def test_criterion_10_two_grid_and_uniform_n2(poisson_hierarchies):
    factor = check_two_grid_factor(poisson_hierarchies[3], 3)
    counts = []
    for k in range(3, 9):
        h = (poisson_hierarchies[k] if k in poisson_hierarchies
             else build_geometric("poisson", k))
        A, f = assemble_poisson(k)
        rep = stationary_solve(
            lambda r: apply_amli_tilde(h, h.n_levels, r, P2), A, f, tol=1e-6)
        counts.append(rep.iterations if rep.converged else 10 ** 9)
    level_independent = max(counts) - min(counts) <= 2 and max(counts) <= 6
    ok = factor < 0.5 and level_independent
    detail = "two-grid factor %.3f, Btilde(2) counts k=3..8 %s" % (factor, counts)
    assert _report(10, "two_grid_factor_and_uniform_n2", ok, detail), detail


def test_criterion_11_galerkin_consistency():
    worst = 0.0
    for k in range(2, 7):
        A_fine, _ = assemble_poisson(k)
        A_coarse, _ = assemble_poisson(k - 1)
        diff = abs(rap(geometric_prolongator(k), A_fine) - A_coarse)
        worst = max(worst, diff.max() if diff.nnz else 0.0)
    ok = worst <= 1e-12
    detail = "max entrywise gap %.2e (k=2..6)" % worst
    assert _report(11, "galerkin_consistency", ok, detail), detail
