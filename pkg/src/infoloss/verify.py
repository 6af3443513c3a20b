"""Verification suites: randomized exact checks, oracle comparisons and audits.

Each suite returns a ``SuiteReport``; the CLI only formats it. Failing
instances are kept in serializable form so they can be replayed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds as B
from . import partitions as P
from .estimators import EstimatorConfig, EvalContext, evaluate_partition
from .finite_info import DiscreteJoint, prior_error
from .models import (
    ScaleInvariant,
    TwoClass1D,
    build,
    sample,
    two_class_mi_quadrature,
    two_class_sign_mi,
)
from .rng import DEFAULT_SEED, stream

SUITES = ("theorem2", "bounds", "example4d", "partitions")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, **detail):
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks],
                "table": self.table, "failures": self.failures}


# ---------------------------------------------------------------- random finite models

def random_joint(rng: np.random.Generator, max_symbols: int = 20, max_labels: int = 5) -> np.ndarray:
    n_x = int(rng.integers(1, max_symbols + 1))
    M = int(rng.integers(2, max_labels + 1))
    w = rng.dirichlet(np.full(n_x * M, float(rng.choice([0.3, 1.0, 3.0]))))
    if rng.random() < 0.3:
        w[rng.random(w.size) < 0.3] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    w = w / w.sum()
    return w.reshape(n_x, M)


def random_cells(rng: np.random.Generator, n_x: int) -> list[list[int]]:
    k = int(rng.integers(1, n_x + 1))
    assign = rng.integers(0, k, n_x)
    return [np.flatnonzero(assign == c).tolist() for c in np.unique(assign)]


def theorem2_instances(seed: int, trials: int):
    rng = stream(seed, "verify", "theorem2")
    for _ in range(trials):
        mass = random_joint(rng)
        yield mass, random_cells(rng, mass.shape[0])


def suite_theorem2(seed: int = DEFAULT_SEED, trials: int = 200) -> SuiteReport:
    rep = SuiteReport("theorem2")
    worst = {"chain": 0.0, "ol_identity": 0.0, "wil_identity": 0.0}
    bad_positive_gap = 0
    for t, (mass, cells) in enumerate(theorem2_instances(seed, trials)):
        joint = DiscreteJoint(mass)
        r = B.theorem2_check(joint, cells)
        chain = min(r.wil - r.bound, r.bound)
        d_ol = abs(r.ol - r.ol_decomposed)
        d_wil = abs(r.wil - r.wil_decomposed)
        worst["chain"] = min(worst["chain"], chain)
        worst["ol_identity"] = max(worst["ol_identity"], d_ol)
        worst["wil_identity"] = max(worst["wil_identity"], d_wil)
        positive_gap_ok = not (r.ol > 1e-9 and r.bound <= 0)
        bad_positive_gap += not positive_gap_ok
        if not (r.holds(1e-10) and d_ol <= 1e-12 and d_wil <= 1e-12 and positive_gap_ok):
            rep.failures.append({"trial": t, "mass": mass.tolist(), "cells": cells,
                                 "wil": r.wil, "bound": r.bound, "ol": r.ol})
    rep.add("wil >= bound >= 0", worst["chain"] >= -1e-10, worst_slack=worst["chain"], trials=trials)
    rep.add("operation loss decomposition", worst["ol_identity"] <= 1e-12,
            max_abs_diff=worst["ol_identity"])
    rep.add("weak information loss decomposition", worst["wil_identity"] <= 1e-12,
            max_abs_diff=worst["wil_identity"])
    rep.add("positive operation loss gives positive bound", bad_positive_gap == 0,
            violations=bad_positive_gap)
    return rep


# ---------------------------------------------------------------- bounds

BOUND_EPS = (0.05, 0.1, 0.2, 0.3)
BOUND_M = (2, 3, 4)


def binary_pairs(seed: int, count: int = 20):
    """Random (mu, eps) pairs with two labels and eps strictly inside [0, prior)."""
    rng = stream(seed, "verify", "binary-pairs")
    for _ in range(count):
        p = float(rng.uniform(0.5, 0.95))
        mu = np.array([p, 1 - p])
        yield mu, float(rng.uniform(0.0, 1 - p))


def random_feasible_pairs(seed: int, count: int):
    rng = stream(seed, "verify", "entropy-inequality")
    for _ in range(count):
        M = int(rng.integers(2, 7))
        mu = rng.dirichlet(np.full(M, float(rng.choice([0.5, 1.0, 4.0]))))
        prior = prior_error(mu)
        if prior <= 1e-9:
            mu = np.full(M, 1.0 / M)
            prior = prior_error(mu)
        yield mu, float(prior * rng.uniform(1e-6, 1.0))


def suite_bounds(seed: int = DEFAULT_SEED, trials: int = 1000, grid: int = 200) -> SuiteReport:
    rep = SuiteReport("bounds")
    grid = max(int(grid), 200)

    worst = 0.0
    for mu, eps in binary_pairs(seed):
        f = B.f_min_mi(mu, eps)
        bf = B.f_min_mi_bruteforce(mu, eps, grid=2000)
        worst = max(worst, abs(f - bf))
        if abs(f - bf) > 1e-3:
            rep.failures.append({"check": "closed form vs channel grid", "mu": mu.tolist(),
                                 "eps": eps, "closed_form": f, "grid": bf})
    rep.add("closed form matches channel grid", worst <= 1e-3, max_abs_diff=worst, pairs=20)
    trivial = [B.f_min_mi(mu, prior_error(mu)) for mu, _ in binary_pairs(seed)]
    rep.add("trivial regime gives zero", all(v == 0.0 for v in trivial))

    ok_all = True
    for M in BOUND_M:
        for eps in BOUND_EPS:
            lb = B.i_loss_lower_bound(eps, M)
            bf = B.i_loss_bruteforce(eps, M, grid)
            ok = lb > 0 and bf >= lb - 2.0 / grid
            rep.table.append({"M": M, "eps": eps, "lower_bound": lb, "bruteforce": bf, "ok": ok})
            if not ok:
                ok_all = False
                rep.failures.append({"check": "I_loss bound", "M": M, "eps": eps,
                                     "lower_bound": lb, "bruteforce": bf, "grid": grid})
    rep.add("grid minimum >= closed-form lower bound > 0", ok_all, grid=grid)

    worst = math.inf
    for mu, eps in random_feasible_pairs(seed, trials):
        c = B.max_entropy_inequality_check(mu, eps)
        worst = min(worst, c.slack)
        if not c.holds:
            rep.failures.append({"check": "entropy inequality", "mu": mu.tolist(), "eps": eps,
                                 "slack": c.slack})
    rep.add("entropy inequality on random pmfs", worst >= -1e-12, min_slack=worst, trials=trials)
    return rep


# ---------------------------------------------------------------- three-cell construction

def example4d_floor(kind: TwoClass1D) -> float:
    """I(X;Y) - I(sign X; Y): the information the shrinking middle cell cannot recover."""
    return two_class_mi_quadrature(kind) - two_class_sign_mi(kind)


def suite_example4d(seed: int = DEFAULT_SEED, n: int = 100_000, levels=range(1, 13),
                    K: float = 1.0, sigma: float = 1.0) -> SuiteReport:
    rep = SuiteReport("example4d")
    kind = TwoClass1D(K, sigma)
    model = build(kind)
    ctx = EvalContext.draw(model, EstimatorConfig(n_eval=n, n_cal=n, seed=seed))
    rows = []
    for i in levels:
        pt = evaluate_partition(ctx, P.three_cell_partition(i), "three-cell", None, seed)
        rows.append({"i": i, "il": pt.il, "se_il": pt.se_il, "wil": pt.wil, "se_wil": pt.se_wil,
                     "ol": pt.ol, "se_ol": pt.se_ol})
    rep.table = rows
    floor = example4d_floor(kind)
    last = rows[-1]
    rep.add("weak information loss vanishes", last["wil"] < 0.01, i=last["i"], wil=last["wil"])
    rep.add("limit information loss is positive", floor > 0, floor=floor)
    rep.add("information loss stays at the limit", last["il"] >= floor - 3 * last["se_il"],
            il=last["il"], se_il=last["se_il"], floor=floor)
    rep.add("operation loss vanishes", last["ol"] < 0.005, ol=last["ol"])
    if not rep.passed:
        rep.failures.append({"K": K, "sigma": sigma, "n": n, "seed": seed, "rows": rows})
    return rep


# ---------------------------------------------------------------- partition audits

def membership_audit(p: P.Partition, X: np.ndarray) -> bool:
    """Every point lies in exactly one listed cell, and that cell's id is what quantize says."""
    ids = p.quantize(X)
    cells = p.cells()
    hits = np.zeros(X.shape[0], dtype=np.int64)
    owner = np.full(X.shape[0], -1, dtype=np.int64)
    for c in cells:
        m = c.geometry.contains(X)
        hits += m
        owner[m] = c.id
    return bool(np.all(hits == 1) and np.array_equal(owner, ids))


def count_audit(p) -> bool:
    return bool(np.all(p.cell_counts() >= p.l_n))


def median_audit(p: P.TreePartition) -> bool:
    return all(n_left == -(-n // 2) for n, n_left in p.splits)


def suite_partitions(seed: int = DEFAULT_SEED, n_points: int = 100_000) -> SuiteReport:
    rep = SuiteReport("partitions")
    model = build(ScaleInvariant())
    rng = stream(seed, "verify", "partitions")
    X = rng.normal(scale=2.5, size=(n_points, 2))
    # put some points exactly on cell boundaries
    X[: n_points // 20] = np.round(X[: n_points // 20] * 4) / 4
    data = sample(model, 2000, seed, tag="verify/construct").points
    schemes = {
        "constant": P.ConstantPartition(2),
        "product": P.product_partition(1, 2),
        "uniform-grid": P.uniform_grid(5.5, 9, 2),
        "gessaman": P.gessaman(data, 20),
        "tsp": P.tsp(data, 20),
        "asymmetric": P.asymmetric_dyadic(2),
        "quadrant": P.QuadrantPartition(),
        "projected": P.projected_uniform((1.0, 1.0), (-3.0, 3.0), 8),
        "projected-radial": P.projected_uniform((1.0, 1.0), (0.0, 4.0), 8, radial=True),
    }
    for name, p in schemes.items():
        rep.add(f"{name}: every point in exactly one cell", membership_audit(p, X), cells=p.size)
    line = np.round(rng.normal(scale=0.01, size=(2000, 1)) * 2 ** 10) / 2 ** 10
    three = P.three_cell_partition(8)
    rep.add("three-cell: every point in exactly one cell", membership_audit(three, line))

    grid = P.product_partition(2, 2)
    boxes = [c.geometry for c in grid.cells() if isinstance(c.geometry, P.Box)]
    vol = sum(float(np.prod(np.subtract(b.hi, b.lo))) for b in boxes)
    inside = all(min(b.lo) >= -2 and max(b.hi) <= 2 for b in boxes)
    rep.add("product boxes tile [-m, m)^d", inside and abs(vol - 16.0) < 1e-9 and len(boxes) == 256,
            volume=vol, boxes=len(boxes))

    counts_ok = medians_ok = True
    for n in (100, 1000, 10_000):
        pts = sample(model, n, seed, tag=f"verify/audit/{n}").points
        for expo in (0.6, 0.7):
            l_n = max(1, int(round(n ** expo)))
            g, t = P.gessaman(pts, l_n), P.tsp(pts, l_n)
            counts_ok &= count_audit(g) and count_audit(t)
            medians_ok &= median_audit(t)
    rep.add("every Gessaman and TSP cell holds >= l_n construction points", counts_ok)
    rep.add("TSP splits leave ceil(n/2) points on the closed side", medians_ok)

    same = np.ones((40, 2))
    g = P.gessaman(same, 4)
    t = P.tsp(same, 4)
    first = g.cell_counts()[0] == 40 and g.cell_counts()[1:].sum() == 0
    rep.add("identical points: Gessaman keeps T^d cells, all points in the first",
            first and g.size == g.T ** 2 and np.all(g.quantize(same) == 0), T=g.T)
    rep.add("identical points: TSP stops at the root", t.size == 1)

    fractions = shrink_trend(seed)
    rep.add("wide-cell mass is non-increasing in n",
            all(a >= b for a, b in zip(fractions, fractions[1:])), fractions=fractions)
    return rep


def shrink_trend(seed: int, sizes=(100, 1000, 10_000), delta: float = 3.5, expo: float = 0.7,
                 n_probe: int = 20_000) -> list[float]:
    model = build(ScaleInvariant())
    probe = sample(model, n_probe, seed, tag="verify/probe")
    out = []
    for n in sizes:
        pts = sample(model, n, seed, tag=f"verify/shrink/{n}").points
        p = P.gessaman(pts, max(1, int(round(n ** expo))))
        out.append(P.shrink_diagnostic(p, probe, delta))
    return out


def run_suite(name: str, seed: int = DEFAULT_SEED, trials: int | None = None,
              grid: int | None = None) -> SuiteReport:
    if name == "theorem2":
        return suite_theorem2(seed, trials or 200)
    if name == "bounds":
        return suite_bounds(seed, trials or 1000, grid or 200)
    if name == "example4d":
        return suite_example4d(seed)
    if name == "partitions":
        return suite_partitions(seed)
    raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
