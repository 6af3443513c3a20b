"""Extremal error-vs-entropy machinery.

The central object is the minimum-MI distribution R(mu, eps): among all
channels from the label to a finite observation whose induced MPE equals
``eps``, the least informative one leaves a label marginal whose entropy is
H(R(mu, eps)).  R is obtained from mu by moving ``prior_error(mu) - eps`` of
mass onto the mode and water-filling the next K-1 entries down to a common
level theta.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .finite_info import (
    DiscreteJoint,
    DomainError,
    Pmf,
    ValidationError,
    bayes_error,
    entropy,
    mutual_information,
    prior_error,
)

EPS_TOL = 1e-12


@dataclass(frozen=True)
class ExtremalResult:
    pmf_out: Pmf
    K: int
    theta: float
    eps_bar: float
    order: np.ndarray = field(repr=False)  # sorted position -> original label


def _sort_desc(probs: np.ndarray) -> np.ndarray:
    # stable: descending probability, ascending label among ties
    return np.lexsort((np.arange(probs.size), -probs))


def _waterfill(sorted_probs: np.ndarray, eps_bar: float) -> tuple[int, float]:
    M = sorted_probs.size
    partial = 0.0
    best = None
    for K in range(2, M + 1):
        partial += sorted_probs[K - 1]
        theta = (partial - eps_bar) / (K - 1)
        next_ok = K == M or theta >= sorted_probs[K] - EPS_TOL
        if theta < sorted_probs[K - 1] + EPS_TOL and next_ok:
            return K, max(theta, 0.0)
        # keep the closest candidate in case rounding rejects every K
        gap = max(theta - sorted_probs[K - 1], 0.0) + (
            0.0 if K == M else max(sorted_probs[K] - theta, 0.0))
        if best is None or gap < best[0]:
            best = (gap, K, max(theta, 0.0))
    return best[1], best[2]


def extremal_pmf(mu, epsilon: float) -> ExtremalResult:
    """Return R(mu, epsilon) in the caller's label order."""
    probs = mu.probs if isinstance(mu, Pmf) else Pmf(mu).probs
    prior = prior_error(probs)
    if epsilon < 0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    if epsilon > prior + EPS_TOL:
        raise DomainError(
            f"trivial regime exceeded: epsilon={epsilon} > prior error {prior}")
    M = probs.size
    order = _sort_desc(probs)
    s = probs[order]
    eps_bar = max(prior - epsilon, 0.0)
    if M == 1 or eps_bar == 0.0:
        K = min(2, M)
        theta = float(s[1]) if M > 1 else 0.0
        return ExtremalResult(Pmf(probs.copy()), K, theta, 0.0, order)

    K, theta = _waterfill(s, eps_bar)
    out_sorted = s.copy()
    out_sorted[0] = s[0] + eps_bar
    out_sorted[1:K] = theta
    out = np.empty_like(out_sorted)
    out[order] = out_sorted
    # absorb rounding so the result stays a valid pmf
    out = np.clip(out, 0.0, 1.0)
    out /= out.sum()
    return ExtremalResult(Pmf(out), K, float(theta), float(eps_bar), order)


def f_min_mi(mu, epsilon: float) -> float:
    """Minimum MI over channels whose induced MPE equals epsilon."""
    probs = mu.probs if isinstance(mu, Pmf) else Pmf(mu).probs
    res = extremal_pmf(probs, epsilon)
    if res.eps_bar == 0.0:
        return 0.0
    return max(entropy(probs) - entropy(res.pmf_out), 0.0)


def _binary_channel_mi(mu1, mu2, a, b):
    # channel rho(x=0|y=0)=a, rho(x=0|y=1)=b
    p = np.stack([mu1 * a, mu2 * b, mu1 * (1 - a), mu2 * (1 - b)])
    px0 = p[0] + p[1]
    px1 = p[2] + p[3]
    marg = np.stack([px0, px0, px1, px1])
    py = np.array([mu1, mu2, mu1, mu2])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log(p / (marg * py)), 0.0)
    return t.sum(axis=0)


def _binary_channel_error(mu1, mu2, a, b):
    return 1.0 - np.maximum(mu1 * a, mu2 * b) - np.maximum(mu1 * (1 - a), mu2 * (1 - b))


def f_min_mi_bruteforce(mu, epsilon: float, grid: int = 2000) -> float:
    """Channel-search oracle for ``f_min_mi`` with two labels and two symbols.

    For each ``a = rho(x=0|y=0)`` on a uniform grid, the MPE is piecewise
    linear in ``b = rho(x=0|y=1)``; every ``b`` with MPE exactly ``epsilon``
    is solved for in closed form, so each evaluated channel is feasible and
    the returned value upper-bounds the true minimum.
    """
    probs = mu.probs if isinstance(mu, Pmf) else Pmf(mu).probs
    if probs.size != 2:
        raise DomainError("brute-force channel oracle supports M = 2 only")
    if grid < 100:
        raise DomainError("grid must be >= 100")
    if epsilon < 0 or epsilon > prior_error(probs) + EPS_TOL:
        raise DomainError(f"infeasible epsilon {epsilon}")
    mu1, mu2 = float(probs[0]), float(probs[1])
    if mu2 == 0.0:
        return 0.0
    a = np.linspace(0.0, 1.0, grid + 1)
    # breakpoints of the piecewise-linear MPE in b
    b1 = np.clip(mu1 * a / mu2, 0.0, 1.0)
    b2 = np.clip(1.0 - mu1 * (1 - a) / mu2, 0.0, 1.0)
    knots = np.sort(np.stack([np.zeros_like(a), b1, b2, np.ones_like(a)]), axis=0)
    cand_a, cand_b = [], []
    fine = np.linspace(0.0, 1.0, grid + 1)
    for lo, hi in zip(knots[:-1], knots[1:]):
        e_lo = _binary_channel_error(mu1, mu2, a, lo)
        e_hi = _binary_channel_error(mu1, mu2, a, hi)
        span = e_hi - e_lo
        flat = np.abs(span) < 1e-15
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(flat, np.nan, (epsilon - e_lo) / span)
        hit = ~flat & (t >= -1e-12) & (t <= 1 + 1e-12)
        cand_a.append(a[hit])
        cand_b.append(lo[hit] + np.clip(t[hit], 0, 1) * (hi[hit] - lo[hit]))
        # a flat piece at the target level: every b on it is feasible
        on_level = flat & (np.abs(e_lo - epsilon) <= 1e-12) & (hi > lo)
        for i in np.flatnonzero(on_level):
            bs = fine[(fine >= lo[i]) & (fine <= hi[i])]
            bs = np.concatenate([[lo[i], hi[i]], bs])
            cand_a.append(np.full(bs.size, a[i]))
            cand_b.append(bs)
    ca = np.concatenate(cand_a)
    cb = np.concatenate(cand_b)
    if ca.size == 0:
        raise DomainError(f"no feasible channel found for epsilon {epsilon}")
    err = _binary_channel_error(mu1, mu2, ca, cb)
    ok = np.abs(err - epsilon) <= 1e-9
    return float(max(_binary_channel_mi(mu1, mu2, ca[ok], cb[ok]).min(), 0.0))


def f1(theta: float, epsilon: float) -> float:
    """(theta+eps) ln(1/(theta+eps)) - theta ln(1/theta); strictly decreasing in theta."""
    if theta <= 0 or epsilon <= 0 or theta + epsilon > 1 + EPS_TOL:
        raise DomainError(f"f1 needs theta > 0, eps > 0, theta + eps <= 1; got {theta}, {epsilon}")
    s = theta + epsilon
    return float(-s * np.log(s) + theta * np.log(theta))


def i_loss_lower_bound(epsilon: float, M: int) -> float:
    """Closed-form positive lower bound on I_loss(epsilon, M)."""
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    if not 0 < epsilon <= 1 - 1 / M + EPS_TOL:
        raise DomainError(f"epsilon must lie in (0, 1 - 1/M], got {epsilon}")
    shifted = 0.5 - epsilon / (M - 1)
    if shifted <= 0 or epsilon > 0.5 + EPS_TOL:
        raise DomainError(
            f"closed form inapplicable: needs eps <= 1/2 and eps < (M-1)/2, got eps={epsilon}, M={M}")
    return f1(shifted, epsilon) - f1(0.5, epsilon)


def _sorted_simplex_grid(M: int, grid: int) -> np.ndarray:
    """Points v = c/grid with integer c sorted descending and summing to grid."""
    rows = []

    def rec(prefix, remaining, cap, slots):
        if slots == 1:
            if remaining <= cap:
                rows.append(prefix + [remaining])
            return
        lo = -(-remaining // slots)  # largest part must cover the average
        for c in range(min(cap, remaining), lo - 1, -1):
            rec(prefix + [c], remaining - c, c, slots - 1)

    rec([], grid, grid, M)
    return np.array(rows, dtype=float) / grid


def _entropy_rows(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, P * np.log(P), 0.0)
    return -t.sum(axis=1)


def _extremal_rows(V: np.ndarray, eps_bar: float) -> np.ndarray:
    """Row-wise R(v, prior(v) - eps_bar) for rows already sorted descending."""
    n, M = V.shape
    out = V.copy()
    out[:, 0] += eps_bar
    done = np.zeros(n, dtype=bool)
    partial = np.zeros(n)
    for K in range(2, M + 1):
        partial += V[:, K - 1]
        theta = (partial - eps_bar) / (K - 1)
        nxt = V[:, K] if K < M else np.full(n, -np.inf)
        accept = ~done & (theta < V[:, K - 1] + EPS_TOL) & (theta >= nxt - EPS_TOL)
        if K == M:
            accept = ~done
        idx = np.flatnonzero(accept)
        out[np.ix_(idx, np.arange(1, K))] = np.maximum(theta[idx], 0.0)[:, None]
        done |= accept
    return out


def i_loss_bruteforce(epsilon: float, M: int, grid: int = 200) -> float:
    """Grid minimum of H(v) - H(R(v, prior(v) - epsilon)) over prior(v) >= epsilon."""
    if M not in (2, 3, 4):
        raise DomainError(f"brute force supports M in {{2, 3, 4}}, got {M}")
    if grid < 50:
        raise DomainError("grid must be >= 50")
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if epsilon > 1 - 1 / M + EPS_TOL:
        raise DomainError(f"empty feasible set: epsilon {epsilon} > 1 - 1/M")
    V = _sorted_simplex_grid(M, grid)
    V = V[1.0 - V[:, 0] >= epsilon - EPS_TOL]
    if V.shape[0] == 0:
        # the lattice misses the feasible region; its only point may be uniform
        V = np.full((1, M), 1.0 / M)
    R = _extremal_rows(V, epsilon)
    return float(max((_entropy_rows(V) - _entropy_rows(R)).min(), 0.0))


@dataclass(frozen=True)
class InequalityCheck:
    holds: bool
    slack: float
    lhs: float
    rhs: float
    K: int
    theta: float


def max_entropy_inequality_check(mu, epsilon: float, tol: float = 1e-12) -> InequalityCheck:
    """Check sum_{j=2..K} mu_(j) ln(1/mu_(j)) >= (theta+eps) ln(1/(theta+eps)) + (K-2) theta ln(1/theta)."""
    probs = mu.probs if isinstance(mu, Pmf) else Pmf(mu).probs
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    prior = prior_error(probs)
    if epsilon > prior + EPS_TOL:
        raise DomainError(f"epsilon {epsilon} exceeds prior error {prior}")
    res = extremal_pmf(probs, max(prior - epsilon, 0.0))
    s = probs[res.order]
    K, theta = res.K, res.theta
    mids = s[1:K]
    lhs = float(-(mids[mids > 0] * np.log(mids[mids > 0])).sum())
    te = theta + epsilon
    rhs = float(-te * np.log(te)) if te > 0 else 0.0
    if theta > 0:
        rhs += float(-(K - 2) * theta * np.log(theta))
    slack = lhs - rhs
    return InequalityCheck(slack >= -tol, slack, lhs, rhs, K, theta)


@dataclass(frozen=True)
class CellTerm:
    cell: int
    mass: float
    g: float
    eps: float
    entropy_gap: float
    cond_mi: float


@dataclass(frozen=True)
class Theorem2Report:
    wil: float
    bound: float
    ol: float
    per_cell: list
    wil_decomposed: float
    ol_decomposed: float

    def holds(self, tol: float = 1e-10) -> bool:
        return self.wil >= self.bound - tol and self.bound >= -tol


def mpe_labeling(joint) -> np.ndarray:
    """MPE label of every observation symbol (0-based, smallest label on ties)."""
    mass = joint.mass if isinstance(joint, DiscreteJoint) else np.asarray(joint, dtype=float)
    return np.argmax(mass, axis=1)


def _check_partition(cells, n_symbols: int) -> list[list[int]]:
    cells = [list(map(int, c)) for c in cells]
    flat = sorted(itertools.chain.from_iterable(cells))
    if flat != list(range(n_symbols)) or any(len(c) == 0 for c in cells):
        raise ValidationError("cells must partition the observation symbols into non-empty groups")
    return cells


def theorem2_check(joint, cells) -> Theorem2Report:
    """Evaluate both sides of the weak-information-loss bound on a finite model.

    ``joint`` is a table over observation symbols x labels and ``cells``
    groups the observation symbols (the representation U). Returns the global
    weak information loss I((U~,U);Y) - I(U;Y), the per-cell lower bound, the
    operation loss, and the per-cell decompositions of both losses.
    """
    mass = joint.mass if isinstance(joint, DiscreteJoint) else DiscreteJoint(joint).mass
    n_x, M = mass.shape
    cells = _check_partition(cells, n_x)
    mpe = mpe_labeling(mass)

    cell_of = np.empty(n_x, dtype=int)
    for j, c in enumerate(cells):
        cell_of[c] = j
    k = len(cells)
    joint_u = np.zeros((k, M))
    np.add.at(joint_u, cell_of, mass)
    joint_uu = np.zeros((k * M, M))
    np.add.at(joint_uu, cell_of * M + mpe, mass)

    wil = max(mutual_information(joint_uu) - mutual_information(joint_u), 0.0)
    ol = bayes_error(joint_u) - bayes_error(mass)

    terms = []
    bound = wil_dec = ol_dec = 0.0
    for j in range(k):
        pb = joint_u[j].sum()
        if pb <= 0:
            terms.append(CellTerm(j, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        cond = joint_u[j] / pb
        # (U~, Y) restricted to the cell
        sub = joint_uu[j * M:(j + 1) * M] / pb
        prior_b = prior_error(cond)
        eps_j = float(min(max(1.0 - sub.max(axis=1).sum(), 0.0), prior_b))
        g = prior_b - eps_j
        gap = f_min_mi(cond, eps_j)
        cmi = mutual_information(sub)
        terms.append(CellTerm(j, float(pb), float(g), eps_j, gap, cmi))
        bound += pb * gap
        wil_dec += pb * cmi
        ol_dec += pb * g
    return Theorem2Report(float(wil), float(bound), float(ol), terms,
                          float(wil_dec), float(ol_dec))
