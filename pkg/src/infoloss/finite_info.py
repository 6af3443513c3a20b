"""Information and decision quantities over finite alphabets.

All logarithms are natural (results in nats). Labels are indexed from 0
internally; anything user-facing that talks about class labels uses 1..M.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when a pmf or joint table is not a valid probability."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a function."""


def _validated(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.size == 0:
        raise ValidationError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(arr < 0):
        raise ValidationError(f"{what} has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(f"{what} sums to {total!r}, not 1")
    arr /= total
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over labels 0..M-1."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _validated(self.probs, "pmf")
        if probs.ndim != 1:
            raise ValidationError("pmf must be one-dimensional")
        object.__setattr__(self, "probs", probs)

    @property
    def M(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]

    def __eq__(self, other):
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    def __repr__(self):
        return f"Pmf({np.array2string(self.probs, precision=6)})"

    @classmethod
    def uniform(cls, M: int) -> "Pmf":
        return cls(np.full(M, 1.0 / M))


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    """Joint pmf of (representation symbol, label): rows are symbols, columns labels."""

    mass: np.ndarray

    def __post_init__(self):
        mass = _validated(self.mass, "joint")
        if mass.ndim != 2:
            raise ValidationError("joint must be a 2-D table")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_counts(cls, counts) -> "DiscreteJoint":
        counts = np.asarray(counts, dtype=float)
        return cls(counts / counts.sum())

    @property
    def shape(self):
        return self.mass.shape

    def row_marginal(self) -> Pmf:
        return Pmf(self.mass.sum(axis=1))

    def label_marginal(self) -> Pmf:
        return Pmf(self.mass.sum(axis=0))

    def merge_rows(self, i: int, j: int) -> "DiscreteJoint":
        """Joint of the coarser representation that maps symbols i and j together."""
        keep = [r for r in range(self.mass.shape[0]) if r != j]
        merged = self.mass.copy()
        merged[i] += merged[j]
        return DiscreteJoint(merged[keep])


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Pmf) else Pmf(p).probs


def _as_mass(j) -> np.ndarray:
    return j.mass if isinstance(j, DiscreteJoint) else DiscreteJoint(j).mass


def _xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    return float(max(-_xlogx(_as_probs(p)).sum(), 0.0))


def binary_entropy(r: float) -> float:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"binary entropy needs r in [0, 1], got {r}")
    return float(-_xlogx(np.array([r, 1.0 - r])).sum())


def prior_error(p) -> float:
    """Error of guessing the most likely label without observations."""
    return float(1.0 - _as_probs(p).max())


def mutual_information(j) -> float:
    mass = _as_mass(j)
    pu = mass.sum(axis=1, keepdims=True)
    py = mass.sum(axis=0, keepdims=True)
    pos = mass > 0
    terms = mass[pos] * np.log(mass[pos] / (pu * py)[pos])
    return float(max(terms.sum(), 0.0))


def conditional_entropy(j) -> float:
    """Equivocation H(Y|U) of the label given the row symbol."""
    mass = _as_mass(j)
    pu = mass.sum(axis=1)
    # H(Y|U) = H(U,Y) - H(U)
    h = -_xlogx(mass).sum() + _xlogx(pu).sum()
    return float(max(h, 0.0))


def bayes_error(j) -> float:
    """Minimum probability of error of predicting the label from the row symbol."""
    mass = _as_mass(j)
    return float(max(1.0 - mass.max(axis=1).sum(), 0.0))


def map_labels(j) -> np.ndarray:
    """Per-row MAP label (0-based), smallest index on ties."""
    return np.argmax(_as_mass(j), axis=1)


def conditional_mi(j3) -> float:
    """I(A;Y|B) for a table indexed [a, b, y]."""
    mass = np.asarray(j3, dtype=float)
    if mass.ndim != 3:
        raise ValidationError("conditional_mi needs a 3-way table [a, b, y]")
    _validated(mass.ravel(), "joint")
    A, B, M = mass.shape
    joint_ab = mass.reshape(A * B, M)
    joint_b = mass.sum(axis=0)
    return max(mutual_information(joint_ab) - mutual_information(joint_b), 0.0)


def fano_upper(r: float, M: int) -> float:
    """Fano-type upper bound h(r) + r ln(M-1) on the equivocation."""
    if M < 2:
        raise DomainError(f"fano_upper needs M >= 2, got {M}")
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"fano_upper needs r in [0, 1], got {r}")
    return binary_entropy(r) + r * np.log(M - 1)
