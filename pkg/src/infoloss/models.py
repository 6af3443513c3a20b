"""Synthetic Gaussian class models, samplers and exact decision rules."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .finite_info import DomainError, Pmf, ValidationError, binary_entropy
from .rng import stream


# ---------------------------------------------------------------- model kinds

@dataclass(frozen=True)
class ScaleInvariant:
    alpha: float = 1.5
    sigma: float = 1.0


@dataclass(frozen=True)
class RotatedScaleInvariant:
    alpha: float = 1.5
    sigma: float = 1.0
    angle: float = 0.0


@dataclass(frozen=True)
class TranslationInvariant:
    spacing: float = 3.0
    sigma: float = 1.0
    angle: float = math.pi / 6
    M: int = 5


@dataclass(frozen=True)
class RotationInvariant:
    sigmas: tuple = (0.5, 1.0, 1.75, 2.75)


@dataclass(frozen=True)
class TwoClass1D:
    K: float = 1.0
    sigma: float = 1.0


MODEL_KINDS = {
    "scale": ScaleInvariant,
    "rotated-scale": RotatedScaleInvariant,
    "translation": TranslationInvariant,
    "rotation": RotationInvariant,
    "two-class-1d": TwoClass1D,
}


def kind_from_dict(spec: dict):
    """Build a model kind from ``{"name": ..., **params}``."""
    spec = dict(spec)
    name = spec.pop("name", None)
    if name not in MODEL_KINDS:
        raise ValidationError(f"unknown model kind {name!r}; choose from {sorted(MODEL_KINDS)}")
    if "sigmas" in spec:
        spec["sigmas"] = tuple(float(s) for s in spec["sigmas"])
    try:
        return MODEL_KINDS[name](**spec)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for model {name!r}: {exc}") from None


def kind_name(kind) -> str:
    for name, cls in MODEL_KINDS.items():
        if type(kind) is cls:
            return name
    raise ValidationError(f"not a model kind: {kind!r}")


# ---------------------------------------------------------------- the model

@dataclass(frozen=True, eq=False)
class GaussClassModel:
    """Class priors with isotropic Gaussian class-conditionals.

    ``means`` already include ``rotation``; ``sigmas`` are per-class standard
    deviations. ``kind`` records how the model was built but does not take
    part in equality.
    """

    priors: Pmf
    means: np.ndarray
    sigmas: np.ndarray
    rotation: float = 0.0
    kind: object = field(default=None, compare=False)

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        sigmas = np.array(self.sigmas, dtype=float).ravel()
        if means.shape[0] != self.priors.M or sigmas.size != self.priors.M:
            raise ValidationError("priors, means and sigmas must agree on M")
        if not np.all(np.isfinite(means)):
            raise ValidationError("means must be finite")
        if not np.all(sigmas > 0) or not np.all(np.isfinite(sigmas)):
            raise ValidationError("sigmas must be positive and finite")
        means.setflags(write=False)
        sigmas.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def M(self) -> int:
        return self.priors.M

    @property
    def d(self) -> int:
        return self.means.shape[1]

    def __eq__(self, other):
        return (isinstance(other, GaussClassModel)
                and self.priors == other.priors
                and np.array_equal(self.means, other.means)
                and np.array_equal(self.sigmas, other.sigmas)
                and self.rotation == other.rotation)

    def _points(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        if X.ndim == 0 or (X.ndim == 1 and self.d > 1):
            X = X.reshape(1, -1)
        elif X.ndim == 1:
            X = X[:, None]
        if X.shape[1] != self.d:
            raise ValidationError(f"points must have dimension {self.d}")
        return X

    def log_joint(self, x) -> np.ndarray:
        """ln prior(y) + ln density(x | y), up to a constant shared by all y."""
        X = self._points(x)
        sq = ((X[:, None, :] - self.means[None, :, :]) ** 2).sum(axis=2)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors.probs)
        return log_prior - sq / (2 * self.sigmas ** 2) - self.d * np.log(self.sigmas)

    def posterior_matrix(self, x) -> np.ndarray:
        lj = self.log_joint(x)
        return np.exp(lj - special.logsumexp(lj, axis=1, keepdims=True))

    def log_posterior_matrix(self, x) -> np.ndarray:
        lj = self.log_joint(x)
        return lj - special.logsumexp(lj, axis=1, keepdims=True)


def _rot(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def build(kind) -> GaussClassModel:
    if isinstance(kind, (ScaleInvariant, RotatedScaleInvariant)):
        if kind.alpha < 0 or kind.sigma <= 0:
            raise ValidationError("alpha must be >= 0 and sigma > 0")
        a = kind.alpha
        # labels follow the quadrants counter-clockwise from the first one
        means = np.array([[a, a], [-a, a], [-a, -a], [a, -a]], dtype=float)
        angle = float(getattr(kind, "angle", 0.0))
        if angle != 0.0:
            means = means @ _rot(angle).T
        return GaussClassModel(Pmf.uniform(4), means, np.full(4, float(kind.sigma)), angle, kind)
    if isinstance(kind, TranslationInvariant):
        if kind.spacing <= 0 or kind.sigma <= 0 or kind.M < 2:
            raise ValidationError("spacing, sigma must be > 0 and M >= 2")
        offsets = (np.arange(kind.M) - (kind.M - 1) / 2) * kind.spacing
        u = np.array([math.cos(kind.angle), math.sin(kind.angle)])
        means = offsets[:, None] * u[None, :]
        return GaussClassModel(Pmf.uniform(kind.M), means, np.full(kind.M, float(kind.sigma)),
                               float(kind.angle), kind)
    if isinstance(kind, RotationInvariant):
        sig = np.asarray(kind.sigmas, dtype=float)
        if sig.size < 2 or np.any(sig <= 0):
            raise ValidationError("need at least two positive sigmas")
        M = sig.size
        return GaussClassModel(Pmf.uniform(M), np.zeros((M, 2)), sig, 0.0, kind)
    if isinstance(kind, TwoClass1D):
        if kind.K <= 0 or kind.sigma <= 0:
            raise ValidationError("K and sigma must be > 0")
        means = np.array([[kind.K], [-kind.K]], dtype=float)
        return GaussClassModel(Pmf.uniform(2), means, np.full(2, float(kind.sigma)), 0.0, kind)
    raise ValidationError(f"unknown model kind {kind!r}")


# ---------------------------------------------------------------- datasets

@dataclass(frozen=True, eq=False)
class LabeledDataset:
    points: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), values in 1..M
    seed: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        labels = np.asarray(self.labels, dtype=np.int64)
        if pts.shape[0] != labels.shape[0]:
            raise ValidationError("points and labels must have equal length")
        if labels.size and labels.min() < 1:
            raise ValidationError("labels must be in 1..M")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.size

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.d)] + ["y"])
        for p, y in zip(self.points, self.labels):
            w.writerow([repr(float(v)) for v in p] + [int(y)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, seed=None) -> "LabeledDataset":
        rows = list(csv.reader(io.StringIO(text)))
        body = np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))
        return cls(body[:, :-1], body[:, -1].astype(np.int64), seed)


def sample(model: GaussClassModel, n: int, seed: int, tag: str = "sample") -> LabeledDataset:
    """Ancestral sampling: label from the priors, then the class Gaussian."""
    if n < 1:
        raise ValidationError(f"sample size must be >= 1, got {n}")
    rng = stream(seed, tag)
    y = rng.choice(model.M, size=n, p=model.priors.probs)
    noise = rng.standard_normal((n, model.d))
    pts = model.means[y] + model.sigmas[y][:, None] * noise
    return LabeledDataset(pts, y + 1, seed)


def posterior(model: GaussClassModel, x) -> Pmf:
    X = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ValidationError("posterior needs a finite point")
    return Pmf(model.posterior_matrix(X)[0])


def mpe_rule(model: GaussClassModel, x):
    """MPE label(s) in 1..M; the smallest label wins ties.

    A single point returns an int, a batch (n, d) returns an array.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 0 or (X.ndim == 1 and model.d > 1)
    labels = np.argmax(model.log_joint(X), axis=1) + 1
    return int(labels[0]) if single else labels


def bayes_risk_mc(model: GaussClassModel, n: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo MPE with its binomial standard error."""
    if n < 1000:
        raise ValidationError("bayes_risk_mc needs n >= 1000")
    ds = sample(model, n, seed, tag="bayes-risk")
    err = mpe_rule(model, ds.points) != ds.labels
    p = float(err.mean())
    return p, math.sqrt(p * (1 - p) / n)


def true_mi_terms(model: GaussClassModel, ds: LabeledDataset) -> np.ndarray:
    """Per-sample ln posterior(y_i | x_i) / prior(y_i)."""
    lp = model.log_posterior_matrix(ds.points)
    y = ds.labels - 1
    return lp[np.arange(y.size), y] - np.log(model.priors.probs[y])


def mi_mc(model: GaussClassModel, n: int, seed: int) -> tuple[float, float]:
    if n < 1000:
        raise ValidationError("mi_mc needs n >= 1000")
    t = true_mi_terms(model, sample(model, n, seed, tag="mi"))
    return float(t.mean()), float(t.std(ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------- projections

def invariant_projection(kind):
    """Scalar statistic that keeps everything the model's labels depend on."""
    if isinstance(kind, GaussClassModel):
        kind = kind.kind
    if isinstance(kind, TranslationInvariant):
        u = np.array([math.cos(kind.angle), math.sin(kind.angle)])

        def along_axis(x):
            return np.atleast_2d(np.asarray(x, dtype=float)) @ u
        return along_axis
    if isinstance(kind, RotationInvariant):
        def radius(x):
            return np.linalg.norm(np.atleast_2d(np.asarray(x, dtype=float)), axis=1)
        return radius
    raise DomainError(f"no invariant projection known for {kind!r}")


def has_projection(kind) -> bool:
    if isinstance(kind, GaussClassModel):
        kind = kind.kind
    return isinstance(kind, (TranslationInvariant, RotationInvariant))


def optimal_partition(kind):
    """The four quadrant cells that the MPE rule of the scale model induces."""
    from .partitions import QuadrantPartition

    if isinstance(kind, GaussClassModel):
        kind = kind.kind
    if type(kind) is RotatedScaleInvariant and kind.angle == 0.0:
        kind = ScaleInvariant(kind.alpha, kind.sigma)
    if not isinstance(kind, ScaleInvariant):
        raise DomainError("the quadrant partition is optimal only for the unrotated scale model")
    return QuadrantPartition()


# ---------------------------------------------------------------- quadrature oracles

def two_class_mi_quadrature(kind: TwoClass1D) -> float:
    """I(X;Y) for the symmetric two-class 1-D model by adaptive quadrature."""
    K, s = kind.K, kind.sigma

    def integrand(x):
        p1 = stats.norm.pdf(x, K, s)
        p2 = stats.norm.pdf(x, -K, s)
        mix = 0.5 * (p1 + p2)
        out = 0.0
        for p in (p1, p2):
            if p > 0:
                out += 0.5 * p * math.log(p / mix)
        return out

    span = K + 40 * s
    val, _ = integrate.quad(integrand, -span, span, points=[-K, 0.0, K], limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    return float(val)


def two_class_sign_mi(kind: TwoClass1D) -> float:
    """I(sign(X);Y): the information kept by the two half-lines."""
    q = float(stats.norm.sf(kind.K / kind.sigma))
    return math.log(2) - binary_entropy(q)
