"""Plug-in estimators of information and operation losses, and the curve runner."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import partitions as P
from .finite_info import DiscreteJoint, ValidationError, mutual_information
from .models import (
    GaussClassModel,
    LabeledDataset,
    RotationInvariant,
    TranslationInvariant,
    has_projection,
    invariant_projection,
    mpe_rule,
    sample,
    true_mi_terms,
)
from .rng import DEFAULT_SEED

CSV_FIELDS = ("scheme", "k", "il", "se_il", "ol", "se_ol", "wil", "pil",
              "n_eval", "n_cal", "seed")


@dataclass(frozen=True)
class EstimatorConfig:
    n_eval: int = 10_000
    n_cal: int = 100_000
    aux_resolution: int = 256
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_eval < 1 or self.n_cal < 1:
            raise ValidationError("sample sizes must be >= 1")
        if self.aux_resolution < 8:
            raise ValidationError("aux_resolution must be >= 8")


@dataclass(frozen=True)
class LossCurvePoint:
    scheme: str
    k: int
    il: float
    se_il: float
    ol: float
    se_ol: float
    wil: float
    pil: float | None
    n_eval: int
    n_cal: int
    seed: int
    k_target: int | None = None
    se_wil: float = 0.0
    se_pil: float | None = None
    partition: dict = field(default_factory=dict, compare=False, repr=False)

    def csv_row(self) -> list:
        return [self.scheme, self.k, repr(self.il), repr(self.se_il), repr(self.ol),
                repr(self.se_ol), repr(self.wil), "" if self.pil is None else repr(self.pil),
                self.n_eval, self.n_cal, self.seed]

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "k": self.k, "k_target": self.k_target,
                "il": self.il, "se_il": self.se_il, "ol": self.ol, "se_ol": self.se_ol,
                "wil": self.wil, "se_wil": self.se_wil, "pil": self.pil, "se_pil": self.se_pil,
                "n_eval": self.n_eval, "n_cal": self.n_cal, "seed": self.seed}


# ---------------------------------------------------------------- plug-in machinery

def cell_ids(quantizer, points) -> np.ndarray:
    """Cell ids of a batch of points under a Partition or a plain callable."""
    X = np.asarray(points, dtype=float)
    if isinstance(quantizer, P.Partition):
        X, _ = quantizer._as_batch(X)
        return np.asarray(quantizer._ids(X), dtype=np.int64)
    return np.asarray(quantizer(X), dtype=np.int64).ravel()


def _dense(ids) -> tuple[np.ndarray, int]:
    uniq, inv = np.unique(np.asarray(ids), return_inverse=True)
    return inv.ravel(), uniq.size


def _combine(a, b) -> np.ndarray:
    """A single id for the pair (a, b) without overflow."""
    da, _ = _dense(a)
    db, nb = _dense(b)
    return da.astype(np.int64) * nb + db


def _counts(ids, labels):
    u, k = _dense(ids)
    y = np.asarray(labels, dtype=np.int64) - 1
    M = int(y.max()) + 1
    table = np.bincount(u * M + y, minlength=k * M).reshape(k, M)
    return table, u, y


def plugin_mi_from_ids(ids, labels) -> float:
    table, _, _ = _counts(ids, labels)
    return mutual_information(DiscreteJoint.from_counts(table))


def plugin_terms(ids, labels) -> np.ndarray:
    """Per-sample ln phat(y_i|u_i)/phat(y_i); their mean is the plug-in MI."""
    table, u, y = _counts(ids, labels)
    n = y.size
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    return np.log(table[u, y] * n / (row[u] * col[y]))


def empirical_mi_true(model: GaussClassModel, dataset: LabeledDataset) -> float:
    return float(true_mi_terms(model, dataset).mean())


def plugin_mi(dataset: LabeledDataset, quantizer) -> float:
    return plugin_mi_from_ids(cell_ids(quantizer, dataset.points), dataset.labels)


def info_loss(model: GaussClassModel, dataset: LabeledDataset, quantizer) -> float:
    return empirical_mi_true(model, dataset) - plugin_mi(dataset, quantizer)


def cell_map_labels(cal_ids, cal_labels, M: int):
    """Per-cell majority label learned on calibration data, plus the fallback label."""
    u, k = _dense(cal_ids)
    uniq = np.unique(cal_ids)
    y = np.asarray(cal_labels, dtype=np.int64) - 1
    table = np.bincount(u * M + y, minlength=k * M).reshape(k, M)
    majority = int(np.argmax(np.bincount(y, minlength=M))) + 1
    return uniq, np.argmax(table, axis=1) + 1, majority


def predict_from_cells(ids, uniq, labels, fallback) -> np.ndarray:
    pos = np.searchsorted(uniq, ids)
    pos_c = np.minimum(pos, uniq.size - 1)
    seen = (pos < uniq.size) & (uniq[pos_c] == ids)
    return np.where(seen, labels[pos_c], fallback)


def _op_loss_terms(model, cal, eval_, quantizer, eval_ids=None, eval_mpe=None):
    cal_ids = cell_ids(quantizer, cal.points)
    uniq, labels, fallback = cell_map_labels(cal_ids, cal.labels, model.M)
    if eval_ids is None:
        eval_ids = cell_ids(quantizer, eval_.points)
    if eval_mpe is None:
        eval_mpe = mpe_rule(model, eval_.points)
    pred = predict_from_cells(eval_ids, uniq, labels, fallback)
    return (pred != eval_.labels).astype(float) - (eval_mpe != eval_.labels).astype(float)


def op_loss(model: GaussClassModel, cal: LabeledDataset, eval: LabeledDataset, quantizer) -> float:
    """Learned-cell-MAP risk minus the exact MPE risk, both on ``eval``."""
    return float(_op_loss_terms(model, cal, eval, quantizer).mean())


def weak_info_loss(model: GaussClassModel, dataset: LabeledDataset, quantizer) -> float:
    ids = cell_ids(quantizer, dataset.points)
    refined = _combine(ids, mpe_rule(model, dataset.points))
    return plugin_mi_from_ids(refined, dataset.labels) - plugin_mi_from_ids(ids, dataset.labels)


def aux_grid_ids(t, aux_resolution: int) -> np.ndarray:
    """Uniform cells over the 0.1%..99.9% quantile range of ``t`` plus two overflow cells."""
    t = np.asarray(t, dtype=float)
    lo, hi = np.quantile(t, [0.001, 0.999])
    if not hi > lo:
        return np.zeros(t.size, dtype=np.int64)
    edges = np.linspace(lo, hi, aux_resolution + 1)
    return np.searchsorted(edges, t, side="right").astype(np.int64)


def projected_info_loss(model: GaussClassModel, dataset: LabeledDataset, quantizer,
                        projection=None, aux_resolution: int = 256) -> float:
    if projection is None:
        projection = invariant_projection(model)
    ids = cell_ids(quantizer, dataset.points)
    aux = aux_grid_ids(projection(dataset.points), aux_resolution)
    joint = _combine(ids, aux)
    return plugin_mi_from_ids(joint, dataset.labels) - plugin_mi_from_ids(ids, dataset.labels)


# ---------------------------------------------------------------- schemes

def _se(terms) -> float:
    terms = np.asarray(terms, dtype=float)
    return float(terms.std(ddof=1) / math.sqrt(terms.size)) if terms.size > 1 else 0.0


def _tsp_leaves(n: int, l_n: int, memo: dict) -> int:
    # leaf count of a median tree on n distinct points
    if n in memo:
        return memo[n]
    half = n // 2
    out = 1 if half < l_n else _tsp_leaves(n - half, l_n, memo) + _tsp_leaves(half, l_n, memo)
    memo[n] = out
    return out


def tsp_sample_size(k: int, l_n: int) -> int:
    """Construction size whose median tree has a leaf count closest to k."""
    memo: dict = {}
    lo, hi = l_n, max(2 * l_n, 1)
    while _tsp_leaves(hi, l_n, memo) < k:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if _tsp_leaves(mid, l_n, memo) >= k:
            hi = mid
        else:
            lo = mid + 1
    best = lo
    if lo > l_n and abs(_tsp_leaves(lo - 1, l_n, memo) - k) < abs(_tsp_leaves(lo, l_n, memo) - k):
        best = lo - 1
    return best


def _mean_axis_range(model: GaussClassModel):
    kind = model.kind
    u = np.array([math.cos(kind.angle), math.sin(kind.angle)])
    proj = model.means @ u
    return u, (float(proj.min()), float(proj.max()))


def default_bound(model: GaussClassModel) -> float:
    return float(np.abs(model.means).max() + 4 * model.sigmas.max())


def build_scheme(model: GaussClassModel, scheme: dict, k: int, seed: int) -> P.Partition:
    """Partition of the named scheme whose size is as close to k as the scheme allows."""
    name = scheme["name"]
    d = model.d
    if name == "constant":
        return P.ConstantPartition(d)
    if name == "product":
        bound = float(scheme.get("bound", default_bound(model)))
        per_axis = max(1, int(round((max(k - 1, 1)) ** (1.0 / d))))
        return P.uniform_grid(bound, per_axis, d)
    if name == "dyadic":
        sizes = {m: (2 * m * 2 ** m) ** d + 1 for m in range(1, 8)}
        m = min(sizes, key=lambda m: (abs(sizes[m] - k), m))
        return P.product_partition(m, d)
    if name == "gessaman":
        l_n = int(scheme.get("l_n", 20))
        T = max(1, int(round(k ** (1.0 / d))))
        data = sample(model, l_n * T ** d, seed, tag=f"construct/gessaman/{k}").points
        return P.gessaman(data, l_n)
    if name == "tsp":
        l_n = int(scheme.get("l_n", 20))
        n = tsp_sample_size(k, l_n)
        data = sample(model, n, seed, tag=f"construct/tsp/{k}").points
        return P.tsp(data, l_n)
    if name == "asymmetric":
        if d != 2:
            raise ValidationError("the asymmetric scheme is two-dimensional")
        radius = float(scheme.get("radius", 0.5))
        depth = min(range(1, 8), key=lambda D: (abs(P.asymmetric_size(D) - k), D))
        return P.asymmetric_dyadic(depth, radius)
    if name == "projected":
        if isinstance(model.kind, TranslationInvariant):
            u, rng_ = _mean_axis_range(model)
            rng_ = scheme.get("range", rng_)
            return P.projected_uniform(u, rng_, max(k, 2))
        if isinstance(model.kind, RotationInvariant):
            rng_ = scheme.get("range", (0.0, 3.0 * float(model.sigmas.max())))
            return P.projected_uniform(np.ones(d), rng_, max(k, 2), radial=True)
        raise ValidationError("the projected scheme needs a translation or rotation model")
    raise ValidationError(f"unknown scheme {name!r}")


SCHEMES = ("constant", "product", "dyadic", "gessaman", "tsp", "asymmetric", "projected")


def normalize_scheme(scheme) -> dict:
    out = {"name": scheme} if isinstance(scheme, str) else dict(scheme)
    if out.get("name") not in SCHEMES:
        raise ValidationError(f"unknown scheme {out.get('name')!r}; choose from {SCHEMES}")
    return out


# ---------------------------------------------------------------- the curve runner

@dataclass
class EvalContext:
    """Everything about the evaluation and calibration data that does not depend on the partition."""

    model: GaussClassModel
    eval: LabeledDataset
    cal: LabeledDataset
    true_terms: np.ndarray
    mpe: np.ndarray
    aux: np.ndarray | None

    @classmethod
    def draw(cls, model: GaussClassModel, config: EstimatorConfig) -> "EvalContext":
        ev = sample(model, config.n_eval, config.seed, tag="eval")
        cal = sample(model, config.n_cal, config.seed, tag="cal")
        aux = None
        if has_projection(model):
            aux = aux_grid_ids(invariant_projection(model)(ev.points), config.aux_resolution)
        return cls(model, ev, cal, true_mi_terms(model, ev), mpe_rule(model, ev.points), aux)


def evaluate_partition(ctx: EvalContext, partition, scheme: str = "custom",
                       k_target: int | None = None, seed: int = DEFAULT_SEED) -> LossCurvePoint:
    ev = ctx.eval
    ids = cell_ids(partition, ev.points)
    base = plugin_terms(ids, ev.labels)
    il_terms = ctx.true_terms - base
    ol_terms = _op_loss_terms(ctx.model, ctx.cal, ev, partition, ids, ctx.mpe)
    refined = plugin_terms(_combine(ids, ctx.mpe), ev.labels)
    # the losses are differences of plug-in MIs; the per-sample terms give the same means
    mi_base = plugin_mi_from_ids(ids, ev.labels)
    wil = plugin_mi_from_ids(_combine(ids, ctx.mpe), ev.labels) - mi_base
    pil = se_pil = None
    if ctx.aux is not None:
        joint = _combine(ids, ctx.aux)
        pil = plugin_mi_from_ids(joint, ev.labels) - mi_base
        se_pil = _se(plugin_terms(joint, ev.labels) - base)
    k = partition.size if isinstance(partition, P.Partition) else int(np.unique(ids).size)
    desc = partition.to_dict(include_cells=False) if isinstance(partition, P.Partition) else {}
    return LossCurvePoint(
        scheme=scheme, k=int(k), il=float(ctx.true_terms.mean() - mi_base), se_il=_se(il_terms),
        ol=float(ol_terms.mean()), se_ol=_se(ol_terms), wil=float(wil), pil=pil,
        n_eval=len(ev), n_cal=len(ctx.cal), seed=int(seed), k_target=k_target,
        se_wil=_se(refined - base), se_pil=se_pil, partition=desc)


def loss_curve(model: GaussClassModel, scheme, sizes, config: EstimatorConfig | None = None,
               ctx: EvalContext | None = None) -> list[LossCurvePoint]:
    """Losses of one scheme over a grid of target sizes.

    Evaluation and calibration samples depend only on the seed, so every
    scheme and size is scored on the same data.
    """
    config = config or EstimatorConfig()
    scheme = normalize_scheme(scheme)
    sizes = [int(k) for k in sizes]
    if not sizes or any(k < 1 for k in sizes) or sizes != sorted(sizes):
        raise ValidationError("sizes must be a non-empty ascending list of positive integers")
    ctx = ctx or EvalContext.draw(model, config)
    out = []
    for k in sizes:
        part = build_scheme(model, scheme, k, config.seed)
        out.append(evaluate_partition(ctx, part, scheme["name"], k, config.seed))
    return out
