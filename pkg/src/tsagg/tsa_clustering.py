"""Period clustering: input-space k-means vs optimal-basis grouping.

Features are the per-hour model inputs (demand, then one capacity-factor
column per variable generator), min-max normalised so the squared-error
metric weighs columns comparably.  ``kmeans`` picks k a priori and
minimises that input-space error; ``basis_cluster`` instead groups hours
that share an optimal simplex basis, so k is discovered from the solved
model rather than chosen.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dispatch_model import (
    DispatchSolution,
    Representative,
    RepresentativeSet,
    SystemData,
    regime_label,
    solve_full,
)
from .lp_core import BasisSignature


class ClusterMethod(Enum):
    KMEANS = "kmeans"
    BASIS = "basis"


class KExceedsHError(ValueError):
    """Requested cluster count outside [1, H]."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Normalised per-hour features with the affine map to undo them."""

    values: np.ndarray            # (H, F) in [0, 1]
    columns: tuple[str, ...]      # "demand", then cf series ids
    mins: np.ndarray
    maxs: np.ndarray
    degenerate: tuple[bool, ...]  # constant input columns pinned to 0.5

    def __post_init__(self):
        for name in ("values", "mins", "maxs"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValueError("feature matrix shape does not match columns")

    @property
    def H(self) -> int:
        return self.values.shape[0]

    @property
    def F(self) -> int:
        return self.values.shape[1]

    def denormalize(self, rows: np.ndarray) -> np.ndarray:
        """Map normalised rows back to physical units (exact for constants)."""
        return self.mins + np.asarray(rows) * (self.maxs - self.mins)


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray         # (k, F) normalised
    assignment: np.ndarray        # (H,) cluster id per hour
    weights: np.ndarray           # (k,) member counts
    method: ClusterMethod
    basis_map: dict[int, BasisSignature] | None = None
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.int64)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.assignment.min() < 0 or self.assignment.max() >= self.k:
            raise ValueError("assignment references unknown cluster ids")
        counts = np.bincount(self.assignment, minlength=self.k)
        if not np.array_equal(counts, self.weights):
            raise ValueError("weights must be the cluster cardinalities")
        if (self.weights == 0).any():
            raise ValueError("empty cluster in model")


def normalize_features(system: SystemData) -> FeatureMatrix:
    """Min-max normalise demand and variable-generator capacity factors.

    A constant column carries no spread to normalise, so it is pinned to
    0.5 and flagged; ``denormalize`` still restores the original constant
    because the affine span is zero.
    """
    columns = ["demand"] + [g.cf_series_id for g in system.variable_generators()]
    raw = np.column_stack(
        [system.demand]
        + [system.capacity_factors[g.cf_series_id] for g in system.variable_generators()]
    )
    mins = raw.min(axis=0)
    maxs = raw.max(axis=0)
    span = maxs - mins
    degenerate = span == 0.0
    values = np.empty_like(raw)
    for f in range(raw.shape[1]):
        if degenerate[f]:
            values[:, f] = 0.5
        else:
            values[:, f] = (raw[:, f] - mins[f]) / span[f]
    return FeatureMatrix(values, tuple(columns), mins, maxs, tuple(bool(d) for d in degenerate))


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

def _point_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared distances (H, k), accumulated feature by feature."""
    d2 = np.zeros((X.shape[0], centroids.shape[0]))
    for f in range(X.shape[1]):
        diff = X[:, f, None] - centroids[None, :, f]
        d2 += diff * diff
    return d2


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    H = X.shape[0]
    chosen = [int(rng.integers(H))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            j = int(rng.integers(H))  # every point already sits on a centroid
        else:
            j = int(rng.choice(H, p=d2 / total))
        chosen.append(j)
        d2 = np.minimum(d2, ((X - X[j]) ** 2).sum(axis=1))
    return X[np.array(chosen)].copy()


def _reseed_empty(labels, counts, own_d2, k):
    """Give each empty cluster the farthest point of a non-singleton cluster."""
    order = np.argsort(-own_d2, kind="stable")
    for cid in range(k):
        if counts[cid] > 0:
            continue
        for cand in order:
            src = labels[cand]
            if counts[src] > 1:
                counts[src] -= 1
                labels[cand] = cid
                counts[cid] = 1
                break


def _lloyd(X, centroids, max_iter, tol):
    H, F = X.shape
    k = centroids.shape[0]
    labels = np.full(H, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _point_distances(X, centroids)
        new_labels = np.argmin(d2, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        if (counts == 0).any():
            _reseed_empty(new_labels, counts, d2[np.arange(H), new_labels], k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        updated = np.zeros((k, F))
        np.add.at(updated, labels, X)
        updated /= counts[:, None]
        if np.abs(updated - centroids).max() < tol:
            centroids = updated
            break
        centroids = updated
    # Exact member means for the terminal partition.
    counts = np.bincount(labels, minlength=k)
    centroids = np.zeros((k, F))
    np.add.at(centroids, labels, X)
    centroids /= counts[:, None]
    inertia = float(_point_distances(X, centroids)[np.arange(H), labels].sum())
    return labels, centroids, inertia


def _order_by_first_occurrence(labels, centroids, k):
    uniq, first = np.unique(labels, return_index=True)
    order = uniq[np.argsort(first, kind="stable")]
    remap = np.empty(k, dtype=np.int64)
    remap[order] = np.arange(k)
    return remap[labels], centroids[order]


def kmeans(
    features: FeatureMatrix,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    restarts: int = 10,
) -> ClusterModel:
    """Best-of-restarts Lloyd iteration with k-means++ seeding.

    Deterministic given (seed, data): restart streams are spawned from one
    seed sequence and ties keep the earliest restart.  Empty clusters are
    re-seeded with the farthest point of a non-singleton cluster, so all k
    clusters stay populated.
    """
    X = features.values
    if not 1 <= k <= features.H:
        raise KExceedsHError(f"k={k} outside [1, {features.H}]")
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for stream in streams:
        rng = np.random.default_rng(stream)
        init = _kmeans_pp(X, k, rng)
        labels, centroids, inertia = _lloyd(X, init, max_iter, tol)
        if best is None or inertia < best[0]:
            best = (inertia, labels, centroids)
    _, labels, centroids = best
    labels, centroids = _order_by_first_occurrence(labels, centroids, k)
    weights = np.bincount(labels, minlength=k)
    return ClusterModel(
        k,
        centroids,
        labels,
        weights,
        ClusterMethod.KMEANS,
        labels=tuple(f"cluster {i}" for i in range(k)),
    )


def input_mse(features: FeatureMatrix, model: ClusterModel) -> float:
    """Mean squared deviation from assigned centroids over all H*F entries."""
    d2 = _point_distances(features.values, model.centroids)
    per_point = d2[np.arange(features.H), model.assignment]
    return float(per_point.sum() / (features.H * features.F))


# ---------------------------------------------------------------------------
# basis-oriented clustering
# ---------------------------------------------------------------------------

def basis_cluster(
    system: SystemData,
    features: FeatureMatrix | None = None,
    full: DispatchSolution | None = None,
) -> ClusterModel:
    """Group hours by canonical optimal basis; k is discovered, not chosen.

    Pass a precomputed full solve to avoid repeating the 8760 LPs.  Cluster
    ids follow first occurrence; each cluster records its shared basis plus
    a regime label derived from the marginal generator.
    """
    if features is None:
        features = normalize_features(system)
    if full is None:
        full = solve_full(system)
    if len(full.periods) != features.H:
        raise ValueError("dispatch solution and features disagree on horizon")
    sig_to_cid: dict[BasisSignature, int] = {}
    assignment = np.empty(features.H, dtype=np.int64)
    for h, period in enumerate(full.periods):
        sig = period.solution.basis
        if sig not in sig_to_cid:
            sig_to_cid[sig] = len(sig_to_cid)
        assignment[h] = sig_to_cid[sig]
    k = len(sig_to_cid)
    centroids = np.zeros((k, features.F))
    np.add.at(centroids, assignment, features.values)
    weights = np.bincount(assignment, minlength=k)
    centroids /= weights[:, None]
    basis_map = {cid: sig for sig, cid in sig_to_cid.items()}
    labels = tuple(regime_label(system, basis_map[cid]) for cid in range(k))
    return ClusterModel(
        k, centroids, assignment, weights, ClusterMethod.BASIS, basis_map, labels
    )


def to_representatives(model: ClusterModel, features: FeatureMatrix) -> RepresentativeSet:
    """Denormalise centroids into representative periods weighted by size.

    Capacity factors are clamped to [0, 1] to shed rounding dust from the
    normalisation round trip; weights are member counts, so they sum to H.
    """
    phys = features.denormalize(model.centroids)
    reps = []
    for cid in range(model.k):
        cf = {
            features.columns[1 + j]: float(np.clip(phys[cid, 1 + j], 0.0, 1.0))
            for j in range(features.F - 1)
        }
        reps.append(Representative(float(phys[cid, 0]), cf, float(model.weights[cid])))
    return RepresentativeSet(tuple(reps))
