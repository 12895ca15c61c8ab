"""Sparse coefficient matrix, symmetrized affinity, graph Laplacian,
spectral bipartition, and clustering error."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import numerics

# Relative floor below which a Laplacian eigenvalue counts as zero.
EIGENVALUE_FLOOR_RTOL = 1e-8


class DegenerateGraphError(ValueError):
    """The affinity graph carries no usable spectral information."""


@dataclass
class Partition:
    """Two-way point partition with labels in [0, num_clusters)."""

    labels: np.ndarray
    num_clusters: int


def coefficient_matrix(feature_sets, d):
    """Stack per-point coefficients into the rows of a d x d matrix.

    Row i holds fs.coeffs at the columns of its feature set and zeros
    elsewhere; the diagonal is zero because points never select
    themselves.  Feature sets that selected nothing leave a zero row.
    """
    c = np.zeros((d, d))
    seen = set()
    for fs in feature_sets:
        i = fs.point_index
        if not 0 <= i < d:
            raise ValueError(f"point index {i} out of range for d={d}")
        if i in seen:
            raise ValueError(f"duplicate feature set for point {i}")
        seen.add(i)
        if len(fs.selected) == 0:
            warnings.warn(f"point {i} has an empty feature set; row left at zero")
            continue
        sel = np.asarray(fs.selected)
        if sel.min() < 0 or sel.max() >= d:
            raise ValueError(f"feature indices of point {i} out of range for d={d}")
        if i in fs.selected:
            raise ValueError(f"point {i} appears in its own feature set")
        c[i, sel] = fs.coeffs
    if seen != set(range(d)):
        raise ValueError("feature sets do not cover points 0..d-1")
    return c


def affinity(c):
    """Symmetrized affinity |C| + |C^T| with a zeroed diagonal."""
    c = numerics.check_matrix(c, "coefficient matrix")
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got {c.shape}")
    w = np.abs(c) + np.abs(c.T)
    np.fill_diagonal(w, 0.0)
    return w


def graph_laplacian(w, normalized=False):
    """Graph Laplacian D - W, or its symmetric normalized variant.

    The normalized form is I - D^{-1/2} W D^{-1/2}; rows of isolated
    vertices (zero degree) reduce to identity rows.
    """
    w = numerics.check_matrix(w, "affinity")
    if w.shape[0] != w.shape[1]:
        raise ValueError(f"affinity must be square, got {w.shape}")
    degrees = w.sum(axis=1)
    if not normalized:
        return np.diag(degrees) - w
    inv_sqrt = np.zeros_like(degrees)
    positive = degrees > 0
    inv_sqrt[positive] = 1.0 / np.sqrt(degrees[positive])
    return np.eye(w.shape[0]) - (inv_sqrt[:, None] * w) * inv_sqrt[None, :]


def _connected_components(lap):
    """Component label per vertex from the Laplacian's off-diagonal pattern."""
    n = lap.shape[0]
    comp = -np.ones(n, dtype=int)
    adjacency = np.abs(lap) > 0.0
    np.fill_diagonal(adjacency, False)
    current = 0
    for root in range(n):
        if comp[root] >= 0:
            continue
        stack = [root]
        comp[root] = current
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(adjacency[v]):
                if comp[u] < 0:
                    comp[u] = current
                    stack.append(u)
        current += 1
    return comp, current


def spectral_bipartition(lap):
    """Two-way split from the eigenvector at the smallest nonzero eigenvalue.

    Eigenvalues below 1e-8 times the largest count as zero.  A connected
    graph is split by the sign of the Fiedler vector (zero entries join
    the positive side).  Two or more zero eigenvalues mean the graph is
    disconnected; the split then follows the connected components, with
    the component of point 0 against the rest.
    """
    lap = numerics.check_matrix(lap, "laplacian")
    values, vectors = numerics.symmetric_eigen(lap)
    lam_max = float(values[-1])
    if lam_max <= 0.0:
        raise DegenerateGraphError("all Laplacian eigenvalues are zero")
    floor = EIGENVALUE_FLOOR_RTOL * lam_max
    num_zero = int(np.sum(values < floor))
    if num_zero >= 2:
        comp, count = _connected_components(lap)
        if count >= 2:
            labels = (comp != comp[0]).astype(int)
            return Partition(labels=labels, num_clusters=2)
        # connected despite several sub-floor eigenvalues: only the first
        # is a true zero, so the Fiedler vector sits at index 1
        num_zero = 1
    fiedler_idx = min(num_zero, values.size - 1)
    fiedler = vectors[:, fiedler_idx]
    labels = (fiedler < 0).astype(int)
    return Partition(labels=labels, num_clusters=2)


def clustering_error(predicted, truth):
    """Misclassification fraction minimized over the two label matchings."""
    truth = np.asarray(truth)
    labels = predicted.labels
    if labels.shape[0] != truth.shape[0]:
        raise ValueError(
            f"length mismatch: {labels.shape[0]} predictions, {truth.shape[0]} labels")
    if predicted.num_clusters != 2:
        raise ValueError(f"expected 2 predicted clusters, got {predicted.num_clusters}")
    ids = np.unique(truth)
    if ids.size > 2:
        raise ValueError(f"expected at most 2 true clusters, got {ids.size}")
    truth01 = (truth == ids[-1]).astype(int)
    direct = float(np.mean(labels != truth01))
    flipped = float(np.mean(labels != 1 - truth01))
    return min(direct, flipped)
