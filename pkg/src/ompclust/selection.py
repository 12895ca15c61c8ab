"""Per-point feature selection: orthogonal matching pursuit and nearest
neighbors, plus the exact-feature-selection check.

Each point of an ensemble is represented with respect to the remaining
points (the point itself is always excluded from its own candidate set).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .geometry import _check_unit_columns

# Correlation level below which the pursuit is considered stalled.
STALL_TOL = 1e-12
# Residual norm at which the pursuit exits early even under a sparsity rule.
ZERO_RESIDUAL_TOL = 1e-12
# Memory budget (bytes) for the per-chunk orthonormal bases in the batch path.
_BATCH_BYTES = 32 * 1024 * 1024


class OmpStallError(RuntimeError):
    """All candidate correlations vanished while the residual is nonzero."""

    def __init__(self, message, partial, point_index=None):
        super().__init__(message)
        self.partial = list(partial)
        self.point_index = point_index


@dataclass
class StoppingRule:
    """Stop at a target sparsity or at a residual-norm threshold."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "sparsity":
            if int(self.value) != self.value or self.value < 1:
                raise ValueError(f"sparsity must be an integer >= 1, got {self.value}")
            self.value = int(self.value)
        elif self.kind == "residual":
            if not self.value > 0:
                raise ValueError(f"residual threshold must be > 0, got {self.value}")
            self.value = float(self.value)
        else:
            raise ValueError(f"unknown stopping rule kind {self.kind!r}")

    @classmethod
    def sparsity(cls, k):
        return cls(kind="sparsity", value=k)

    @classmethod
    def residual(cls, kappa):
        return cls(kind="residual", value=kappa)


@dataclass
class FeatureSet:
    """Selected atom indices for one point, in selection order."""

    point_index: int
    selected: list
    coeffs: np.ndarray
    residual_norm: float


def _stop_params(stop, num_atoms):
    if stop.kind == "sparsity":
        if stop.value > num_atoms:
            raise ValueError(
                f"sparsity {stop.value} exceeds the {num_atoms} available atoms")
        return stop.value, ZERO_RESIDUAL_TOL
    return num_atoms, max(stop.value, ZERO_RESIDUAL_TOL)


def omp(y, atoms, stop, exclude=()):
    """Orthogonal matching pursuit for one signal.

    Repeatedly selects the unselected atom with the largest absolute
    correlation to the current residual (ties broken by lowest column
    index), then re-projects the signal onto the orthogonal complement of
    the selected span.  Stops at the requested sparsity or residual norm.
    Atom indices in `exclude` are never selectable (used for endogenous
    self-exclusion).

    Returns a FeatureSet whose coefficients are the least-squares fit of
    y on the selected atoms.

    Raises OmpStallError when every candidate correlation falls below
    STALL_TOL while the residual is still above the stopping threshold.
    """
    atoms = _check_unit_columns(atoms, "atoms")
    y = numerics.check_vector(y, "y")
    n, d = atoms.shape
    if y.shape[0] != n:
        raise ValueError(f"signal dimension {y.shape[0]} != atom dimension {n}")
    max_sel, kappa = _stop_params(stop, d - len(set(exclude)))

    blocked = np.zeros(d, dtype=bool)
    for i in exclude:
        blocked[i] = True
    q_basis = np.zeros((n, max_sel))
    s = y.copy()
    selected = []
    while True:
        if np.linalg.norm(s) <= kappa:
            break
        corr = np.abs(atoms.T @ s)
        corr[blocked] = -1.0
        j = int(np.argmax(corr))
        if corr[j] < STALL_TOL:
            raise OmpStallError(
                f"pursuit stalled after {len(selected)} selections: all "
                f"correlations below {STALL_TOL} with residual norm "
                f"{np.linalg.norm(s):.3e}", partial=selected)
        m = len(selected)
        q = atoms[:, j].copy()
        for _ in range(2):  # two Gram-Schmidt passes keep Q orthonormal
            q -= q_basis[:, :m] @ (q_basis[:, :m].T @ q)
        q /= np.linalg.norm(q)
        q_basis[:, m] = q
        s -= q * (q @ y)
        selected.append(j)
        blocked[j] = True
        if len(selected) >= max_sel:
            break
    coeffs = (numerics.lstsq(atoms[:, selected], y) if selected
              else np.zeros(0))
    return FeatureSet(point_index=-1, selected=selected, coeffs=coeffs,
                      residual_norm=float(np.linalg.norm(s)))


def _ensemble_points(ensemble):
    points = getattr(ensemble, "points", ensemble)
    return _check_unit_columns(points, "ensemble")


def omp_feature_sets(ensemble, stop, with_coeffs=True):
    """Endogenous OMP for every point of an ensemble.

    Runs the pursuit for each column against all other columns (the point
    itself is masked).  Points are processed in memory-bounded chunks with
    iteration-synchronized linear algebra; results match independent
    omp() calls.  Stalls are re-raised tagged with the point index.
    """
    y = _ensemble_points(ensemble)
    n, d = y.shape
    max_sel, kappa = _stop_params(stop, d - 1)
    chunk = max(1, min(d, _BATCH_BYTES // (8 * n * max_sel)))

    feature_sets = [None] * d
    for start in range(0, d, chunk):
        cols = np.arange(start, min(start + chunk, d))
        c = cols.size
        targets = y[:, cols]
        s = targets.copy()
        blocked = np.zeros((d, c), dtype=bool)
        blocked[cols, np.arange(c)] = True
        q_basis = np.zeros((c, n, max_sel))
        order = np.zeros((c, max_sel), dtype=int)
        count = np.zeros(c, dtype=int)
        active = np.ones(c, dtype=bool)
        while np.any(active):
            norms = np.linalg.norm(s, axis=0)
            active &= norms > kappa
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            corr = np.abs(y.T @ s[:, idx])
            corr[blocked[:, idx]] = -1.0
            picks = np.argmax(corr, axis=0)
            best = corr[picks, np.arange(idx.size)]
            if np.any(best < STALL_TOL):
                p = idx[int(np.flatnonzero(best < STALL_TOL)[0])]
                raise OmpStallError(
                    f"pursuit stalled for point {cols[p]} after {count[p]} "
                    f"selections", partial=order[p, :count[p]].tolist(),
                    point_index=int(cols[p]))
            m = count[idx]  # uniform across active points by construction
            new_atoms = y[:, picks].T  # (active, n)
            qb = q_basis[idx]
            mm = int(m[0])
            for _ in range(2):
                proj = np.einsum("cnm,cn->cm", qb[:, :, :mm], new_atoms)
                new_atoms = new_atoms - np.einsum("cnm,cm->cn", qb[:, :, :mm], proj)
            new_atoms /= np.linalg.norm(new_atoms, axis=1)[:, None]
            q_basis[idx, :, mm] = new_atoms
            coef = np.einsum("cn,nc->c", new_atoms, targets[:, idx])
            s[:, idx] -= new_atoms.T * coef
            order[idx, mm] = picks
            blocked[picks, idx] = True
            count[idx] += 1
            active[idx] &= count[idx] < max_sel
        final_norms = np.linalg.norm(s, axis=0)
        for ci, col in enumerate(cols):
            sel = order[ci, :count[ci]].tolist()
            if with_coeffs and sel:
                coeffs = numerics.lstsq(y[:, sel], targets[:, ci])
            else:
                coeffs = np.zeros(len(sel))
            feature_sets[col] = FeatureSet(
                point_index=int(col), selected=sel, coeffs=coeffs,
                residual_norm=float(final_norms[ci]))
    return feature_sets


def nn_feature_sets(ensemble, k):
    """Nearest-neighbor feature sets under absolute normalized inner products.

    For each point, the k other points with the largest |<y_i, y_j>| (ties
    broken by lowest index); coefficients are the signed inner products.
    """
    y = _ensemble_points(ensemble)
    d = y.shape[1]
    if not 1 <= k < d:
        raise ValueError(f"neighbor count must satisfy 1 <= k < {d}, got {k}")
    gram = y.T @ y
    agram = np.abs(gram)
    np.fill_diagonal(agram, -1.0)
    feature_sets = []
    arange = np.arange(d)
    for i in range(d):
        order = np.lexsort((arange, -agram[:, i]))[:k]
        sel = order.tolist()
        coeffs = gram[sel, i].copy()
        resid = y[:, i] - y[:, sel] @ coeffs
        feature_sets.append(FeatureSet(point_index=i, selected=sel, coeffs=coeffs,
                                       residual_norm=float(np.linalg.norm(resid))))
    return feature_sets


def efs_check(fs, labels):
    """True iff every selected index shares the point's cluster label."""
    labels = np.asarray(labels)
    if len(fs.selected) == 0:
        raise ValueError(f"point {fs.point_index} selected no features")
    own = labels[fs.point_index]
    return bool(all(labels[j] == own for j in fs.selected))


def efs_fraction(feature_sets, labels):
    """Fraction of feature sets that achieve exact feature selection."""
    return float(np.mean([efs_check(fs, labels) for fs in feature_sets]))
