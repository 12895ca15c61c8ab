"""Monte Carlo estimation of the probability of exact feature selection
over parameter grids: overlap/oversampling phase transitions, paired
OMP-vs-NN comparisons, and the bounded-energy sweep.

Every trial derives its own seed from (base seed, cell coordinates, trial
index) through a fixed 64-bit mix, so grids are bit-identical for a fixed
base seed regardless of worker count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import selection, synth

_MASK64 = (1 << 64) - 1
# Fraction of failed trials above which a cell is marked invalid.
_FAILURE_BUDGET = 0.1


def mix64(*parts):
    """Deterministic 64-bit mix of integer parts (splitmix64 chain).

    Stable across versions; used to derive per-trial seeds.
    """
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h + (int(p) & _MASK64)) & _MASK64
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & _MASK64
        h ^= h >> 27
        h = (h * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


@dataclass
class GridSpec:
    """A 2-D experiment grid: overlap ratios against oversampling ratios
    (second_axis="rho") or against common-energy levels (second_axis="tau",
    at a fixed oversampling ratio rho_fixed)."""

    k: int
    delta_values: tuple
    second_axis: str
    second_values: tuple
    trials: int
    base_seed: int
    method: str = "omp"
    spectrum: object = "orthoblock"
    n: int | None = None
    rho_fixed: float = 0.1

    def __post_init__(self):
        self.delta_values = tuple(float(v) for v in self.delta_values)
        self.second_values = tuple(float(v) for v in self.second_values)
        if self.second_axis not in ("rho", "tau"):
            raise ValueError(f"second_axis must be 'rho' or 'tau', got {self.second_axis!r}")
        if self.method not in ("omp", "nn", "both"):
            raise ValueError(f"method must be 'omp', 'nn', or 'both', got {self.method!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.delta_values or not self.second_values:
            raise ValueError("grid axes must be nonempty")
        for dlt in self.delta_values:
            if not 0.0 <= dlt <= 1.0:
                raise ValueError(f"overlap ratio must be in [0, 1], got {dlt}")
        for v in self.second_values:
            if self.second_axis == "rho" and not 0.0 < v <= 1.0:
                raise ValueError(f"oversampling ratio must be in (0, 1], got {v}")
            if self.second_axis == "tau" and not 0.0 <= v < 1.0:
                raise ValueError(f"common energy must be in [0, 1), got {v}")
        if not 0.0 < self.rho_fixed <= 1.0:
            raise ValueError(f"rho_fixed must be in (0, 1], got {self.rho_fixed}")

    def cell_spec(self, row, col):
        """UnionSpec for the grid cell at (second-axis row, delta col)."""
        delta = self.delta_values[col]
        q = int(round(delta * self.k))
        if self.second_axis == "rho":
            rho = self.second_values[row]
            d = max(self.k, int(round(self.k / rho)))
            return synth.UnionSpec(k=self.k, q=q, d=d, model="m1",
                                   spectrum=self.spectrum, n=self.n, seed=0)
        d = max(self.k, int(round(self.k / self.rho_fixed)))
        return synth.UnionSpec(k=self.k, q=q, d=d, model="m2",
                               tau=self.second_values[row],
                               spectrum=self.spectrum, n=self.n, seed=0)


@dataclass
class PhaseGrid:
    """Estimated probability of exact feature selection per grid cell."""

    grid: GridSpec
    method: str
    p_efs: np.ndarray
    trials_done: np.ndarray
    valid: np.ndarray


def run_trial(spec, methods):
    """One Monte Carlo trial: generate the union, select features with each
    method at sparsity k, and return the per-method EFS fraction."""
    ensemble = synth.generate_union(spec)
    out = {}
    for method in methods:
        if method == "omp":
            fsets = selection.omp_feature_sets(
                ensemble, selection.StoppingRule.sparsity(spec.k), with_coeffs=False)
        else:
            fsets = selection.nn_feature_sets(ensemble, spec.k)
        out[method] = selection.efs_fraction(fsets, ensemble.labels)
    return out


def efs_probability(spec, method, trials, base_seed, cell=(0, 0)):
    """Mean per-point EFS fraction over seeded trials for one union spec.

    Returns (probability, completed trials, valid flag); a trial aborts on
    generation or selection failure, and a cell with more than 10% failed
    trials is invalid (probability NaN when nothing completed).
    """
    methods = ("omp", "nn") if method == "both" else (method,)
    sums = {m: 0.0 for m in methods}
    done = 0
    for t in range(trials):
        seed = mix64(base_seed, cell[0], cell[1], t)
        try:
            result = run_trial(synth.with_seed(spec, seed), methods)
        except Exception:
            continue
        for m in methods:
            sums[m] += result[m]
        done += 1
    valid = (trials - done) <= _FAILURE_BUDGET * trials
    if done == 0:
        probs = {m: float("nan") for m in methods}
        valid = False
    else:
        probs = {m: sums[m] / done for m in methods}
    if method == "both":
        return probs, done, valid
    return probs[method], done, valid


def _cell_worker(args):
    grid, row, col = args
    try:
        spec = grid.cell_spec(row, col)
    except ValueError:
        # infeasible cell (e.g. zero overlap under the bounded-energy
        # model): marked invalid, never a global abort
        methods = ("omp", "nn") if grid.method == "both" else (grid.method,)
        probs = {m: float("nan") for m in methods}
        if grid.method != "both":
            probs = probs[grid.method]
        return row, col, probs, 0, False
    probs, done, valid = efs_probability(spec, grid.method, grid.trials,
                                         grid.base_seed, cell=(row, col))
    return row, col, probs, done, valid


def _run_cells(grid, workers):
    rows, cols = len(grid.second_values), len(grid.delta_values)
    tasks = [(grid, r, c) for r in range(rows) for c in range(cols)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_worker, tasks))
    else:
        results = [_cell_worker(t) for t in tasks]
    return results


def phase_transition(grid, workers=1):
    """Fill the grid cell by cell; returns one PhaseGrid (or a pair when
    the grid method is "both"; see omp_vs_nn)."""
    rows, cols = len(grid.second_values), len(grid.delta_values)
    methods = ("omp", "nn") if grid.method == "both" else (grid.method,)
    p = {m: np.full((rows, cols), np.nan) for m in methods}
    done = np.zeros((rows, cols), dtype=int)
    valid = np.zeros((rows, cols), dtype=bool)
    for row, col, probs, n_done, ok in _run_cells(grid, workers):
        if grid.method != "both":
            probs = {grid.method: probs}
        for m in methods:
            p[m][row, col] = probs[m]
        done[row, col] = n_done
        valid[row, col] = ok
    grids = tuple(PhaseGrid(grid=grid, method=m, p_efs=p[m], trials_done=done.copy(),
                            valid=valid.copy()) for m in methods)
    return grids if grid.method == "both" else grids[0]


def omp_vs_nn(grid, workers=1):
    """Paired phase grids for OMP and NN on identical per-trial ensembles."""
    paired = replace(grid, method="both")
    return phase_transition(paired, workers=workers)


def bounded_energy_sweep(k, rho_fixed, delta_axis, tau_axis, trials, seed,
                         spectrum="orthoblock", n=None, workers=1):
    """Bounded-energy (model m2) grid over overlap and common energy at a
    fixed oversampling ratio."""
    grid = GridSpec(k=k, delta_values=tuple(delta_axis), second_axis="tau",
                    second_values=tuple(tau_axis), trials=trials, base_seed=seed,
                    method="omp", spectrum=spectrum, n=n, rho_fixed=rho_fixed)
    return phase_transition(grid, workers=workers)


def phase_boundary(deltas, p_values):
    """First overlap ratio at which the EFS probability drops below 0.5,
    linearly interpolated between grid points.

    Returns the first grid value if the curve starts below 0.5 and the
    last grid value if it never drops below 0.5.
    """
    deltas = np.asarray(deltas, dtype=float)
    p_values = np.asarray(p_values, dtype=float)
    if deltas.shape != p_values.shape or deltas.ndim != 1:
        raise ValueError("deltas and p_values must be 1-D arrays of equal length")
    if np.any(np.diff(deltas) <= 0):
        raise ValueError("deltas must be strictly increasing")
    below = p_values < 0.5
    if not np.any(below):
        return float(deltas[-1])
    i = int(np.argmax(below))
    if i == 0:
        return float(deltas[0])
    d0, d1 = deltas[i - 1], deltas[i]
    p0, p1 = p_values[i - 1], p_values[i]
    return float(d0 + (p0 - 0.5) * (d1 - d0) / (p0 - p1))
