"""Synthetic unions of two subspaces with controlled cross-spectra, and
coefficient models for sampling points from them.

A subspace pair is built so that the matrix of inner products between the
two bases is exactly diagonal; its diagonal is the requested cross-spectrum.
Points are drawn either uniformly on the subspace sphere (model m1) or with
a capped energy fraction in the shared principal directions (model m2).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import CrossSpectrum, SubspaceBasis

# Cross-spectrum decay rates for the structured shapes; sigma_i is the
# inner product of an atom with its shifted copy at a linearly growing
# shift, so the shapes follow the atoms' autocorrelation functions.  With
# these defaults the exponential spectrum lies pointwise at or below the
# lorentzian one, making it the fastest-decaying shape at every index.
LORENTZIAN_DECAY = 0.1
EXPONENTIAL_DECAY = 0.2

# Shift-atom layout: one support block of at least MIN_BLOCK samples per
# atom pair; atom width and maximum shift scale with the block.
MIN_BLOCK = 16
_ATOM_WIDTH_FRACTION = 1.0 / 16.0
_PSI_CENTER_FRACTION = 0.3
_MAX_SHIFT_FRACTION = 0.45

_REDRAW_TOL = 1e-12


def lorentzian_spectrum(k, q, decay=LORENTZIAN_DECAY):
    """First q entries 1/(1 + (decay*(i-1))^2), remaining entries zero."""
    sigma = np.zeros(k)
    i = np.arange(q)
    sigma[:q] = 1.0 / (1.0 + (decay * i) ** 2)
    return sigma


def exponential_spectrum(k, q, decay=EXPONENTIAL_DECAY):
    """First q entries (1 + x) exp(-x) with x = decay*(i-1), rest zero."""
    sigma = np.zeros(k)
    x = decay * np.arange(q)
    sigma[:q] = (1.0 + x) * np.exp(-x)
    return sigma


def orthoblock_spectrum(k, q):
    """q ones followed by k - q zeros (worst case at fixed overlap)."""
    sigma = np.zeros(k)
    sigma[:q] = 1.0
    return sigma


@dataclass
class UnionSpec:
    """Parameters of a two-subspace union.

    n defaults to 4k for the orthoblock and explicit constructions and to
    24k for the shift-invariant atom constructions (room for the atom
    support blocks).
    """

    k: int
    q: int
    d: int
    model: str = "m1"
    tau: float | None = None
    spectrum: object = "orthoblock"
    seed: int = 0
    n: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"subspace dimension must be >= 1, got {self.k}")
        if not 0 <= self.q <= self.k:
            raise ValueError(f"overlap must be in [0, {self.k}], got {self.q}")
        if self.d < self.k:
            raise ValueError(
                f"points per subspace must be >= k (oversampling ratio <= 1), "
                f"got d={self.d} < k={self.k}")
        if self.model not in ("m1", "m2"):
            raise ValueError(f"model must be 'm1' or 'm2', got {self.model!r}")
        if self.model == "m2":
            if self.tau is None or not 0.0 <= self.tau < 1.0:
                raise ValueError(f"model m2 needs tau in [0, 1), got {self.tau}")
            if not 0 < self.q < self.k:
                raise ValueError(
                    f"model m2 needs 0 < q < k, got q={self.q}, k={self.k}")
        if isinstance(self.spectrum, str):
            if self.spectrum not in ("orthoblock", "lorentzian", "exponential"):
                raise ValueError(f"unknown spectrum shape {self.spectrum!r}")
        else:
            sig = np.asarray(self.spectrum, dtype=float)
            if sig.ndim != 1 or sig.size > self.k:
                raise ValueError("explicit spectrum must be a 1-D list of <= k values")
            if np.any(sig < 0) or np.any(sig > 1):
                raise ValueError("explicit spectrum entries must lie in [0, 1]")
            if np.any(np.diff(sig) > 0):
                raise ValueError("explicit spectrum must be nonincreasing")
            nonzero = int(np.sum(sig > 0))
            if nonzero != self.q:
                raise ValueError(
                    f"explicit spectrum has {nonzero} nonzero entries but q={self.q}")
        if self.n is None:
            if isinstance(self.spectrum, str) and self.spectrum in ("lorentzian", "exponential"):
                self.n = 24 * self.k
            else:
                self.n = 4 * self.k
        if self.n < 1:
            raise ValueError(f"ambient dimension must be >= 1, got {self.n}")

    @property
    def delta(self):
        """Overlap ratio q / k."""
        return self.q / self.k

    @property
    def rho(self):
        """Oversampling ratio k / d."""
        return self.k / self.d

    def targets(self):
        """Requested cross-spectrum values (length k, nonincreasing)."""
        if isinstance(self.spectrum, str):
            if self.spectrum == "orthoblock":
                return orthoblock_spectrum(self.k, self.q)
            if self.spectrum == "lorentzian":
                return lorentzian_spectrum(self.k, self.q)
            return exponential_spectrum(self.k, self.q)
        sigma = np.zeros(self.k)
        sig = np.asarray(self.spectrum, dtype=float)
        sigma[:sig.size] = sig
        return sigma


@dataclass
class Ensemble:
    """Unit-norm point cloud with ground-truth labels and bases."""

    points: np.ndarray
    labels: np.ndarray
    bases: tuple
    spec: UnionSpec
    cross: CrossSpectrum = field(default=None)

    @property
    def total(self):
        return self.points.shape[1]

    def cluster(self, label):
        return self.points[:, self.labels == label]


def _coordinate_pair(spec, targets):
    """Exact pair from coordinate vectors: psi_i = e_i and phi_i rotated
    into a dedicated orthogonal direction by the target amount."""
    k, n = spec.k, spec.n
    extra = int(np.sum(targets < 1.0))
    if n < k + extra:
        raise ValueError(
            f"ambient dimension {n} too small: the construction needs "
            f"{k + extra} directions (k + number of non-identical atom pairs)")
    psi = np.zeros((n, k))
    phi = np.zeros((n, k))
    psi[np.arange(k), np.arange(k)] = 1.0
    nxt = k
    for i, sig in enumerate(targets):
        phi[i, i] = sig
        if sig < 1.0:
            phi[nxt, i] = np.sqrt(1.0 - sig ** 2)
            nxt += 1
    return psi, phi


def _atom(kind, length, center, width):
    t = np.arange(length, dtype=float)
    if kind == "lorentzian":
        a = 1.0 / (1.0 + ((t - center) / width) ** 2)
    else:
        a = np.exp(-np.abs(t - center) / width)
    return a / np.linalg.norm(a)


def _shift_pair(spec, targets):
    """Pair of shift-invariant atom dictionaries with diagonal inner products.

    Each atom pair lives in its own support block; the second atom is the
    first shifted by an amount bisected to meet the target inner product.
    Targets below the largest-shift floor (and exact zeros) fall back to
    an in-block rotation, which meets the target exactly.
    """
    k, n = spec.k, spec.n
    block = n // k
    if block < MIN_BLOCK:
        raise ValueError(
            f"ambient dimension {n} too small for shift atoms: needs at least "
            f"{MIN_BLOCK * k} samples ({MIN_BLOCK} per atom block)")
    width = max(1.5, block * _ATOM_WIDTH_FRACTION)
    center = block * _PSI_CENTER_FRACTION
    max_shift = block * _MAX_SHIFT_FRACTION
    kind = spec.spectrum

    psi = np.zeros((n, k))
    phi = np.zeros((n, k))
    base = _atom(kind, block, center, width)

    def inner_at(shift):
        return float(base @ _atom(kind, block, center + shift, width))

    floor = inner_at(max_shift)
    for i, target in enumerate(targets):
        lo_idx = i * block
        psi[lo_idx:lo_idx + block, i] = base
        if target >= 1.0:
            phi[lo_idx:lo_idx + block, i] = base
            continue
        if target > floor:
            lo, hi = 0.0, max_shift
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if inner_at(mid) > target:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 0.0:
                    break
            phi[lo_idx:lo_idx + block, i] = _atom(kind, block, center + 0.5 * (lo + hi), width)
        else:
            far = _atom(kind, block, center + max_shift, width)
            w = far - base * float(base @ far)
            w /= np.linalg.norm(w)
            phi[lo_idx:lo_idx + block, i] = target * base + np.sqrt(1.0 - target ** 2) * w
    return psi, phi


def build_subspace_pair(spec):
    """Construct the two bases and the achieved cross-spectrum.

    The inner-product matrix of the returned bases is exactly diagonal;
    its diagonal matches the requested spectrum (bisected shifts meet the
    targets to high accuracy, all other constructions exactly).
    """
    targets = spec.targets()
    if isinstance(spec.spectrum, str) and spec.spectrum in ("lorentzian", "exponential"):
        psi, phi = _shift_pair(spec, targets)
    else:
        psi, phi = _coordinate_pair(spec, targets)
    achieved = np.abs(np.einsum("ni,ni->i", psi, phi))
    achieved[targets == 0.0] = 0.0
    return (SubspaceBasis(psi), SubspaceBasis(phi),
            CrossSpectrum.from_sigma(achieved))


def sample_m1(basis, d, rng):
    """d unit points phi @ a / |phi @ a| with standard normal coefficients."""
    if d < 1:
        raise ValueError(f"need at least one point, got d={d}")
    k = basis.dim
    alpha = rng.standard_normal((k, d))
    norms = np.linalg.norm(alpha, axis=0)
    while np.any(norms < _REDRAW_TOL):
        bad = norms < _REDRAW_TOL
        alpha[:, bad] = rng.standard_normal((k, int(np.sum(bad))))
        norms = np.linalg.norm(alpha, axis=0)
    return basis.phi @ (alpha / norms)


def sample_m2(basis, d, q, tau, rng):
    """Bounded-energy sampling: the component in the first q directions is
    rescaled to tau and the rest to 1 - tau, then the point is renormalized.

    After renormalization the energy fraction in the first q directions is
    tau^2 / (tau^2 + (1 - tau)^2) for every point.
    """
    k = basis.dim
    if not 0 < q < k:
        raise ValueError(f"model m2 needs 0 < q < k, got q={q}, k={k}")
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must be in [0, 1), got {tau}")
    if d < 1:
        raise ValueError(f"need at least one point, got d={d}")
    alpha = rng.standard_normal((k, d))
    def norms(a):
        return np.linalg.norm(a[:q], axis=0), np.linalg.norm(a[q:], axis=0)
    nc, nd = norms(alpha)
    while np.any(nc < _REDRAW_TOL) or np.any(nd < _REDRAW_TOL):
        bad = (nc < _REDRAW_TOL) | (nd < _REDRAW_TOL)
        alpha[:, bad] = rng.standard_normal((k, int(np.sum(bad))))
        nc, nd = norms(alpha)
    beta = np.empty_like(alpha)
    beta[:q] = tau * alpha[:q] / nc
    beta[q:] = (1.0 - tau) * alpha[q:] / nd
    beta /= np.linalg.norm(beta, axis=0)
    return basis.phi @ beta


def generate_union(spec):
    """Build the subspace pair and sample labeled points from both clusters.

    Deterministic for a fixed spec (including its seed): the first cluster
    is always drawn first from the seeded generator.
    """
    basis_a, basis_b, cross = build_subspace_pair(spec)
    rng = np.random.default_rng(spec.seed)
    if spec.model == "m1":
        pts_a = sample_m1(basis_a, spec.d, rng)
        pts_b = sample_m1(basis_b, spec.d, rng)
    else:
        pts_a = sample_m2(basis_a, spec.d, spec.q, spec.tau, rng)
        pts_b = sample_m2(basis_b, spec.d, spec.q, spec.tau, rng)
    points = np.hstack([pts_a, pts_b])
    labels = np.repeat([0, 1], spec.d)
    return Ensemble(points=points, labels=labels, bases=(basis_a, basis_b),
                    spec=spec, cross=cross)


def with_seed(spec, seed):
    """Copy of the spec with a different seed."""
    return replace(spec, seed=seed)
