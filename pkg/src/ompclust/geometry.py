"""Geometric quantities and certificates for unions of subspaces.

Coherence between clusters, principal angles / cross-spectra, covering
diameter estimates, the inradius map, the exact-feature-selection (EFS)
sufficient conditions, the exact recovery condition (ERC) diagnostic, and
the auxiliary square-root inequality used by the main certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics

# 12**(1/4), the constant in the covering-radius penalty term.
FOURTH_ROOT_12 = 12.0 ** 0.25

ORTHONORMALITY_TOL = 1e-10
UNIT_NORM_TOL = 1e-10
SPAN_TOL = 1e-8


def _check_unit_columns(y, name, tol=UNIT_NORM_TOL):
    y = numerics.check_matrix(y, name)
    norms = np.linalg.norm(y, axis=0)
    if np.max(np.abs(norms - 1.0)) > tol:
        raise ValueError(f"columns of {name} must be unit-norm within {tol}")
    return y


@dataclass
class SubspaceBasis:
    """Orthonormal basis (n x k columns) for one subspace."""

    phi: np.ndarray

    def __post_init__(self):
        phi = numerics.check_matrix(self.phi, "basis")
        k = phi.shape[1]
        if k > phi.shape[0]:
            raise ValueError(f"basis has more columns ({k}) than ambient rows ({phi.shape[0]})")
        gram = phi.T @ phi
        if np.max(np.abs(gram - np.eye(k))) > ORTHONORMALITY_TOL:
            raise ValueError("basis columns are not orthonormal within 1e-10")
        self.phi = phi

    @property
    def ambient(self):
        return self.phi.shape[0]

    @property
    def dim(self):
        return self.phi.shape[1]


@dataclass
class CrossSpectrum:
    """Sorted singular values of phi_i^T phi_j, with the overlap count q."""

    sigma: np.ndarray
    q: int

    @classmethod
    def from_sigma(cls, sigma, rtol=numerics.RANK_RTOL):
        sigma = np.asarray(sigma, dtype=float)
        sigma = np.clip(sigma, 0.0, 1.0)
        sigma = np.sort(sigma)[::-1]
        if sigma.size and sigma[0] > 0.0:
            q = int(np.sum(sigma > rtol * sigma[0]))
        else:
            q = 0
        return cls(sigma=sigma, q=q)

    def l1(self):
        return float(np.sum(self.sigma))

    def max(self):
        return float(self.sigma[0]) if self.sigma.size else 0.0


@dataclass
class CoveringEstimate:
    """Monte Carlo covering-diameter estimate (always a lower bound)."""

    diameter: float
    samples_used: int
    is_lower_bound: bool = True


@dataclass
class EfsCertificate:
    """Outcome of one sufficient condition: holds iff lhs < rhs."""

    holds: bool
    lhs: float
    rhs: float
    condition_id: str


def mutual_coherence(yi, yj):
    """Largest |<u, v>| over column pairs drawn from two unit-norm sets."""
    yi = _check_unit_columns(yi, "yi")
    yj = _check_unit_columns(yj, "yj")
    if yi.shape[0] != yj.shape[0]:
        raise ValueError("point sets live in different ambient dimensions")
    return float(np.max(np.abs(yi.T @ yj)))


def max_mutual_coherence(ensemble, cluster_index):
    """Max of mutual_coherence between one cluster and every other cluster."""
    labels = np.asarray(ensemble.labels)
    ids = np.unique(labels)
    if ids.size < 2:
        raise ValueError("ensemble has a single cluster; coherence between clusters undefined")
    if cluster_index not in ids:
        raise ValueError(f"no cluster labeled {cluster_index}")
    own = ensemble.points[:, labels == cluster_index]
    best = 0.0
    for other in ids:
        if other == cluster_index:
            continue
        best = max(best, mutual_coherence(own, ensemble.points[:, labels == other]))
    return best


def principal_angles(phi_i, phi_j):
    """Cross-spectrum (cosines of principal angles) of two subspaces.

    Singular values of phi_i^T phi_j, clipped to [0, 1] to absorb
    roundoff; the angles themselves are arccos of the returned sigma.
    """
    if phi_i.ambient != phi_j.ambient:
        raise ValueError("bases live in different ambient dimensions")
    g = phi_i.phi.T @ phi_j.phi
    sigma = numerics.svd(g).sigma
    return CrossSpectrum.from_sigma(sigma)


def projective_distance(u, y):
    """sqrt(1 - <u, y>^2 / (|u|^2 |y|^2)); sign-invariant, in [0, 1]."""
    u = numerics.check_vector(u, "u")
    y = numerics.check_vector(y, "y")
    nu = np.linalg.norm(u)
    ny = np.linalg.norm(y)
    if nu < 1e-300 or ny < 1e-300:
        raise ValueError("projective distance undefined for zero vectors")
    c = abs(float(u @ y)) / (nu * ny)
    return float(np.sqrt(max(0.0, 1.0 - min(c, 1.0) ** 2)))


def _sample_directions(basis, num_dirs, seed):
    """num_dirs unit directions u = phi a / |phi a| with standard normal a.

    A fixed seed yields a prefix-stable stream: the first m directions of
    a longer draw equal the m-direction draw.
    """
    rng = np.random.default_rng(seed)
    alpha = rng.standard_normal((num_dirs, basis.dim))
    norms = np.linalg.norm(alpha, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        alpha[bad] = rng.standard_normal((int(np.sum(bad)), basis.dim))
        norms = np.linalg.norm(alpha, axis=1)
    return (basis.phi @ (alpha / norms[:, None]).T).T


def _check_in_span(cluster, basis, tol=SPAN_TOL):
    resid = cluster - basis.phi @ (basis.phi.T @ cluster)
    worst = float(np.max(np.abs(resid)))
    if worst > tol:
        raise ValueError(f"cluster columns leave the basis span by {worst:.3e} (> {tol})")


def covering_diameter(cluster, basis, num_dirs=2000, seed=0):
    """Monte Carlo estimate of the maximal leave-one-out covering diameter.

    The target is the worst covering over all subsets obtained by removing
    a single point.  For a fixed direction u, the worst leave-one-out
    minimum distance is attained by removing u's nearest point, i.e. it is
    the second-smallest projective distance from u to the sample; the
    estimate is twice the maximum of that value over sampled directions.
    Always a lower bound on the true diameter.
    """
    cluster = _check_unit_columns(cluster, "cluster")
    if cluster.shape[1] < 2:
        raise ValueError("covering diameter needs at least 2 points")
    if num_dirs < 1:
        raise ValueError("num_dirs must be >= 1")
    _check_in_span(cluster, basis)
    dirs = _sample_directions(basis, num_dirs, seed)
    cosines = np.clip(np.abs(dirs @ cluster), 0.0, 1.0)
    dist = np.sqrt(1.0 - cosines ** 2)
    second = np.partition(dist, 1, axis=1)[:, 1]
    return CoveringEstimate(diameter=float(2.0 * np.max(second)), samples_used=num_dirs)


def covering_diameter_full(cluster, basis, num_dirs=2000, seed=0):
    """Monte Carlo estimate of twice the plain covering radius of the set.

    Largest sampled distance from a direction in the subspace to its
    nearest sample point, doubled; no leave-one-out.  Lower bound.
    """
    cluster = _check_unit_columns(cluster, "cluster")
    _check_in_span(cluster, basis)
    if num_dirs < 1:
        raise ValueError("num_dirs must be >= 1")
    dirs = _sample_directions(basis, num_dirs, seed)
    cosines = np.clip(np.abs(dirs @ cluster), 0.0, 1.0)
    dist = np.sqrt(1.0 - cosines ** 2)
    return CoveringEstimate(diameter=float(2.0 * np.max(np.min(dist, axis=1))),
                            samples_used=num_dirs)


def covering_diameter_proxy(cluster):
    """Data-only covering proxy: twice the max over points of the minimum
    leave-one-out projective distance to the remaining points.

    Needs no basis and no sampling; not interchangeable with the
    theorem-grade Monte Carlo estimate.
    """
    cluster = _check_unit_columns(cluster, "cluster")
    d = cluster.shape[1]
    if d < 2:
        raise ValueError("covering proxy needs at least 2 points")
    cosines = np.clip(np.abs(cluster.T @ cluster), 0.0, 1.0)
    dist = np.sqrt(1.0 - cosines ** 2)
    np.fill_diagonal(dist, np.inf)
    return float(2.0 * np.max(np.min(dist, axis=1)))


def inradius_from_diameter(eps):
    """Inradius sqrt(1 - eps^2 / 4) of a set with covering diameter eps."""
    eps = float(eps)
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"covering diameter must be in [0, 2], got {eps}")
    return float(np.sqrt(1.0 - eps ** 2 / 4.0))


def efs_condition_thm1(mu_c, eps, max_cos_theta):
    """General sufficient condition for EFS of a whole cluster.

    Holds iff mu_c < sqrt(1 - eps^2/4) - (eps / 12^(1/4)) * max_cos_theta.
    The inequality is strict; boundary equality fails the certificate.
    """
    mu_c = float(mu_c)
    eps = float(eps)
    max_cos_theta = float(max_cos_theta)
    if not 0.0 <= mu_c <= 1.0:
        raise ValueError(f"mu_c must be in [0, 1], got {mu_c}")
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must be in [0, 2], got {eps}")
    if not 0.0 <= max_cos_theta <= 1.0:
        raise ValueError(f"max_cos_theta must be in [0, 1], got {max_cos_theta}")
    rhs = inradius_from_diameter(eps) - (eps / FOURTH_ROOT_12) * max_cos_theta
    return EfsCertificate(holds=mu_c < rhs, lhs=mu_c, rhs=rhs, condition_id="thm1")


def efs_condition_cor1(eps, max_cos_theta):
    """Disjoint-subspace sufficient condition for EFS of a whole cluster.

    Holds iff max_cos_theta < sqrt(1 - eps^2/4) / (1 + eps / 12^(1/4)).
    """
    eps = float(eps)
    max_cos_theta = float(max_cos_theta)
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must be in [0, 2], got {eps}")
    if not 0.0 <= max_cos_theta < 1.0:
        raise ValueError(f"max_cos_theta must be in [0, 1) for disjoint subspaces, got {max_cos_theta}")
    rhs = inradius_from_diameter(eps) / (1.0 + eps / FOURTH_ROOT_12)
    return EfsCertificate(holds=max_cos_theta < rhs, lhs=max_cos_theta, rhs=rhs,
                          condition_id="cor1")


def bounding_constant(yi, yj, phi_i, phi_j, rtol=numerics.RANK_RTOL):
    """Uniform bound gamma on coherence with the supporting principal vectors.

    Computes g = phi_i^T phi_j, keeps the principal vectors for the q
    nonzero singular values, and returns the entrywise max of
    |yi^T (phi_i u_q)| and |yj^T (phi_j v_q)|.  Returns 0 when the
    subspaces are orthogonal (q = 0).
    """
    yi = _check_unit_columns(yi, "yi")
    yj = _check_unit_columns(yj, "yj")
    g = phi_i.phi.T @ phi_j.phi
    res = numerics.svd(g)
    q = res.rank(rtol)
    if q == 0:
        return 0.0
    u_tilde = phi_i.phi @ res.u[:, :q]
    v_tilde = phi_j.phi @ res.vt[:q].T
    return float(max(np.max(np.abs(yi.T @ u_tilde)), np.max(np.abs(yj.T @ v_tilde))))


def efs_condition_thm3(eps, gamma, cross):
    """Bounded-union sufficient condition for EFS of a whole cluster.

    Requires the hypothesis gamma < sqrt(1/q).  Holds iff
    eps < sqrt(1 - gamma^2 |sigma|_1^2); when gamma |sigma|_1 >= 1 the
    bound is vacuous and the certificate fails with rhs = 0.
    """
    eps = float(eps)
    gamma = float(gamma)
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must be in [0, 2], got {eps}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    if cross.q > 0 and gamma >= np.sqrt(1.0 / cross.q):
        raise ValueError(
            f"hypothesis gamma < sqrt(1/q) violated: gamma={gamma}, q={cross.q}")
    t = gamma * cross.l1()
    rhs = float(np.sqrt(1.0 - t ** 2)) if t < 1.0 else 0.0
    return EfsCertificate(holds=eps < rhs, lhs=eps, rhs=rhs, condition_id="thm3")


def erc(dictionary, lam):
    """Exact recovery condition value max_{i not in lam} |pinv(A_lam) a_i|_1.

    A value < 1 guarantees exact support recovery over the sub-dictionary.
    The sub-dictionary must have full column rank.
    """
    a = numerics.check_matrix(dictionary, "dictionary")
    lam = list(lam)
    if len(lam) == 0:
        raise ValueError("index set must be nonempty")
    if len(set(lam)) != len(lam):
        raise ValueError("index set contains duplicates")
    if min(lam) < 0 or max(lam) >= a.shape[1]:
        raise ValueError("index set out of range")
    sub = a[:, lam]
    res = numerics.svd(sub)
    if res.rank() < len(lam):
        raise ValueError("sub-dictionary is rank deficient")
    others = [i for i in range(a.shape[1]) if i not in set(lam)]
    if not others:
        return 0.0
    pinv = numerics.pseudoinverse(sub)
    return float(np.max(np.sum(np.abs(pinv @ a[:, others]), axis=0)))


def lemma1_gap(x):
    """(sqrt(2 - sqrt(4 - x^2)), x / 12^(1/4)) for x in [0, 1]; lhs <= rhs."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    lhs = float(np.sqrt(2.0 - np.sqrt(4.0 - x ** 2)))
    rhs = x / FOURTH_ROOT_12
    return lhs, rhs
