import numpy as np
import pytest

from ompclust import geometry, numerics, selection
from circle_oracles import (bounded_arc_instance, circle_points,
                            exact_loo_covering_diameter,
                            general_position_instance, jittered_angles,
                            plane_pair, sample_plane_points)


def unit_columns(a):
    return a / np.linalg.norm(a, axis=0)


class TestMutualCoherence:
    def test_identical_singletons(self):
        e1 = np.array([[1.0], [0.0]])
        assert geometry.mutual_coherence(e1, e1) == pytest.approx(1.0)

    def test_orthogonal_sets(self):
        yi = np.array([[1.0], [0.0]])
        yj = np.array([[0.0], [1.0]])
        assert geometry.mutual_coherence(yi, yj) == 0.0

    def test_matches_brute_force_double_loop(self):
        rng = np.random.default_rng(0)
        yi = unit_columns(rng.standard_normal((6, 10)))
        yj = unit_columns(rng.standard_normal((6, 10)))
        best = 0.0
        for a in range(10):
            for b in range(10):
                best = max(best, abs(float(yi[:, a] @ yj[:, b])))
        assert geometry.mutual_coherence(yi, yj) == pytest.approx(best, abs=0.0)

    def test_rejects_non_unit_columns(self):
        with pytest.raises(ValueError):
            geometry.mutual_coherence(np.array([[2.0], [0.0]]), np.array([[1.0], [0.0]]))


class TestMaxMutualCoherence:
    @staticmethod
    def _ensemble(points, labels):
        class Ens:
            pass
        e = Ens()
        e.points = points
        e.labels = np.asarray(labels)
        return e

    def test_two_orthogonal_clusters(self):
        pts = np.eye(4)[:, :4]
        ens = self._ensemble(pts, [0, 0, 1, 1])
        assert geometry.max_mutual_coherence(ens, 0) == 0.0

    def test_shared_direction_gives_one(self):
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        e3 = np.array([0.0, 0.0, 1.0])
        pts = np.column_stack([e1, e2, e1, e3])
        ens = self._ensemble(pts, [0, 0, 1, 2])
        assert geometry.max_mutual_coherence(ens, 0) == pytest.approx(1.0)

    def test_matches_pairwise_brute_force(self):
        rng = np.random.default_rng(1)
        pts = unit_columns(rng.standard_normal((5, 12)))
        labels = np.array([0] * 4 + [1] * 4 + [2] * 4)
        ens = self._ensemble(pts, labels)
        own = pts[:, labels == 1]
        oracle = max(
            geometry.mutual_coherence(own, pts[:, labels == 0]),
            geometry.mutual_coherence(own, pts[:, labels == 2]))
        assert geometry.max_mutual_coherence(ens, 1) == pytest.approx(oracle, abs=0.0)

    def test_single_cluster_rejected(self):
        pts = unit_columns(np.random.default_rng(2).standard_normal((4, 5)))
        ens = self._ensemble(pts, [0] * 5)
        with pytest.raises(ValueError):
            geometry.max_mutual_coherence(ens, 0)


class TestPrincipalAngles:
    def test_identical_subspaces(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        basis = geometry.SubspaceBasis(q)
        cross = geometry.principal_angles(basis, basis)
        assert np.allclose(cross.sigma, 1.0)
        assert cross.q == 3

    def test_orthogonal_subspaces(self):
        b1 = geometry.SubspaceBasis(np.eye(6)[:, :2])
        b2 = geometry.SubspaceBasis(np.eye(6)[:, 3:5])
        cross = geometry.principal_angles(b1, b2)
        assert np.allclose(cross.sigma, 0.0)
        assert cross.q == 0

    def test_planes_sharing_one_axis(self):
        theta = 0.7
        b1 = geometry.SubspaceBasis(np.eye(3)[:, :2])
        phi2 = np.column_stack([
            [1.0, 0.0, 0.0],
            [0.0, np.cos(theta), np.sin(theta)],
        ])
        b2 = geometry.SubspaceBasis(phi2)
        cross = geometry.principal_angles(b1, b2)
        assert np.allclose(cross.sigma, [1.0, np.cos(theta)], atol=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        q1, _ = np.linalg.qr(rng.standard_normal((8, 3)))
        q2, _ = np.linalg.qr(rng.standard_normal((8, 4)))
        b1, b2 = geometry.SubspaceBasis(q1), geometry.SubspaceBasis(q2)
        s12 = geometry.principal_angles(b1, b2).sigma
        s21 = geometry.principal_angles(b2, b1).sigma
        assert np.max(np.abs(s12 - s21)) < 1e-10

    def test_upper_bounds_mutual_coherence(self):
        rng = np.random.default_rng(5)
        for trial in range(10):
            q1, _ = np.linalg.qr(rng.standard_normal((7, 2)))
            q2, _ = np.linalg.qr(rng.standard_normal((7, 3)))
            b1, b2 = geometry.SubspaceBasis(q1), geometry.SubspaceBasis(q2)
            yi = unit_columns(q1 @ rng.standard_normal((2, 15)))
            yj = unit_columns(q2 @ rng.standard_normal((3, 15)))
            mu = geometry.mutual_coherence(yi, yj)
            assert mu <= geometry.principal_angles(b1, b2).max() + 1e-8

    def test_ambient_mismatch(self):
        b1 = geometry.SubspaceBasis(np.eye(4)[:, :2])
        b2 = geometry.SubspaceBasis(np.eye(5)[:, :2])
        with pytest.raises(ValueError):
            geometry.principal_angles(b1, b2)


class TestProjectiveDistance:
    def test_equal_vectors(self):
        u = np.array([1.0, 2.0, 2.0])
        # sqrt(1 - c^2) amplifies a 1-ulp error in c to ~1e-8 near c = 1
        assert geometry.projective_distance(u, u) == pytest.approx(0.0, abs=1e-7)

    def test_orthogonal_vectors(self):
        assert geometry.projective_distance(
            np.array([1.0, 0.0]), np.array([0.0, 3.0])) == pytest.approx(1.0)

    def test_antipodal_is_zero(self):
        u = np.array([0.3, -0.4, 0.5])
        assert geometry.projective_distance(u, -u) == pytest.approx(0.0, abs=1e-7)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            geometry.projective_distance(np.zeros(3), np.ones(3))


class TestCoveringDiameter:
    def test_collinear_line_is_zero(self):
        basis = geometry.SubspaceBasis(np.eye(3)[:, :1])
        cluster = np.column_stack([[1.0, 0, 0], [-1.0, 0, 0], [1.0, 0, 0]])
        est = geometry.covering_diameter(cluster, basis, num_dirs=200, seed=1)
        assert est.diameter == pytest.approx(0.0, abs=1e-7)
        assert est.is_lower_bound

    def test_leave_one_out_matches_angle_oracle(self):
        rng = np.random.default_rng(6)
        basis = geometry.SubspaceBasis(np.eye(5)[:, :2])
        angles = jittered_angles(12, rng)
        cluster = circle_points(basis.phi, angles)
        exact = exact_loo_covering_diameter(angles)
        est = geometry.covering_diameter(cluster, basis, num_dirs=20000, seed=2)
        assert est.diameter <= exact + 1e-9  # lower bound
        assert est.diameter == pytest.approx(exact, abs=0.02)

    def test_two_point_leave_one_out_is_vacuous(self):
        # Removing one of two points leaves a single point, whose covering
        # of the whole circle is 1; the leave-one-out diameter tends to 2.
        basis = geometry.SubspaceBasis(np.eye(4)[:, :2])
        cluster = np.eye(4)[:, :2]
        est = geometry.covering_diameter(cluster, basis, num_dirs=20000, seed=3)
        assert est.diameter == pytest.approx(2.0, abs=0.01)

    def test_two_point_full_cover_converges_to_sqrt2(self):
        # Deep hole of {e1, e2} sits at 45 degrees; the plain covering
        # diameter of the full set converges to 2 sin(45deg) = sqrt(2).
        basis = geometry.SubspaceBasis(np.eye(4)[:, :2])
        cluster = np.eye(4)[:, :2]
        est = geometry.covering_diameter_full(cluster, basis, num_dirs=20000, seed=3)
        assert est.diameter == pytest.approx(np.sqrt(2.0), abs=0.01)
        assert est.diameter <= np.sqrt(2.0) + 1e-12

    def test_dense_sampling_small_diameter(self):
        rng = np.random.default_rng(7)
        basis = geometry.SubspaceBasis(np.eye(6)[:, :2])
        cluster = sample_plane_points(basis.phi, 500, rng)
        est = geometry.covering_diameter(cluster, basis, num_dirs=4000, seed=4)
        assert est.diameter < 0.3

    def test_monotone_in_samples_for_fixed_seed(self):
        rng = np.random.default_rng(8)
        basis = geometry.SubspaceBasis(np.eye(4)[:, :2])
        cluster = sample_plane_points(basis.phi, 10, rng)
        prev = -1.0
        for num in (10, 50, 200, 1000):
            est = geometry.covering_diameter(cluster, basis, num_dirs=num, seed=5)
            assert est.diameter >= prev
            prev = est.diameter

    def test_preconditions(self):
        basis = geometry.SubspaceBasis(np.eye(4)[:, :2])
        one_point = np.array([[1.0], [0.0], [0.0], [0.0]])
        with pytest.raises(ValueError):
            geometry.covering_diameter(one_point, basis)
        off_span = unit_columns(np.ones((4, 3)))
        with pytest.raises(ValueError):
            geometry.covering_diameter(off_span, basis)

    def test_proxy_on_circle_points(self):
        basis = geometry.SubspaceBasis(np.eye(4)[:, :2])
        angles = np.array([0.0, np.pi / 6, np.pi / 2])
        cluster = circle_points(basis.phi, angles)
        # farthest point from its own nearest neighbor: e2 at distance
        # sin(pi/3) from the point at pi/6
        expected = 2.0 * np.sin(np.pi / 3)
        assert geometry.covering_diameter_proxy(cluster) == pytest.approx(expected)


class TestInradius:
    def test_values(self):
        assert geometry.inradius_from_diameter(0.0) == pytest.approx(1.0)
        assert geometry.inradius_from_diameter(2.0) == pytest.approx(0.0)
        assert geometry.inradius_from_diameter(1.0) == pytest.approx(np.sqrt(3) / 2)

    def test_domain(self):
        with pytest.raises(ValueError):
            geometry.inradius_from_diameter(-0.1)
        with pytest.raises(ValueError):
            geometry.inradius_from_diameter(2.1)

    def test_composition_with_covering_on_analytic_configurations(self):
        # For circle points the inradius equals the cosine between the
        # worst deep hole and its nearest sample, i.e. cos(M/2) where M is
        # the largest merged angle gap.
        rng = np.random.default_rng(55)
        for trial in range(10):
            angles = np.sort(jittered_angles(int(rng.integers(5, 25)), rng))
            eps = exact_loo_covering_diameter(angles)
            gaps = np.diff(np.concatenate([angles, [angles[0] + np.pi]]))
            merged = gaps + np.roll(gaps, -1)
            expected = np.cos(np.max(merged) / 2.0)
            assert geometry.inradius_from_diameter(eps) == pytest.approx(
                expected, abs=1e-12)


class TestConditionThm1:
    def test_zero_diameter_requires_mu_below_one(self):
        cert = geometry.efs_condition_thm1(0.99, 0.0, 1.0)
        assert cert.rhs == pytest.approx(1.0)
        assert cert.holds

    def test_intersecting_specialization(self):
        cert = geometry.efs_condition_thm1(0.1, 0.5, 1.0)
        expected = np.sqrt(1 - 0.0625) - 0.5 / 12 ** 0.25
        assert cert.rhs == pytest.approx(expected, abs=1e-12)
        # 12^(1/4) is approximately 1.86
        assert cert.rhs == pytest.approx(np.sqrt(1 - 0.0625) - 0.5 / 1.86, abs=2e-3)

    def test_boundary_equality_fails(self):
        rhs = geometry.efs_condition_thm1(0.0, 0.5, 1.0).rhs
        cert = geometry.efs_condition_thm1(rhs, 0.5, 1.0)
        assert not cert.holds


class TestConditionCor1:
    def test_zero_diameter(self):
        cert = geometry.efs_condition_cor1(0.0, 0.999)
        assert cert.rhs == pytest.approx(1.0)
        assert cert.holds

    def test_full_diameter_never_holds(self):
        cert = geometry.efs_condition_cor1(2.0, 0.0)
        assert cert.rhs == pytest.approx(0.0)
        assert not cert.holds

    def test_formula_reevaluation(self):
        cert = geometry.efs_condition_cor1(0.4, 0.5)
        expected = np.sqrt(1 - 0.04) / (1 + 0.4 / 12 ** 0.25)
        assert cert.rhs == pytest.approx(expected, abs=1e-12)
        assert cert.holds == (0.5 < expected)

    def test_intersecting_rejected(self):
        with pytest.raises(ValueError):
            geometry.efs_condition_cor1(0.5, 1.0)


class TestBoundingConstant:
    def test_orthogonal_subspaces(self):
        b1 = geometry.SubspaceBasis(np.eye(6)[:, :2])
        b2 = geometry.SubspaceBasis(np.eye(6)[:, 3:5])
        rng = np.random.default_rng(9)
        yi = unit_columns(b1.phi @ rng.standard_normal((2, 5)))
        yj = unit_columns(b2.phi @ rng.standard_normal((2, 5)))
        assert geometry.bounding_constant(yi, yj, b1, b2) == 0.0

    def test_point_on_principal_vector(self):
        b1, b2 = plane_pair(0.6, 0.3)
        b1 = geometry.SubspaceBasis(b1)
        b2 = geometry.SubspaceBasis(b2)
        yi = b1.phi[:, :1]  # e1 is the first left principal vector
        yj = unit_columns(b2.phi @ np.array([[0.5], [0.5]]))
        gamma = geometry.bounding_constant(yi, yj, b1, b2)
        assert gamma == pytest.approx(1.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(10)
        q1, _ = np.linalg.qr(rng.standard_normal((7, 3)))
        q2, _ = np.linalg.qr(rng.standard_normal((7, 3)))
        b1, b2 = geometry.SubspaceBasis(q1), geometry.SubspaceBasis(q2)
        yi = unit_columns(q1 @ rng.standard_normal((3, 8)))
        yj = unit_columns(q2 @ rng.standard_normal((3, 8)))
        g = q1.T @ q2
        u, s, vt = np.linalg.svd(g)
        q = int(np.sum(s > 1e-12 * s[0]))
        u_t = q1 @ u[:, :q]
        v_t = q2 @ vt[:q].T
        oracle = max(np.abs(yi.T @ u_t).max(), np.abs(yj.T @ v_t).max())
        assert geometry.bounding_constant(yi, yj, b1, b2) == pytest.approx(oracle, abs=0.0)


class TestConditionThm3:
    def test_orthogonal_reduces_to_eps_below_one(self):
        cross = geometry.CrossSpectrum.from_sigma(np.zeros(3))
        assert geometry.efs_condition_thm3(0.99, 0.5, cross).holds
        assert not geometry.efs_condition_thm3(1.01, 0.5, cross).holds
        assert geometry.efs_condition_thm3(0.0, 0.5, cross).rhs == pytest.approx(1.0)

    def test_vacuous_boundary(self):
        cross = geometry.CrossSpectrum.from_sigma(np.array([0.9, 0.9, 0.9, 0.9]))
        # gamma satisfies the hypothesis (< 0.5) but gamma * |sigma|_1 >= 1
        vac = geometry.efs_condition_thm3(0.0, 0.4, cross)
        assert vac.rhs == 0.0
        assert not vac.holds
        at_one = geometry.efs_condition_thm3(0.0, 1.0 / cross.l1(), cross)
        assert at_one.rhs == 0.0
        assert not at_one.holds

    def test_formula_reevaluation(self):
        cross = geometry.CrossSpectrum.from_sigma(np.array([0.9, 0.8, 0.5, 0.2]))
        cert = geometry.efs_condition_thm3(0.3, 0.3, cross)
        assert cert.rhs == pytest.approx(np.sqrt(1 - 0.09 * 5.76), abs=1e-12)

    def test_hypothesis_violation_rejected(self):
        cross = geometry.CrossSpectrum.from_sigma(np.array([0.9, 0.8, 0.5, 0.2]))
        with pytest.raises(ValueError):
            geometry.efs_condition_thm3(0.3, 0.51, cross)  # sqrt(1/4) = 0.5


class TestErc:
    def test_orthonormal_dictionary(self):
        assert geometry.erc(np.eye(5), [0, 2]) == pytest.approx(0.0)

    def test_duplicated_atom_at_least_one(self):
        rng = np.random.default_rng(11)
        a = unit_columns(rng.standard_normal((6, 4)))
        dictionary = np.column_stack([a, a[:, 0]])
        assert geometry.erc(dictionary, [0, 1]) >= 1.0

    def test_matches_per_atom_least_squares_oracle(self):
        rng = np.random.default_rng(12)
        a = unit_columns(rng.standard_normal((8, 12)))
        lam = [1, 5, 9]
        sub = a[:, lam]
        oracle = 0.0
        for i in range(12):
            if i in lam:
                continue
            coef = numerics.lstsq(sub, a[:, i])
            oracle = max(oracle, float(np.sum(np.abs(coef))))
        assert geometry.erc(a, lam) == pytest.approx(oracle, abs=1e-10)

    def test_rank_deficient_rejected(self):
        a = np.column_stack([np.eye(4)[:, 0], np.eye(4)[:, 0], np.eye(4)[:, 1]])
        with pytest.raises(ValueError):
            geometry.erc(a, [0, 1])


class TestLemma1:
    def test_endpoints(self):
        assert geometry.lemma1_gap(0.0) == (0.0, 0.0)
        lhs, rhs = geometry.lemma1_gap(1.0)
        assert lhs == pytest.approx(np.sqrt(2 - np.sqrt(3.0)), abs=1e-12)
        assert rhs == pytest.approx(1 / 12 ** 0.25, abs=1e-12)
        assert lhs <= rhs

    def test_grid_sweep(self):
        for x in np.linspace(0.0, 1.0, 101):
            lhs, rhs = geometry.lemma1_gap(float(x))
            assert lhs <= rhs

    def test_domain(self):
        with pytest.raises(ValueError):
            geometry.lemma1_gap(1.5)


def assert_cluster_efs(points, labels, d1, basis=None):
    """Every cluster-0 point must select only cluster-0 atoms, at every
    iteration; on the way, the running residual must stay in the cluster
    subspace when a basis is supplied."""
    stop = selection.StoppingRule.sparsity(2)
    for i in range(d1):
        fs = selection.omp(points[:, i], points, stop, exclude=(i,))
        for step, j in enumerate(fs.selected):
            assert labels[j] == 0, f"point {i} left the cluster at step {step}"
        if basis is not None:
            y = points[:, i]
            for m in range(1, len(fs.selected) + 1):
                sub = points[:, fs.selected[:m]]
                s = y - sub @ numerics.lstsq(sub, y)
                norm = np.linalg.norm(s)
                if norm > 1e-9:
                    off = s - basis @ (basis.T @ s)
                    assert np.linalg.norm(off) <= 1e-8 * norm


class TestTheoremSoundness:
    """Certified clusters must never contain an EFS failure."""

    def test_thm1_on_analytic_instances(self):
        rng = np.random.default_rng(100)
        certified = 0
        for trial in range(150):
            points, labels, d1, eps, mu, sigma1, b1 = general_position_instance(rng)
            if eps > 2.0:
                continue
            cert = geometry.efs_condition_thm1(mu, eps, sigma1)
            if not cert.holds:
                continue
            certified += 1
            assert_cluster_efs(points, labels, d1, basis=b1)
        assert certified >= 20

    def test_cor1_on_disjoint_instances(self):
        rng = np.random.default_rng(101)
        certified = 0
        for trial in range(150):
            points, labels, d1, eps, mu, sigma1, b1 = general_position_instance(rng)
            if eps > 2.0 or sigma1 >= 1.0:
                continue
            cert = geometry.efs_condition_cor1(eps, sigma1)
            if not cert.holds:
                continue
            certified += 1
            assert_cluster_efs(points, labels, d1)
        assert certified >= 20

    def test_thm3_on_bounded_instances(self):
        rng = np.random.default_rng(102)
        certified = 0
        for trial in range(150):
            points, labels, d1, eps, gamma, cross, b1 = bounded_arc_instance(rng)
            assert cross.q == 1
            if gamma >= 1.0 or eps > 2.0:
                continue
            cert = geometry.efs_condition_thm3(eps, gamma, cross)
            if not cert.holds:
                continue
            certified += 1
            assert_cluster_efs(points, labels, d1)
        assert certified >= 20
