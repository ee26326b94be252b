import numpy as np
import pytest

from rblkit.completion import (
    centered_gram,
    complete_edm,
    edm_from_points,
    embed_from_gram,
    gram_from_edm,
    zero_imputed,
)
from rblkit.errors import CompletionInfeasibleError, IncompleteEdmError
from rblkit.geometry import Conformation, Pose, RigidBodyState, random_rotation
from rblkit.measurement import (
    AnchorSet,
    Edm,
    NoiseModel,
    assemble_edm,
    simulate_measurements,
)


def unit_cube() -> Conformation:
    return Conformation(
        np.array([[x, y, z] for x in (-0.5, 0.5) for y in (-0.5, 0.5) for z in (-0.5, 0.5)])
    )


def cube_anchors(side=3.0) -> AnchorSet:
    h = side / 2.0
    return AnchorSet(np.array([[x, y, z] for x in (-h, h) for y in (-h, h) for z in (-h, h)]))


def cube_edm(sigma=0.0, seed=0, pose=None) -> tuple[Edm, np.ndarray]:
    conf, anchors = unit_cube(), cube_anchors()
    pose = pose or Pose(random_rotation(np.random.default_rng(seed)), [0.3, -0.2, 0.1])
    state = RigidBodyState(conf, pose)
    meas = simulate_measurements(anchors, state, NoiseModel(range_sigma=sigma, seed=seed))
    truth = assemble_edm(
        anchors, conf, simulate_measurements(anchors, state, NoiseModel())
    ).squared_distances
    return assemble_edm(anchors, conf, meas), truth


def drop_cross_entries(edm: Edm, fraction: float, seed: int) -> Edm:
    """Remove a random fraction of cross entries, keeping >= 1 per node."""
    rng = np.random.default_rng(seed)
    a, k = edm.n_anchors, edm.n_nodes
    while True:
        keep = rng.random((a, k)) >= fraction
        if keep.any(axis=0).all():
            break
    d = edm.squared_distances.copy()
    known = edm.known_mask.copy()
    known[:a, a:] = keep
    known[a:, :a] = keep.T
    d[~known] = np.nan
    return Edm(d, known, a)


class TestGram:
    def test_two_points_analytic_eigenvalues(self):
        d = 2.5
        edm = Edm(np.array([[0.0, d * d], [d * d, 0.0]]), np.ones((2, 2), bool), n_anchors=1)
        eig = np.sort(np.linalg.eigvalsh(gram_from_edm(edm)))[::-1]
        assert eig[0] == pytest.approx(d * d / 2.0, abs=1e-12)
        assert eig[1] == pytest.approx(0.0, abs=1e-12)

    def test_coincident_points_zero_gram(self):
        edm = Edm(np.zeros((4, 4)), np.ones((4, 4), bool), n_anchors=2)
        assert np.allclose(gram_from_edm(edm), 0.0)

    def test_incomplete_input_raises(self):
        edm, _ = cube_edm()
        masked = drop_cross_entries(edm, 0.3, seed=1)
        with pytest.raises(IncompleteEdmError):
            gram_from_edm(masked)

    def test_embedding_round_trip(self):
        rng = np.random.default_rng(4)
        points = rng.uniform(-2, 2, size=(10, 3))
        d = edm_from_points(points)
        gram = centered_gram(d)
        embedded, eigvals = embed_from_gram(gram, dim=3)
        assert np.abs(edm_from_points(embedded) - d).max() < 1e-9
        assert np.sum(eigvals > 1e-9 * eigvals[0]) == 3


class TestCompleteEdm:
    def test_already_complete_returns_input(self):
        edm, _ = cube_edm()
        report = complete_edm(edm)
        assert report.iterations == 0
        assert report.converged
        assert np.array_equal(report.completed.squared_distances, edm.squared_distances)

    def test_noiseless_cube_30pct_removed(self):
        edm, truth = cube_edm(sigma=0.0, seed=42)
        masked = drop_cross_entries(edm, 0.3, seed=42)
        report = complete_edm(masked, max_iters=200)
        assert report.converged
        assert report.iterations <= 200
        removed = ~masked.known_mask
        rel = np.abs(report.completed.squared_distances[removed] - truth[removed]) / truth[removed]
        assert rel.max() < 1e-6

    def test_known_entries_bit_identical(self):
        edm, _ = cube_edm(sigma=0.15, seed=3)
        masked = drop_cross_entries(edm, 0.25, seed=3)
        report = complete_edm(masked)
        known = masked.known_mask
        assert np.array_equal(
            report.completed.squared_distances[known], masked.squared_distances[known]
        )

    def test_completed_is_hollow_symmetric_nonnegative(self):
        edm, _ = cube_edm(sigma=0.1, seed=6)
        masked = drop_cross_entries(edm, 0.2, seed=6)
        out = complete_edm(masked).completed
        d = out.squared_distances
        assert out.is_complete()
        assert np.allclose(np.diag(d), 0.0)
        assert np.abs(d - d.T).max() == 0.0
        assert np.all(d >= 0.0)

    def test_orphaned_node_raises_with_indices(self):
        edm, _ = cube_edm()
        a = edm.n_anchors
        known = edm.known_mask.copy()
        known[:a, a + 2] = False
        known[a + 2, :a] = False
        d = edm.squared_distances.copy()
        d[~known] = np.nan
        with pytest.raises(CompletionInfeasibleError) as exc:
            complete_edm(Edm(d, known, a))
        assert exc.value.nodes == (2,)

    def test_noiseless_mismatch_nonexpansive(self):
        edm, _ = cube_edm(sigma=0.0, seed=9)
        masked = drop_cross_entries(edm, 0.3, seed=9)
        first = complete_edm(masked, max_iters=1)
        full = complete_edm(masked)
        assert full.final_mismatch <= first.final_mismatch + 1e-15

    def test_change_history_monotone_near_convergence(self):
        edm, _ = cube_edm(sigma=0.05, seed=10)
        masked = drop_cross_entries(edm, 0.3, seed=10)
        report = complete_edm(masked)
        assert report.converged
        tail = report.change_history[-10:]
        for earlier, later in zip(tail, tail[1:]):
            assert later <= earlier * (1.0 + 1e-9) + 1e-16

    def test_report_json(self):
        edm, _ = cube_edm(sigma=0.0, seed=12)
        masked = drop_cross_entries(edm, 0.2, seed=12)
        doc = complete_edm(masked).to_json_dict()
        assert set(doc) == {"completed", "iterations", "final_mismatch", "converged"}
        assert doc["converged"] is True


class TestCompletionBenefit:
    def test_beats_zero_imputation_downstream(self):
        # Paired trials: same noisy masked EDM through completion vs zero
        # fill, compared on translation MSE of the MDS pose downstream.
        from conftest import cube_anchors as build_anchors
        from conftest import random_pose, unit_cube as build_cube
        from rblkit.estimators import estimate_pose_mds
        from rblkit.geometry import RigidBodyState
        from rblkit.measurement import simulate_measurements

        conf, anchors = build_cube(), build_anchors()
        sq_completed, sq_zero = 0.0, 0.0
        trials = 500
        for trial in range(trials):
            rng = np.random.default_rng(200_000 + trial)
            truth = random_pose(rng)
            meas = simulate_measurements(
                anchors,
                RigidBodyState(conf, truth),
                NoiseModel(range_sigma=0.1, seed=300_000 + trial),
            )
            edm = assemble_edm(anchors, conf, meas)
            masked = drop_cross_entries(edm, 0.2, seed=400_000 + trial)
            est_c = estimate_pose_mds(complete_edm(masked).completed, anchors, conf)
            est_z = estimate_pose_mds(zero_imputed(masked), anchors, conf)
            sq_completed += np.linalg.norm(est_c.pose.translation - truth.translation) ** 2
            sq_zero += np.linalg.norm(est_z.pose.translation - truth.translation) ** 2
        assert sq_completed / trials < sq_zero / trials


class TestZeroImputed:
    def test_fills_unknown_with_zero(self):
        edm, _ = cube_edm()
        masked = drop_cross_entries(edm, 0.4, seed=5)
        filled = zero_imputed(masked)
        assert filled.is_complete()
        removed = ~masked.known_mask
        assert np.all(filled.squared_distances[removed] == 0.0)
        assert np.array_equal(
            filled.squared_distances[masked.known_mask],
            masked.squared_distances[masked.known_mask],
        )
