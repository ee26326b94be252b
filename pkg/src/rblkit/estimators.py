"""Pose estimators: algebraic (MDS), iterative least squares, and Gaussian
belief propagation, plus anchorless relative localization and semantic
heading transforms.

All estimators return a PoseEstimate whose rotation satisfies the Pose
invariants; iterative methods report convergence honestly instead of
raising on a missed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .completion import complete_edm, embed_from_gram, gram_from_edm
from .errors import (
    AmbiguousAlignmentError,
    DegenerateEmbeddingError,
    IncompleteEdmError,
    InvalidHeadingError,
    UnderdeterminedError,
)
from .geometry import Conformation, Pose, apply_pose, so3_exp, so3_project
from .measurement import AnchorSet, Edm, MeasurementSet, NoiseModel, assemble_edm, wrap_angle


@dataclass(frozen=True)
class PoseEstimate:
    """Estimated pose with solver diagnostics.

    per_node_positions holds the intermediate per-node world estimate for
    two-stage methods; node_variances the per-coordinate belief variances
    when the method produces them (GaBP's soft output). residual_rms is the
    RMS of observed-range residuals at the returned pose, in meters.
    """

    pose: Pose
    method_tag: str
    residual_rms: float = float("nan")
    iterations: int = 0
    per_node_positions: np.ndarray | None = None
    node_variances: np.ndarray | None = None
    converged: bool = True
    projection_distance: float = 0.0
    message: str = ""

    def to_json_dict(self) -> dict:
        return {
            "rotation": [float(v) for v in self.pose.rotation.ravel()],
            "axis_angle": [float(v) for v in self.pose.axis_angle()],
            "translation": [float(v) for v in self.pose.translation],
            "method_tag": self.method_tag,
            "residual_rms": float(self.residual_rms),
            "iterations": self.iterations,
            "converged": self.converged,
            "projection_distance": float(self.projection_distance),
            "message": self.message,
        }


@dataclass(frozen=True)
class NodeFix:
    """Single-node multilateration result.

    covariance is the unit-noise proxy inv(J^T J) of the range Jacobian at
    the solution; `ambiguous` flags mirror solutions (three anchors, or
    coplanar anchor geometry).
    """

    position: np.ndarray
    covariance: np.ndarray
    residual_rms: float
    ambiguous: bool


@dataclass(frozen=True)
class SemanticHeading:
    """Unit heading vector of a body plus its anchor point.

    body_vector is fixed in the body frame; world_vector is its image under
    the body's pose (defaults to the body vector for an unposed heading).
    """

    body_vector: np.ndarray
    world_vector: np.ndarray | None = None
    anchor_point: np.ndarray | None = None

    def __post_init__(self):
        body = np.asarray(self.body_vector, dtype=float)
        world = body.copy() if self.world_vector is None else np.asarray(self.world_vector, float)
        anchor = np.zeros(3) if self.anchor_point is None else np.asarray(self.anchor_point, float)
        for name, v in (("body_vector", body), ("world_vector", world)):
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise InvalidHeadingError(f"{name} must be a unit 3-vector")
        for arr in (body, world, anchor):
            arr.setflags(write=False)
        object.__setattr__(self, "body_vector", body)
        object.__setattr__(self, "world_vector", world)
        object.__setattr__(self, "anchor_point", anchor)


def _fit_alignment(source, target, weights, proper):
    """Closed-form weighted alignment target ~ Q source + t.

    With proper=True the result is constrained to SO(3) by flipping the
    smallest singular direction when needed (Kabsch convention); otherwise
    the best orthogonal matrix is returned, reflections included.
    """
    s = np.asarray(source, dtype=float)
    y = np.asarray(target, dtype=float)
    if weights is None:
        w = np.full(s.shape[0], 1.0 / s.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (s.shape[0],) or np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be nonnegative finite, one per node")
        total = w.sum()
        if total <= 0.0:
            raise ValueError("weights must not all be zero")
        w = w / total
    s_bar = w @ s
    y_bar = w @ y
    s_c = s - s_bar
    y_c = y - y_bar
    cross = (y_c * w[:, None]).T @ s_c
    u, sv, vt = np.linalg.svd(cross)
    if proper:
        d = np.sign(np.linalg.det(u @ vt))
        q = u @ np.diag([1.0, 1.0, d]) @ vt
    else:
        q = u @ vt
    return q, y_bar - q @ s_bar, sv, s_c, w


def procrustes(source, target, weights=None) -> Pose:
    """Best-fit rigid transform mapping `source` points onto `target` points.

    Minimizes the weighted sum of squared distances over rotations and
    translations; closed form via the SVD of the weighted cross-covariance.
    Raises AmbiguousAlignmentError for collinear (or smaller) source sets,
    where the rotation about the line is unobservable.
    """
    s = np.asarray(source, dtype=float)
    y = np.asarray(target, dtype=float)
    if s.shape != y.shape or s.ndim != 2 or s.shape[1] != 3:
        raise ValueError(f"source and target must both be (K, 3), got {s.shape} vs {y.shape}")
    if s.shape[0] < 3:
        raise AmbiguousAlignmentError("alignment needs at least 3 corresponded points")
    q, t, _, s_c, w = _fit_alignment(s, y, weights, proper=True)
    spread = np.linalg.svd(s_c * np.sqrt(w)[:, None], compute_uv=False)
    if spread[1] <= 1e-12 * max(spread[0], 1e-300):
        raise AmbiguousAlignmentError("source points are collinear; rotation ambiguous")
    return Pose(q, t)


def multilaterate_node(anchors: AnchorSet, ranges, mask=None) -> NodeFix:
    """Locate a single node from ranges to known anchors.

    Solves the reference-differenced squared-range system (exactly linear
    in the position), then applies one Gauss-Newton correction on the true
    range residuals. Three observed anchors, or coplanar anchor geometry,
    leave a mirror solution; the fix is then flagged ambiguous.
    """
    r = np.asarray(ranges, dtype=float).reshape(-1)
    pts = anchors.anchors
    if r.shape[0] != pts.shape[0]:
        raise ValueError("one range per anchor expected")
    obs = np.isfinite(r) if mask is None else (np.asarray(mask, bool) & np.isfinite(r))
    idx = np.flatnonzero(obs)
    if idx.size < 3:
        raise UnderdeterminedError(
            f"multilateration needs >= 3 observed anchors, got {idx.size}"
        )
    a_obs = pts[idx]
    r_obs = r[idx]
    ref_a, ref_r = a_obs[0], r_obs[0]
    rows = 2.0 * (a_obs[1:] - ref_a)
    rhs = (ref_r**2 - r_obs[1:] ** 2) + (a_obs[1:] ** 2).sum(axis=1) - (ref_a**2).sum()
    x, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
    ambiguous = idx.size == 3 or rank < 3

    # One Gauss-Newton step on true (non-squared) residuals.
    delta = x - a_obs
    dist = np.linalg.norm(delta, axis=1)
    unit = delta / np.where(dist > 0, dist, 1.0)[:, None]
    step, *_ = np.linalg.lstsq(unit, -(dist - r_obs), rcond=None)
    x = x + step

    delta = x - a_obs
    dist = np.linalg.norm(delta, axis=1)
    unit = delta / np.where(dist > 0, dist, 1.0)[:, None]
    resid = dist - r_obs
    jtj = unit.T @ unit
    cov = np.linalg.pinv(jtj)
    return NodeFix(
        position=x,
        covariance=cov,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        ambiguous=bool(ambiguous),
    )


def estimate_pose_mds(edm: Edm, anchors: AnchorSet, conf: Conformation) -> PoseEstimate:
    """Pose from a classical MDS embedding of the joint anchor+node EDM.

    The joint point set is recovered from the top-3 eigenpairs of the
    centered Gram matrix, pinned to the world frame by aligning the
    embedded anchors to the true anchor positions (allowing a reflection,
    since the embedding has arbitrary chirality), and the pose is read off
    the aligned node positions with a final Procrustes fit.
    """
    if not edm.is_complete():
        raise IncompleteEdmError("MDS needs a fully known EDM; run complete_edm first")
    a = edm.n_anchors
    if a != anchors.num_anchors or edm.n_nodes != conf.num_nodes:
        raise ValueError("EDM block sizes do not match anchors/conformation")
    gram = gram_from_edm(edm)
    points, eigvals = embed_from_gram(gram, dim=3)
    if eigvals[2] <= 1e-9 * max(eigvals[0], 1e-300):
        raise DegenerateEmbeddingError(
            f"Gram matrix has fewer than 3 significantly positive eigenvalues: {eigvals[:4]}"
        )
    q, shift, _, _, _ = _fit_alignment(points[:a], anchors.anchors, None, proper=False)
    node_positions = points[a:] @ q.T + shift
    pose = procrustes(conf.nodes, node_positions)
    fitted = apply_pose(conf, pose)
    cross = np.sqrt(edm.squared_distances[:a, a:])
    dist = np.linalg.norm(fitted[None, :, :] - anchors.anchors[:, None, :], axis=-1)
    residual = float(np.sqrt(np.mean((dist - cross) ** 2)))
    return PoseEstimate(
        pose=pose,
        method_tag="mds",
        residual_rms=residual,
        per_node_positions=node_positions,
    )


def _nls_weights(noise: NoiseModel | None) -> tuple[float, float]:
    if noise is None:
        return 1.0, 1.0
    w_range = 1.0 / noise.range_sigma**2 if noise.range_sigma > 0 else 1.0
    w_angle = 1.0 / noise.angle_sigma**2 if noise.angle_sigma > 0 else 1.0
    return w_range, w_angle


def _adoa_indices(jj, kk):
    """Flat index pairs for azimuth differencing: per node, every observed
    entry against that node's first observed anchor. Returns (entries, refs)."""
    sel, refs = [], []
    for node in np.unique(kk):
        pos = np.flatnonzero(kk == node)
        if pos.size < 2:
            continue
        sel.extend(pos[1:])
        refs.extend([pos[0]] * (pos.size - 1))
    return np.asarray(sel, dtype=int), np.asarray(refs, dtype=int)


def _nls_residuals(rot, trans, conf_nodes, anchor_xyz, meas, jj, kk, w_range, w_angle, adoa_idx):
    """Stacked weighted residuals and Jacobian rows at (rot, trans).

    Rows are ordered ranges first, then azimuths (absolute, or
    reference-differenced when adoa_idx is given) and elevations, each
    scaled by the square root of its type weight. The Jacobian is taken
    with respect to a right perturbation (rot -> rot expm(d_theta),
    trans -> trans + d_t).
    """
    world = conf_nodes @ rot.T + trans
    delta = world[kk] - anchor_xyz[jj]
    dist = np.linalg.norm(delta, axis=1)
    res_parts, jac_parts = [], []

    def chain(rows_s):
        # d residual / d (theta, t) given d residual / d s.
        j_rot = np.cross(conf_nodes[kk], rows_s @ rot)
        return np.hstack([j_rot, rows_s])

    if meas.ranges is not None:
        unit = delta / dist[:, None]
        res_parts.append(np.sqrt(w_range) * (dist - meas.ranges[jj, kk]))
        jac_parts.append(np.sqrt(w_range) * chain(unit))
    if meas.aoa is not None:
        dx, dy, dz = delta[:, 0], delta[:, 1], delta[:, 2]
        rho2 = dx**2 + dy**2
        rho = np.sqrt(rho2)
        az = np.arctan2(dy, dx)
        el = np.arcsin(np.clip(dz / dist, -1.0, 1.0))
        az_rows = np.stack([-dy / rho2, dx / rho2, np.zeros_like(dx)], axis=1)
        el_rows = np.stack(
            [-dx * dz / (dist**2 * rho), -dy * dz / (dist**2 * rho), rho / dist**2], axis=1
        )
        az_jac = chain(az_rows)
        az_meas = meas.aoa[jj, kk, 0]
        if adoa_idx is not None:
            sel, refs = adoa_idx
            model_diff = az[sel] - az[refs]
            meas_diff = wrap_angle(az_meas[sel] - az_meas[refs])
            res_parts.append(np.sqrt(w_angle) * wrap_angle(model_diff - meas_diff))
            jac_parts.append(np.sqrt(w_angle) * (az_jac[sel] - az_jac[refs]))
        else:
            res_parts.append(np.sqrt(w_angle) * wrap_angle(az - az_meas))
            jac_parts.append(np.sqrt(w_angle) * az_jac)
        res_parts.append(np.sqrt(w_angle) * (el - meas.aoa[jj, kk, 1]))
        jac_parts.append(np.sqrt(w_angle) * chain(el_rows))
    return np.concatenate(res_parts), np.vstack(jac_parts)


def estimate_pose_nls(
    meas: MeasurementSet,
    anchors: AnchorSet,
    conf: Conformation,
    init: Pose | None = None,
    noise: NoiseModel | None = None,
    use_adoa: bool = False,
    max_iters: int = 100,
    step_tol: float = 1e-10,
) -> PoseEstimate:
    """Damped Gauss-Newton fit of the pose to all observed measurements.

    Residual types are weighted by their inverse noise variances (weight 1
    where the noise level is zero or unknown); angle residuals are wrapped
    before squaring. With use_adoa=True the absolute azimuths are replaced
    by per-node differences against a reference anchor, for setups where
    anchor headings share an unknown offset. The default starting point is
    the MDS estimate on the (completed, if necessary) EDM. Terminates when
    the step norm drops below `step_tol` or after `max_iters` iterations; a
    missed tolerance or an exhausted damping schedule is reported via
    `converged`/`message`, never silently.
    """
    jj, kk = np.nonzero(meas.mask)
    adoa_idx = None
    if use_adoa and meas.aoa is not None:
        adoa_idx = _adoa_indices(jj, kk)
    n_res = 0
    if meas.ranges is not None:
        n_res += jj.size
    if meas.aoa is not None:
        n_res += (adoa_idx[0].size if adoa_idx is not None else jj.size) + jj.size
    if n_res < 6:
        raise UnderdeterminedError(f"pose has 6 degrees of freedom; got {n_res} residuals")

    if init is None:
        if meas.ranges is None:
            init = Pose.identity()
        else:
            edm = assemble_edm(anchors, conf, meas)
            if not edm.is_complete():
                edm = complete_edm(edm).completed
            init = estimate_pose_mds(edm, anchors, conf).pose

    w_range, w_angle = _nls_weights(noise)
    rot = np.array(init.rotation)
    trans = np.array(init.translation)
    conf_nodes = conf.nodes
    anchor_xyz = anchors.anchors

    def cost_at(r, t):
        res, _ = _nls_residuals(
            r, t, conf_nodes, anchor_xyz, meas, jj, kk, w_range, w_angle, adoa_idx
        )
        return float(res @ res), res

    cost, _ = cost_at(rot, trans)
    lam = 1e-6
    converged = False
    message = ""
    iterations = 0
    for iterations in range(1, max_iters + 1):
        res, jac = _nls_residuals(
            rot, trans, conf_nodes, anchor_xyz, meas, jj, kk, w_range, w_angle, adoa_idx
        )
        grad = jac.T @ res
        hess = jac.T @ jac
        # Marquardt scaling: damp relative to the curvature so the schedule
        # works at any noise level (the weighted Hessian scales as 1/sigma^2).
        diag = np.diag(hess)
        damping_scale = np.diag(np.maximum(diag, 1e-12 * max(diag.max(), 1e-300)))
        accepted = False
        while lam <= 1e8:
            try:
                step = np.linalg.solve(hess + lam * damping_scale, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            rot_try = rot @ so3_exp(step[:3])
            trans_try = trans + step[3:]
            cost_try, _ = cost_at(rot_try, trans_try)
            # Accept non-increase up to float resolution of the cost itself:
            # near the minimum no step can beat the ulp-level plateau.
            if cost_try <= cost * (1.0 + 1e-12) + 1e-18:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            message = "damping schedule exhausted without cost decrease"
            break
        rot, trans, cost = rot_try, trans_try, cost_try
        lam = max(lam / 3.0, 1e-12)
        if np.linalg.norm(step) < step_tol:
            converged = True
            break
    else:
        message = f"step norm above {step_tol} after {max_iters} iterations"

    projected = so3_project(rot)
    projection_distance = float(np.linalg.norm(projected - rot))
    pose = Pose(projected, trans)
    if meas.ranges is not None:
        world = conf_nodes @ pose.rotation.T + pose.translation
        d = np.linalg.norm(world[kk] - anchor_xyz[jj], axis=1)
        residual_rms = float(np.sqrt(np.mean((d - meas.ranges[jj, kk]) ** 2)))
    else:
        res, _ = _nls_residuals(
            pose.rotation, trans, conf_nodes, anchor_xyz, meas, jj, kk, 1.0, 1.0, adoa_idx
        )
        residual_rms = float(np.sqrt(np.mean(res**2)))
    return PoseEstimate(
        pose=pose,
        method_tag="nls",
        residual_rms=residual_rms,
        iterations=iterations,
        converged=converged,
        projection_distance=projection_distance,
        message=message,
    )


_GABP_PRIOR_PRECISION = 1e-12


def _gabp_node_beliefs(anchor_xyz, ranges, mask, sigma, damping, max_sweeps, mean_tol):
    """Stage 1 of the message-passing estimator.

    Per node, runs Gaussian belief propagation on the factor graph of the
    reference-differenced squared-range equations: one scalar variable per
    coordinate, one factor per linearized measurement, plus a vanishingly
    weak prior that keeps every message proper. Messages are scalar
    Gaussians (mean, precision), damped to suppress loop-induced
    oscillation. Returns belief means, belief precisions, the usable-node
    mask, sweep count, and a convergence flag.
    """
    n_anchors, n_nodes = ranges.shape
    counts = mask.sum(axis=0)
    usable = counts >= 3
    max_factors = max(int(counts.max()) - 1, 1)
    coef = np.zeros((n_nodes, max_factors, 3))
    rhs = np.zeros((n_nodes, max_factors))
    noise_var = np.ones((n_nodes, max_factors))
    valid = np.zeros((n_nodes, max_factors), dtype=bool)
    for k in np.flatnonzero(usable):
        idx = np.flatnonzero(mask[:, k])
        ref, others = idx[0], idx[1:]
        a_ref, r_ref = anchor_xyz[ref], ranges[ref, k]
        a_j, r_j = anchor_xyz[others], ranges[others, k]
        m = others.size
        coef[k, :m] = 2.0 * (a_j - a_ref)
        rhs[k, :m] = (r_ref**2 - r_j**2) + (a_j**2).sum(axis=1) - (a_ref**2).sum()
        if sigma > 0.0:
            noise_var[k, :m] = np.maximum(4.0 * sigma**2 * (r_j**2 + r_ref**2), 1e-12)
        valid[k, :m] = True

    active = valid[:, :, None] & (coef != 0.0)
    coef_safe = np.where(coef == 0.0, 1.0, coef)
    p_fv = np.zeros((n_nodes, max_factors, 3))
    mu_fv = np.zeros_like(p_fv)
    belief_mu = np.zeros((n_nodes, 3))
    belief_p = np.full((n_nodes, 3), _GABP_PRIOR_PRECISION)
    # Leave-one-out sums are built with off-diagonal masks rather than
    # total-minus-self: one factor can dominate the rest by 16+ orders of
    # magnitude, where the subtraction would cancel to zero precision.
    others_f = 1.0 - np.eye(max_factors)
    others_c = 1.0 - np.eye(3)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        p_vf = _GABP_PRIOR_PRECISION + np.einsum("kgi,gf->kfi", p_fv, others_f)
        mu_vf = np.einsum("kgi,gf->kfi", p_fv * mu_fv, others_f) / p_vf

        contrib = np.where(active, coef**2 / p_vf, 0.0)
        denom = noise_var[:, :, None] + np.einsum("kfj,ji->kfi", contrib, others_c)
        p_new = np.where(active, coef**2 / denom, 0.0)
        partial = np.einsum("kfj,ji->kfi", coef * mu_vf, others_c)
        mu_new = np.where(active, (rhs[:, :, None] - partial) / coef_safe, 0.0)

        p_cand = (1.0 - damping) * p_new + damping * p_fv
        mu_cand = (1.0 - damping) * mu_new + damping * mu_fv
        p_belief = _GABP_PRIOR_PRECISION + p_cand.sum(axis=1)
        mu_belief = (p_cand * mu_cand).sum(axis=1) / p_belief
        if not np.all(np.isfinite(mu_belief[usable])):
            break  # keep the last stable iterate
        p_fv, mu_fv = p_cand, mu_cand
        change = np.abs(mu_belief - belief_mu)[usable].max() if usable.any() else 0.0
        belief_mu, belief_p = mu_belief, p_belief
        if sweeps > 1 and change < mean_tol:
            converged = True
            break
    return belief_mu, belief_p, usable, sweeps, converged


def estimate_pose_gabp(
    meas: MeasurementSet,
    anchors: AnchorSet,
    conf: Conformation,
    noise: NoiseModel | None = None,
    damping: float = 0.5,
    max_sweeps: int = 100,
    mean_tol: float = 1e-9,
) -> PoseEstimate:
    """Two-stage message-passing pose estimate.

    Stage 1 localizes each node independently by Gaussian belief
    propagation (see _gabp_node_beliefs); stage 2 fits the pose by
    Procrustes over the belief means, weighted by the belief precisions so
    poorly observed nodes contribute little. The per-node marginal
    variances are returned as the soft-decision output.
    """
    if meas.ranges is None:
        raise ValueError("the message-passing estimator needs range measurements")
    sigma = noise.range_sigma if noise is not None else 0.0
    belief_mu, belief_p, usable, sweeps, converged = _gabp_node_beliefs(
        anchors.anchors, meas.ranges, meas.mask, sigma, damping, max_sweeps, mean_tol
    )
    if usable.sum() < 3:
        raise UnderdeterminedError(
            f"only {int(usable.sum())} nodes have >= 3 observed anchors; need 3"
        )
    weights = np.where(usable, belief_p.min(axis=1), 0.0)
    pose = procrustes(conf.nodes, np.where(usable[:, None], belief_mu, 0.0), weights)

    positions = np.where(usable[:, None], belief_mu, np.nan)
    variances = np.where(usable[:, None], 1.0 / belief_p, np.nan)
    jj, kk = np.nonzero(meas.mask)
    world = apply_pose(conf, pose)
    d = np.linalg.norm(world[kk] - anchors.anchors[jj], axis=1)
    residual_rms = float(np.sqrt(np.mean((d - meas.ranges[jj, kk]) ** 2)))
    message = "" if converged else f"belief means not settled after {sweeps} sweeps"
    return PoseEstimate(
        pose=pose,
        method_tag="gabp",
        residual_rms=residual_rms,
        iterations=sweeps,
        per_node_positions=positions,
        node_variances=variances,
        converged=converged,
        message=message,
    )


def estimate_relative_pose(
    ego_conf: Conformation,
    cross_distances,
    target_conf: Conformation,
    mask=None,
    noise: NoiseModel | None = None,
    refine: bool = False,
) -> PoseEstimate:
    """Pose of a target body relative to an ego body, from cross distances.

    The ego nodes play the anchor role (their body-frame coordinates are
    the anchor positions), so the anchored pipeline applies unchanged:
    assemble the joint EDM, complete it when links are missing, embed via
    MDS, and optionally refine with the iterative estimator.
    """
    cross = np.asarray(cross_distances, dtype=float)
    ego = AnchorSet(ego_conf.nodes)
    if mask is None:
        mask = np.isfinite(cross)
    meas = MeasurementSet(mask=np.asarray(mask, bool), ranges=cross)
    edm = assemble_edm(ego, target_conf, meas)
    if not edm.is_complete():
        edm = complete_edm(edm).completed
    estimate = estimate_pose_mds(edm, ego, target_conf)
    tag = "relative-mds"
    if refine:
        estimate = estimate_pose_nls(meas, ego, target_conf, init=estimate.pose, noise=noise)
        tag = "relative-nls"
    return replace(estimate, method_tag=tag)


def semantic_transform(heading: SemanticHeading, pose: Pose) -> SemanticHeading:
    """Carry a body-frame heading through a pose: v_world = R v_body, anchored at t."""
    world = pose.rotation @ heading.body_vector
    return SemanticHeading(
        body_vector=heading.body_vector,
        world_vector=world,
        anchor_point=pose.translation,
    )


def semantic_error(a: SemanticHeading, b: SemanticHeading) -> tuple[float, float]:
    """(angle between world vectors in degrees, distance between anchor points in m)."""
    cos = float(np.clip(a.world_vector @ b.world_vector, -1.0, 1.0))
    return math.degrees(math.acos(cos)), float(
        np.linalg.norm(a.anchor_point - b.anchor_point)
    )
