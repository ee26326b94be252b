"""Frame-to-frame rigid body tracking.

Each frame is handled on its own (no temporal filtering): the pose is
estimated from that frame's measurements, warm-started from the previous
frame's pose propagated by its estimated twist, and the twist follows from
a linear weighted least-squares fit of the range rates. Given the pose,
the range-rate model is exactly linear in the twist:

    u_jk . ( -[R c_k]x w + v ) = rate_jk,

since [w]x R c_k = -[R c_k]x w.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .completion import complete_edm
from .errors import UnderdeterminedError, UnobservableTwistError
from .estimators import (
    PoseEstimate,
    estimate_pose_gabp,
    estimate_pose_mds,
    estimate_pose_nls,
)
from .geometry import Conformation, Pose, RigidBodyState, Twist, apply_pose, propagate_state
from .measurement import AnchorSet, MeasurementSet, NoiseModel, assemble_edm

_RANK_RCOND = 1e-10


def estimate_twist(
    anchors: AnchorSet,
    conf: Conformation,
    pose: Pose,
    range_rates,
    mask=None,
    weights=None,
) -> tuple[Twist, float]:
    """Weighted least-squares twist from range rates at a known pose.

    Returns (twist, residual_rms). Raises UnobservableTwistError when the
    6-column regressor is rank deficient, carrying an orthonormal basis of
    the unobservable (angular, linear) directions.
    """
    rates = np.asarray(range_rates, dtype=float)
    if mask is None:
        mask = np.isfinite(rates)
    mask = np.asarray(mask, dtype=bool) & np.isfinite(rates)
    jj, kk = np.nonzero(mask)
    if jj.size < 6:
        raise UnderdeterminedError(f"twist has 6 degrees of freedom; got {jj.size} rates")
    world = apply_pose(conf, pose)
    delta = world[kk] - anchors.anchors[jj]
    dist = np.linalg.norm(delta, axis=1)
    unit = delta / dist[:, None]
    rotated = conf.nodes[kk] @ pose.rotation.T
    # Row: [ (R c_k) x u , u ] since u . (w x R c_k) = ((R c_k) x u) . w.
    rows = np.hstack([np.cross(rotated, unit), unit])
    obs = rates[jj, kk]
    if weights is not None:
        w = np.sqrt(np.asarray(weights, dtype=float)[jj, kk])
        rows = rows * w[:, None]
        obs = obs * w
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[-1] <= _RANK_RCOND * max(sv[0], 1e-300):
        _, _, vt = np.linalg.svd(rows)
        null_dim = int(np.sum(sv <= _RANK_RCOND * max(sv[0], 1e-300)))
        raise UnobservableTwistError(vt[-null_dim:].T)
    solution, *_ = np.linalg.lstsq(rows, obs, rcond=None)
    residual = rows @ solution - obs
    twist = Twist(solution[:3], solution[3:])
    return twist, float(np.sqrt(np.mean(residual**2)))


@dataclass(frozen=True)
class MeasurementFrame:
    """One tracking input frame: a timestamp and its measurement set."""

    timestamp: float
    measurements: MeasurementSet

    def to_json_dict(self) -> dict:
        return {"timestamp": self.timestamp, "measurements": self.measurements.to_json_dict()}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MeasurementFrame":
        return cls(float(doc["timestamp"]), MeasurementSet.from_json_dict(doc["measurements"]))


@dataclass(frozen=True)
class TrackFrame:
    """Per-frame tracking output; `error` is set when estimation failed."""

    timestamp: float
    pose_estimate: PoseEstimate | None
    twist_estimate: Twist | None
    twist_residual_rms: float = float("nan")
    error: str | None = None


@dataclass(frozen=True)
class TrackConfig:
    """Tracking options: which pose estimator runs per frame, the noise
    model used for weighting, and whether masked EDMs are completed."""

    estimator: str = "nls"
    noise: NoiseModel | None = None
    completion: bool = True


def _estimate_frame_pose(meas, anchors, conf, config, init):
    if config.estimator == "nls":
        return estimate_pose_nls(meas, anchors, conf, init=init, noise=config.noise)
    if config.estimator == "gabp":
        return estimate_pose_gabp(meas, anchors, conf, noise=config.noise)
    if config.estimator == "mds":
        edm = assemble_edm(anchors, conf, meas)
        if not edm.is_complete():
            if not config.completion:
                raise UnderdeterminedError("masked EDM with completion disabled")
            edm = complete_edm(edm).completed
        return estimate_pose_mds(edm, anchors, conf)
    raise ValueError(f"unknown estimator {config.estimator!r}")


def track_sequence(
    anchors: AnchorSet,
    conf: Conformation,
    frames,
    config: TrackConfig = TrackConfig(),
) -> list[TrackFrame]:
    """Run the two-stage pose+twist pipeline over a frame sequence.

    Frames are processed independently except for the warm start: each
    frame's pose solve is initialized from the previous estimate propagated
    by its twist over the elapsed time. Per-frame failures are recorded in
    the output and the sequence continues.
    """
    frames = list(frames)
    stamps = [f.timestamp for f in frames]
    if any(b <= a for a, b in zip(stamps, stamps[1:])):
        raise ValueError("frame timestamps must be strictly increasing")
    out: list[TrackFrame] = []
    prev_pose: Pose | None = None
    prev_twist: Twist | None = None
    prev_time = 0.0
    for frame in frames:
        init = None
        if prev_pose is not None:
            if prev_twist is not None:
                propagated = propagate_state(
                    RigidBodyState(conf, prev_pose, prev_twist),
                    frame.timestamp - prev_time,
                )
                init = propagated.pose
            else:
                init = prev_pose
        try:
            pose_est = _estimate_frame_pose(frame.measurements, anchors, conf, config, init)
            weights = None
            if config.noise is not None and config.noise.range_rate_sigma > 0:
                weights = np.full(
                    frame.measurements.mask.shape, 1.0 / config.noise.range_rate_sigma**2
                )
            twist, residual = estimate_twist(
                anchors,
                conf,
                pose_est.pose,
                frame.measurements.range_rates,
                mask=frame.measurements.mask,
                weights=weights,
            )
            out.append(TrackFrame(frame.timestamp, pose_est, twist, residual))
            prev_pose, prev_twist, prev_time = pose_est.pose, twist, frame.timestamp
        except Exception as exc:  # per-frame failures never abort the sweep
            out.append(
                TrackFrame(frame.timestamp, None, None, float("nan"), f"{type(exc).__name__}: {exc}")
            )
    return out


def track_to_csv(track: list[TrackFrame], truth=None) -> str:
    """CSV rows per frame: time, errors against truth when given, residuals.

    `truth` is an optional list of (Pose, Twist) ground-truth pairs aligned
    with the track.
    """
    from .geometry import rotation_error_deg

    header = (
        "timestamp,rotation_error_deg,translation_error_m,"
        "angular_error_rad_s,linear_error_m_s,twist_residual_rms,estimator_converged,error"
    )
    lines = [header]
    for i, frame in enumerate(track):
        rot_err = trans_err = ang_err = lin_err = float("nan")
        if truth is not None and frame.pose_estimate is not None:
            true_pose, true_twist = truth[i]
            rot_err = rotation_error_deg(frame.pose_estimate.pose.rotation, true_pose.rotation)
            trans_err = float(
                np.linalg.norm(frame.pose_estimate.pose.translation - true_pose.translation)
            )
            if true_twist is not None and frame.twist_estimate is not None:
                ang_err = float(
                    np.linalg.norm(frame.twist_estimate.angular - true_twist.angular)
                )
                lin_err = float(np.linalg.norm(frame.twist_estimate.linear - true_twist.linear))
        converged = "" if frame.pose_estimate is None else str(frame.pose_estimate.converged)
        lines.append(
            f"{frame.timestamp:.12g},{rot_err:.12g},{trans_err:.12g},"
            f"{ang_err:.12g},{lin_err:.12g},{frame.twist_residual_rms:.12g},"
            f"{converged},{frame.error or ''}"
        )
    return "\n".join(lines) + "\n"
