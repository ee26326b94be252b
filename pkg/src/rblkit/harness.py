"""Scenario and experiment configuration, deterministic Monte Carlo
benchmark sweeps, and single-trial traces.

Per-trial seeds derive from the master seed and the (sigma index, trial
index) pair through splitmix64, so a sweep produces the same streams
whether trials run serially or are farmed out, and every estimator inside
a trial sees the same measurement draw (paired comparisons).
"""

from __future__ import annotations

import importlib.resources
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import fim_ranges
from .completion import CompletionReport, complete_edm, zero_imputed
from .errors import ConfigError, CoverageWarning, RangeClampWarning, RblError
from .estimators import (
    PoseEstimate,
    estimate_pose_gabp,
    estimate_pose_mds,
    estimate_pose_nls,
)
from .geometry import (
    Conformation,
    Pose,
    RigidBodyState,
    Twist,
    load_points,
    random_rotation,
    rotation_error_deg,
    so3_exp,
    propagate_state,
)
from .measurement import (
    AnchorSet,
    BernoulliBlockage,
    ConvexHullBlockage,
    MeasurementSet,
    NoiseModel,
    apply_blockage,
    assemble_edm,
    simulate_measurements,
)
from .tracking import MeasurementFrame

_MASK64 = (1 << 64) - 1

ESTIMATOR_TAGS = ("mds", "nls", "gabp")


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master: int, *indices: int) -> int:
    """Fold indices into the master seed, one splitmix64 step per index."""
    seed = splitmix64(master & _MASK64)
    for ix in indices:
        seed = splitmix64(seed ^ ((int(ix) + 0x9E3779B9) & _MASK64))
    return seed


@dataclass(frozen=True)
class PoseDistribution:
    """Random pose prior: a rotation law plus a uniform translation box.

    rotation is one of "uniform" (Haar on SO(3)), "yaw" (uniform heading
    about +z), or "none" (identity).
    """

    rotation: str = "uniform"
    translation_low: tuple[float, float, float] = (-0.5, -0.5, -0.5)
    translation_high: tuple[float, float, float] = (0.5, 0.5, 0.5)

    def __post_init__(self):
        if self.rotation not in ("uniform", "yaw", "none"):
            raise ConfigError(
                f"rotation must be uniform|yaw|none, got {self.rotation!r}",
                field="pose_distribution.rotation",
            )
        lo, hi = np.asarray(self.translation_low), np.asarray(self.translation_high)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(hi < lo):
            raise ConfigError(
                "translation box needs low <= high, three components each",
                field="pose_distribution.translation_box",
            )

    def sample(self, rng: np.random.Generator) -> Pose:
        if self.rotation == "uniform":
            rot = random_rotation(rng)
        elif self.rotation == "yaw":
            rot = so3_exp([0.0, 0.0, rng.uniform(-np.pi, np.pi)])
        else:
            rot = np.eye(3)
        trans = rng.uniform(self.translation_low, self.translation_high)
        return Pose(rot, trans)


@dataclass(frozen=True)
class BlockageSpec:
    """Which blockage policy a sweep applies, rebuilt per trial.

    kind "bernoulli" drops links independently with probability p; "hull"
    applies convex-hull self-occlusion with the given margin; "none" keeps
    every link.
    """

    kind: str = "none"
    p: float = 0.0
    margin: float = 1e-9

    def __post_init__(self):
        if self.kind not in ("none", "bernoulli", "hull"):
            raise ConfigError(
                f"kind must be none|bernoulli|hull, got {self.kind!r}", field="blockage.kind"
            )
        if self.kind == "bernoulli" and not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must be in [0, 1], got {self.p}", field="blockage.p")

    def policy(self, seed: int, anchors: AnchorSet, world_nodes):
        if self.kind == "bernoulli":
            return BernoulliBlockage(self.p, seed=seed)
        if self.kind == "hull":
            return ConvexHullBlockage(anchors, world_nodes, margin=self.margin)
        return None


@dataclass(frozen=True)
class ScenarioConfig:
    """A full simulation scenario.

    In relative mode the anchors are the ego body's node positions (ego
    frame) and the pose is the target body's pose relative to the ego.
    Exactly one of `pose` (fixed) or `pose_distribution` must be set.
    """

    conformation: Conformation
    anchors: AnchorSet
    noise: NoiseModel = NoiseModel()
    pose: Pose | None = None
    pose_distribution: PoseDistribution | None = None
    blockage: BlockageSpec = BlockageSpec()
    measurement_kinds: tuple[str, ...] = ("range",)
    relative_mode: bool = False

    def __post_init__(self):
        if (self.pose is None) == (self.pose_distribution is None):
            raise ConfigError(
                "exactly one of pose and pose_distribution must be set", field="pose"
            )
        if "range" not in self.measurement_kinds:
            raise ConfigError(
                "range measurements are required by the estimators",
                field="measurements",
            )

    def sample_pose(self, rng: np.random.Generator) -> Pose:
        return self.pose if self.pose is not None else self.pose_distribution.sample(rng)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep shape: noise grid, trials per point, seed, and estimator list."""

    sigma_grid: tuple[float, ...]
    trials: int = 100
    master_seed: int = 1234
    estimators: tuple[str, ...] = ("mds", "nls", "gabp")
    completion: bool = True

    def __post_init__(self):
        if len(self.sigma_grid) == 0 or any(s <= 0 for s in self.sigma_grid):
            raise ConfigError("sigma grid must be nonempty and positive", field="sigma_grid")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", field="trials")
        unknown = set(self.estimators) - set(ESTIMATOR_TAGS)
        if unknown:
            raise ConfigError(f"unknown estimators {sorted(unknown)}", field="estimators")


@dataclass(frozen=True)
class ResultRow:
    """One benchmark cell: RMSE and CRLB columns for (sigma, estimator)."""

    sigma: float
    estimator: str
    rmse_translation_m: float
    rmse_rotation_deg: float
    crlb_translation_m: float
    crlb_rotation_deg: float
    trials: int
    failures: int


CSV_HEADER = (
    "sigma,estimator,rmse_translation_m,rmse_rotation_deg,"
    "crlb_translation_m,crlb_rotation_deg,trials,failures"
)


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.sigma:.12g},{r.estimator},{r.rmse_translation_m:.12g},"
            f"{r.rmse_rotation_deg:.12g},{r.crlb_translation_m:.12g},"
            f"{r.crlb_rotation_deg:.12g},{r.trials},{r.failures}"
        )
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> list[dict]:
    return [
        {
            "sigma": r.sigma,
            "estimator": r.estimator,
            "rmse_translation_m": r.rmse_translation_m,
            "rmse_rotation_deg": r.rmse_rotation_deg,
            "crlb_translation_m": r.crlb_translation_m,
            "crlb_rotation_deg": r.crlb_rotation_deg,
            "trials": r.trials,
            "failures": r.failures,
        }
        for r in rows
    ]


@dataclass(frozen=True)
class TrialOutcome:
    truth: Pose
    measurements: MeasurementSet
    estimate: PoseEstimate | None
    completion: CompletionReport | None
    failure: str | None
    rotation_error_deg: float
    translation_error_m: float
    crlb_translation_m2: float
    crlb_rotation_rad2: float


def _estimate(tag, meas, anchors, conf, noise, completion):
    """Dispatch one estimator, honoring the completion switch for the EDM
    pipeline (zero fill is the baseline when completion is off)."""
    report = None
    if tag in ("mds", "nls"):
        edm = assemble_edm(anchors, conf, meas)
        if not edm.is_complete():
            if completion:
                report = complete_edm(edm)
                edm = report.completed
            else:
                edm = zero_imputed(edm)
        init = estimate_pose_mds(edm, anchors, conf)
        if tag == "mds":
            return init, report
        return estimate_pose_nls(meas, anchors, conf, init=init.pose, noise=noise), report
    if tag == "gabp":
        return estimate_pose_gabp(meas, anchors, conf, noise=noise), None
    raise ConfigError(f"unknown estimator {tag!r}", field="estimators")


def run_trial(
    scenario: ScenarioConfig,
    sigma: float,
    seed: int,
    estimator: str,
    completion: bool = True,
) -> TrialOutcome:
    """One seeded draw: sample a pose, simulate, estimate, score."""
    truth, meas = _draw_trial(scenario, sigma, seed)
    report_crlb = fim_ranges(
        scenario.anchors, scenario.conformation, truth, meas.mask, sigma
    )
    estimate, report, failure = None, None, None
    rot_err = trans_err = float("nan")
    try:
        estimate, report = _estimate(
            estimator, meas, scenario.anchors, scenario.conformation,
            _trial_noise(scenario, sigma, seed), completion,
        )
        if not estimate.converged:
            failure = f"not converged: {estimate.message}"
        else:
            rot_err = rotation_error_deg(estimate.pose.rotation, truth.rotation)
            trans_err = float(np.linalg.norm(estimate.pose.translation - truth.translation))
    except RblError as exc:
        failure = f"{type(exc).__name__}: {exc}"
    return TrialOutcome(
        truth=truth,
        measurements=meas,
        estimate=estimate,
        completion=report,
        failure=failure,
        rotation_error_deg=rot_err,
        translation_error_m=trans_err,
        crlb_translation_m2=report_crlb.translation_bound,
        crlb_rotation_rad2=report_crlb.rotation_bound,
    )


def _trial_noise(scenario: ScenarioConfig, sigma: float, seed: int) -> NoiseModel:
    return NoiseModel(
        range_sigma=sigma,
        angle_sigma=scenario.noise.angle_sigma,
        range_rate_sigma=scenario.noise.range_rate_sigma,
        seed=derive_seed(seed, 2),
    )


def _draw_trial(scenario, sigma, seed):
    rng_pose = np.random.default_rng(derive_seed(seed, 1))
    truth = scenario.sample_pose(rng_pose)
    # Static draws have no motion; rates are simulated about zero velocity.
    twist = Twist.zero() if "range_rate" in scenario.measurement_kinds else None
    state = RigidBodyState(scenario.conformation, truth, twist)
    noise = _trial_noise(scenario, sigma, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeClampWarning)
        warnings.simplefilter("ignore", CoverageWarning)
        meas = simulate_measurements(
            scenario.anchors, state, noise, scenario.measurement_kinds
        )
        policy = scenario.blockage.policy(
            derive_seed(seed, 3), scenario.anchors, state.world_nodes()
        )
        if policy is not None:
            meas = apply_blockage(meas, policy)
    return truth, meas


def run_benchmark(scenario: ScenarioConfig, experiment: ExperimentConfig) -> list[ResultRow]:
    """Monte Carlo RMSE sweep over (sigma, estimator) cells.

    Every estimator in a cell sees the same trial draws (seeds depend only
    on sigma index and trial index). Failed trials are excluded from the
    RMSE and reported in the failure count; the CRLB columns average the
    per-trial bound traces and are the same for every estimator at a given
    sigma.
    """
    sums = {
        (si, tag): {"rot": 0.0, "trans": 0.0, "n": 0, "fail": 0}
        for si in range(len(experiment.sigma_grid))
        for tag in experiment.estimators
    }
    crlb_sums = [[0.0, 0.0, 0] for _ in experiment.sigma_grid]
    for si, sigma in enumerate(experiment.sigma_grid):
        for trial in range(experiment.trials):
            seed = derive_seed(experiment.master_seed, 11, si, trial)
            truth, meas = _draw_trial(scenario, sigma, seed)
            crlb = fim_ranges(scenario.anchors, scenario.conformation, truth, meas.mask, sigma)
            if not crlb.singular:
                crlb_sums[si][0] += crlb.translation_bound
                crlb_sums[si][1] += crlb.rotation_bound
                crlb_sums[si][2] += 1
            noise = _trial_noise(scenario, sigma, seed)
            for tag in experiment.estimators:
                cell = sums[(si, tag)]
                try:
                    estimate, _ = _estimate(
                        tag, meas, scenario.anchors, scenario.conformation,
                        noise, experiment.completion,
                    )
                    if not estimate.converged:
                        cell["fail"] += 1
                        continue
                except RblError:
                    cell["fail"] += 1
                    continue
                cell["rot"] += rotation_error_deg(estimate.pose.rotation, truth.rotation) ** 2
                cell["trans"] += (
                    float(np.linalg.norm(estimate.pose.translation - truth.translation)) ** 2
                )
                cell["n"] += 1
    rows = []
    for si, sigma in enumerate(experiment.sigma_grid):
        t_sum, r_sum, n_crlb = crlb_sums[si]
        crlb_t = float(np.sqrt(t_sum / n_crlb)) if n_crlb else float("nan")
        crlb_r = float(np.degrees(np.sqrt(r_sum / n_crlb))) if n_crlb else float("nan")
        for tag in experiment.estimators:
            cell = sums[(si, tag)]
            n = cell["n"]
            rows.append(
                ResultRow(
                    sigma=float(sigma),
                    estimator=tag,
                    rmse_translation_m=float(np.sqrt(cell["trans"] / n)) if n else float("nan"),
                    rmse_rotation_deg=float(np.sqrt(cell["rot"] / n)) if n else float("nan"),
                    crlb_translation_m=crlb_t,
                    crlb_rotation_deg=crlb_r,
                    trials=experiment.trials,
                    failures=cell["fail"],
                )
            )
    return rows


def run_scenario_once(
    scenario: ScenarioConfig,
    sigma: float,
    seed: int,
    estimator: str,
    completion: bool = True,
) -> dict:
    """Full JSON-able trace of a single trial, for debugging and replay."""
    outcome = run_trial(scenario, sigma, seed, estimator, completion)
    edm_doc = None
    if outcome.measurements.ranges is not None:
        edm_doc = assemble_edm(
            scenario.anchors, scenario.conformation, outcome.measurements
        ).to_json_dict()
    return {
        "sigma": float(sigma),
        "seed": int(seed),
        "estimator": estimator,
        "completion_enabled": completion,
        "truth": {
            "rotation": [float(v) for v in outcome.truth.rotation.ravel()],
            "translation": [float(v) for v in outcome.truth.translation],
        },
        "measurements": outcome.measurements.to_json_dict(),
        "edm": edm_doc,
        "completion": outcome.completion.to_json_dict() if outcome.completion else None,
        "estimate": outcome.estimate.to_json_dict() if outcome.estimate else None,
        "failure": outcome.failure,
        "errors": {
            "rotation_deg": outcome.rotation_error_deg,
            "translation_m": outcome.translation_error_m,
        },
        "crlb": {
            "translation_m2": outcome.crlb_translation_m2,
            "rotation_rad2": outcome.crlb_rotation_rad2,
        },
    }


def generate_trajectory(
    scenario: ScenarioConfig,
    twist: Twist,
    n_frames: int,
    dt: float,
    sigma: float,
    seed: int,
) -> tuple[list[MeasurementFrame], list[tuple[Pose, Twist]]]:
    """Constant-twist measurement frames (ranges + range rates) with truth."""
    rng_pose = np.random.default_rng(derive_seed(seed, 1))
    start = scenario.sample_pose(rng_pose)
    state0 = RigidBodyState(scenario.conformation, start, twist)
    kinds = tuple(dict.fromkeys(scenario.measurement_kinds + ("range_rate",)))
    frames, truth = [], []
    for i in range(n_frames):
        t = (i + 1) * dt
        current = propagate_state(state0, t)
        noise = NoiseModel(
            range_sigma=sigma,
            angle_sigma=scenario.noise.angle_sigma,
            range_rate_sigma=scenario.noise.range_rate_sigma,
            seed=derive_seed(seed, 4, i),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RangeClampWarning)
            warnings.simplefilter("ignore", CoverageWarning)
            meas = simulate_measurements(scenario.anchors, current, noise, kinds)
            policy = scenario.blockage.policy(
                derive_seed(seed, 5, i), scenario.anchors, current.world_nodes()
            )
            if policy is not None:
                meas = apply_blockage(meas, policy)
        frames.append(MeasurementFrame(t, meas))
        truth.append((current.pose, twist))
    return frames, truth


# ---------------------------------------------------------------------------
# Configuration documents (JSON) and builtin presets.

def _points_from(doc, field_name, base_dir):
    if not isinstance(doc, dict):
        raise ConfigError("expected an object with 'points' or 'file'", field=field_name)
    if ("points" in doc) == ("file" in doc):
        raise ConfigError("exactly one of 'points' and 'file'", field=field_name)
    if "points" in doc:
        return np.asarray(doc["points"], dtype=float)
    path = Path(base_dir) / doc["file"]
    if not path.exists():
        raise ConfigError(f"file not found: {path}", field=field_name)
    return load_points(path)


def scenario_from_dict(doc: dict, base_dir=".") -> ScenarioConfig:
    try:
        conf = Conformation(_points_from(doc["conformation"], "conformation", base_dir))
    except KeyError:
        raise ConfigError("missing section", field="conformation") from None
    anchors_doc = doc.get("anchors")
    if anchors_doc is None:
        raise ConfigError("missing section", field="anchors")
    relative = bool(anchors_doc.get("relative", False))
    sources = [k for k in ("body", "points", "file") if k in anchors_doc]
    if len(sources) != 1:
        raise ConfigError(
            f"exactly one anchor source among body/points/file, got {sources}",
            field="anchors",
        )
    if "body" in anchors_doc:
        body = Conformation(_points_from(anchors_doc["body"], "anchors.body", base_dir))
        anchors = AnchorSet(body.nodes)
    else:
        anchors = AnchorSet(_points_from(anchors_doc, "anchors", base_dir))

    pose = None
    dist = None
    if "pose" in doc and "pose_distribution" in doc:
        raise ConfigError("give either pose or pose_distribution, not both", field="pose")
    if "pose" in doc:
        p = doc["pose"]
        pose = Pose(np.asarray(p["rotation"], dtype=float), np.asarray(p["translation"], float))
    elif "pose_distribution" in doc:
        d = doc["pose_distribution"]
        box = d.get("translation_box", [[-0.5, 0.5]] * 3)
        dist = PoseDistribution(
            rotation=d.get("rotation", "uniform"),
            translation_low=tuple(b[0] for b in box),
            translation_high=tuple(b[1] for b in box),
        )
    else:
        raise ConfigError("missing pose or pose_distribution", field="pose")

    n = doc.get("noise", {})
    noise = NoiseModel(
        range_sigma=float(n.get("range_sigma", 0.0)),
        angle_sigma=float(n.get("angle_sigma", 0.0)),
        range_rate_sigma=float(n.get("range_rate_sigma", 0.0)),
        seed=int(n.get("seed", 0)),
    )
    b = doc.get("blockage", {})
    blockage = BlockageSpec(
        kind=b.get("kind", "none"),
        p=float(b.get("p", 0.0)),
        margin=float(b.get("margin", 1e-9)),
    )
    kinds = tuple(doc.get("measurements", ["range"]))
    return ScenarioConfig(
        conformation=conf,
        anchors=anchors,
        noise=noise,
        pose=pose,
        pose_distribution=dist,
        blockage=blockage,
        measurement_kinds=kinds,
        relative_mode=relative,
    )


def experiment_from_dict(doc: dict) -> ExperimentConfig:
    if "sigma_grid" not in doc:
        raise ConfigError("missing sigma_grid", field="sigma_grid")
    return ExperimentConfig(
        sigma_grid=tuple(float(s) for s in doc["sigma_grid"]),
        trials=int(doc.get("trials", 100)),
        master_seed=int(doc.get("master_seed", 1234)),
        estimators=tuple(doc.get("estimators", list(ESTIMATOR_TAGS))),
        completion=bool(doc.get("completion", True)),
    )


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc, base_dir=path.parent)


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return experiment_from_dict(doc)


def _data_points(name: str) -> np.ndarray:
    from .geometry import parse_points

    text = importlib.resources.files("rblkit").joinpath(f"data/{name}").read_text()
    return parse_points(text)


def _cube_corners(side: float) -> np.ndarray:
    h = side / 2.0
    return np.array([[x, y, z] for x in (-h, h) for y in (-h, h) for z in (-h, h)])


def preset(name: str) -> tuple[ScenarioConfig, ExperimentConfig]:
    """Builtin scenario+experiment pairs.

    "fig4": an 8-node unit cube target inside 8 anchors at the corners of a
    side-3 cube; range-only, full visibility; sigma grid 1e-3..1 m (log),
    1000 trials, all three estimators.

    "fig5": a car-shaped target ranged from a truck-shaped ego body
    (relative mode), 20% random link blockage; sigma grid 1e-2..1 m (log),
    500 trials, EDM/MDS pipeline.
    """
    if name == "fig4":
        scenario = ScenarioConfig(
            conformation=Conformation(_cube_corners(1.0)),
            anchors=AnchorSet(_cube_corners(3.0)),
            pose_distribution=PoseDistribution(rotation="uniform"),
            noise=NoiseModel(),
            blockage=BlockageSpec(kind="none"),
            measurement_kinds=("range",),
        )
        experiment = ExperimentConfig(
            sigma_grid=tuple(np.logspace(-3, 0, 6)),
            trials=1000,
            master_seed=1234,
            estimators=("mds", "nls", "gabp"),
            completion=True,
        )
        return scenario, experiment
    if name == "fig5":
        scenario = ScenarioConfig(
            conformation=Conformation(_data_points("car.txt")),
            anchors=AnchorSet(_data_points("truck.txt")),
            pose_distribution=PoseDistribution(
                rotation="yaw",
                translation_low=(8.0, -4.0, -0.5),
                translation_high=(16.0, 4.0, 0.5),
            ),
            noise=NoiseModel(),
            blockage=BlockageSpec(kind="bernoulli", p=0.2),
            measurement_kinds=("range",),
            relative_mode=True,
        )
        experiment = ExperimentConfig(
            sigma_grid=tuple(np.logspace(-2, 0, 5)),
            trials=500,
            master_seed=1234,
            estimators=("mds",),
            completion=True,
        )
        return scenario, experiment
    raise ConfigError(f"unknown preset {name!r} (available: fig4, fig5)", field="preset")
