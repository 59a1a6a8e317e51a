"""The virtual photographer: full offline + guidance loop, plus batch
evaluation and its metrics table."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from camguide import planner
from camguide.correspondence import (
    DictionaryConfig,
    TrackIndex,
    build_dictionary,
    build_tracks,
)
from camguide.errors import (
    EmptyInput,
    EmptyView,
    EPTFailure,
    NoReachableWaypoint,
    OfflinePhaseFailure,
    UnknownView,
)
from camguide.planner import GuidanceSession, PlannerConfig, Status, ViewInfo
from camguide.simulator.scene import (
    NoiseModel,
    Scene,
    SceneConfig,
    apply_rotation,
    camera_azimuth,
    generate_scene,
    oracle_projection,
    render_view,
)
from camguide.sofa import SofaConfig, compute_ranking

_RANSAC_STREAM, _ACTUATION_STREAM, _CORRUPT_STREAM = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    dictionary: DictionaryConfig = field(default_factory=DictionaryConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    sofa: SofaConfig = field(default_factory=SofaConfig)
    seed: int = 0


@dataclass
class RunReport:
    run_id: int
    status: str
    steps: int
    waypoints: list[int]
    oracle_final_error_px: float
    offline_ms: float
    online_ms: float
    transcript: dict


def track_purity(tracks) -> float:
    """Observation-weighted majority-truth fraction; audit only."""
    good = 0
    total = 0
    for t in tracks:
        ids = [o.truth_point_id for o in t.observations if o.truth_point_id is not None]
        if not ids:
            continue
        counts: dict[int, int] = {}
        for i in ids:
            counts[i] = counts.get(i, 0) + 1
        good += max(counts.values())
        total += len(ids)
    return good / total if total else 1.0


class GuidanceRun:
    """One guidance session over a synthetic scene.

    Owns the guided camera (starting at the initial view's pose), the
    frozen dictionary/ranking, and the mutable track index.  Drives the
    per-step loop either automatically (`run`) or step-by-step for the
    live service (`plan`, `execute`).
    """

    def __init__(
        self,
        scene: Scene,
        initial: int,
        destination: int,
        cfg: RunConfig | None = None,
        corrupt_oracle: bool = False,
    ):
        if initial == destination:
            raise UnknownView("initial and destination views must differ")
        self.scene = scene
        self.cfg = cfg or RunConfig()
        self.initial = initial
        self.destination = destination
        self.corrupt_oracle = corrupt_oracle

        streams = np.random.SeedSequence([self.cfg.seed, scene.noise.seed]).spawn(3)
        self.ransac_rng = np.random.default_rng(streams[_RANSAC_STREAM])
        self.actuation_rng = np.random.default_rng(streams[_ACTUATION_STREAM])
        self.corrupt_rng = np.random.default_rng(streams[_CORRUPT_STREAM])

        self.guided_cam = replace(scene.camera(initial))
        self._next_view_id = max(cam.id for cam in scene.cameras) + 1
        self.offline_ms = 0.0
        self.online_ms = 0.0
        self.session: GuidanceSession | None = None

    # -- offline phase ----------------------------------------------------

    def _maybe_corrupt(self, observations):
        if not self.corrupt_oracle:
            return observations
        return [
            replace(o, truth_point_id=int(self.corrupt_rng.integers(10**9)))
            for o in observations
        ]

    def offline(self) -> None:
        t0 = time.perf_counter()
        noise = self.scene.noise
        per_view = []
        self.views: dict[int, ViewInfo] = {}
        for cam in self.scene.cameras:
            obs = self._maybe_corrupt(render_view(cam, self.scene, noise))
            per_view.append(obs)
            self.views[cam.id] = ViewInfo(cam.intrinsics, cam.image_size)

        flat = [o for obs in per_view for o in obs]
        if not flat:
            raise OfflinePhaseFailure("no observations rendered")
        try:
            self.dictionary = build_dictionary(flat, self.cfg.dictionary)
        except EmptyInput as exc:
            raise OfflinePhaseFailure(str(exc)) from exc
        track_list = build_tracks(per_view, self.dictionary)
        if len(track_list) < self.cfg.planner.min_shared_tracks:
            raise OfflinePhaseFailure(f"only {len(track_list)} usable tracks")
        self.tracks = TrackIndex(track_list, self.dictionary)
        self.ranking = compute_ranking(
            self.tracks.track_list(), [cam.id for cam in self.scene.cameras], self.cfg.sofa
        )

        try:
            target = planner.center_bin(self.destination, self.tracks, self.views)
            start_center = planner.center_bin(self.initial, self.tracks, self.views)
        except EmptyView as exc:
            raise OfflinePhaseFailure(str(exc)) from exc
        self.session = GuidanceSession(
            current_view=self.initial,
            destination_view=self.destination,
            target_bin=target,
            center_bin=start_center,
            target_anchor=planner.anchor_ranks(
                self.destination, self.ranking, self.tracks, self.views
            ),
            center_anchor=planner.anchor_ranks(
                self.initial, self.ranking, self.tracks, self.views
            ),
        )
        self.offline_ms = (time.perf_counter() - t0) * 1000.0

        # the initial view may already have the target centered
        t1 = time.perf_counter()
        if planner.target_centered(
            self.session, self.tracks, self.cfg.planner, self.views, self.ransac_rng
        ):
            self.session.status = Status.SUCCESS
        self.online_ms += (time.perf_counter() - t1) * 1000.0

    # -- per-step loop ----------------------------------------------------

    def plan(self) -> planner.GuidanceStep:
        return planner.guidance_step(
            self.session, self.ranking, self.tracks, self.cfg.planner, self.views, self.ransac_rng
        )

    def capture(self) -> int:
        """Render the guided camera at its current orientation as a new
        view and fold it into the track index."""
        view_id = self._next_view_id
        self._next_view_id += 1
        cam = replace(self.guided_cam, id=view_id)
        self.guided_cam = cam
        obs = self._maybe_corrupt(render_view(cam, self.scene, self.scene.noise))
        self.tracks.register_view(obs)
        self.views[view_id] = ViewInfo(cam.intrinsics, cam.image_size)
        return view_id

    def execute(self, step: planner.GuidanceStep) -> Status:
        """Auto-pilot actuation: rotate (with actuation noise), capture,
        and advance the session."""
        self.guided_cam = apply_rotation(
            self.guided_cam, step.rotation, self.scene.noise, self.actuation_rng
        )
        new_view = self.capture()
        return planner.advance(
            self.session,
            new_view,
            self.tracks,
            self.ranking,
            self.cfg.planner,
            self.views,
            self.ransac_rng,
        )

    def step_once(self) -> Status:
        t0 = time.perf_counter()
        try:
            step = self.plan()
        except (NoReachableWaypoint, EPTFailure):
            self.session.status = Status.NO_OVERLAP_FAILURE
            self.online_ms += (time.perf_counter() - t0) * 1000.0
            return self.session.status
        status = self.execute(step)
        self.online_ms += (time.perf_counter() - t0) * 1000.0
        return status

    # -- reporting ---------------------------------------------------------

    def _target_truth_point(self) -> int | None:
        track = self.tracks.tracks.get(self.session.target_bin)
        if track is None:
            return None
        counts: dict[int, int] = {}
        for o in track.observations:
            if o.truth_point_id is not None:
                counts[o.truth_point_id] = counts.get(o.truth_point_id, 0) + 1
        if not counts:
            return None
        best = max(counts.values())
        return min(i for i, c in counts.items() if c == best)

    def oracle_final_error(self) -> float:
        """Distance of the target's true projection from the final image
        center (report/audit channel, never consulted by the pipeline)."""
        truth = self._target_truth_point()
        if truth is None or truth >= len(self.scene.points):
            return math.inf
        p = oracle_projection(self.guided_cam, self.scene.points[truth])
        if p is None:
            return math.inf
        view = self.views[self.session.current_view]
        return float(np.linalg.norm(p - view.center))

    def run(self, run_id: int = 0) -> RunReport:
        try:
            self.offline()
        except OfflinePhaseFailure:
            return RunReport(
                run_id=run_id,
                status=Status.NO_OVERLAP_FAILURE.value,
                steps=0,
                waypoints=[],
                oracle_final_error_px=math.inf,
                offline_ms=self.offline_ms,
                online_ms=0.0,
                transcript={"status": Status.NO_OVERLAP_FAILURE.value, "steps": []},
            )
        while self.session.status is Status.IN_PROGRESS:
            self.step_once()
        transcript = planner.session_transcript(self.session)
        transcript["initial_view"] = self.initial
        return RunReport(
            run_id=run_id,
            status=self.session.status.value,
            steps=self.session.step_count,
            waypoints=[s.waypoint_bin for s in self.session.history],
            oracle_final_error_px=self.oracle_final_error(),
            offline_ms=self.offline_ms,
            online_ms=self.online_ms,
            transcript=transcript,
        )


def run_session(
    scene: Scene,
    initial: int,
    destination: int,
    cfg: RunConfig | None = None,
    run_id: int = 0,
    corrupt_oracle: bool = False,
) -> RunReport:
    return GuidanceRun(scene, initial, destination, cfg, corrupt_oracle).run(run_id)


# -- batch protocol -----------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    name: str = "default"
    scene: SceneConfig = field(default_factory=SceneConfig)
    noise: NoiseModel = field(default_factory=NoiseModel)
    min_pair_sep_deg: float = 40.0
    max_pair_sep_deg: float = 100.0
    seed: int = 0


def scenario_from_dict(doc: dict) -> Scenario:
    scene_doc = dict(doc.get("scene", {}))
    noise_doc = dict(doc.get("noise", {}))
    if "depth_range" in scene_doc:
        scene_doc["depth_range"] = tuple(scene_doc["depth_range"])
    if "image_size" in scene_doc:
        scene_doc["image_size"] = tuple(scene_doc["image_size"])
    return Scenario(
        name=str(doc.get("name", "default")),
        scene=SceneConfig(**scene_doc),
        noise=NoiseModel(**noise_doc),
        min_pair_sep_deg=float(doc.get("min_pair_sep_deg", 40.0)),
        max_pair_sep_deg=float(doc.get("max_pair_sep_deg", 100.0)),
        seed=int(doc.get("seed", 0)),
    )


def pick_view_pair(scene: Scene, min_sep_deg: float, max_sep_deg: float, rng) -> tuple[int, int]:
    """Random (initial, destination) with optical-axis separation inside
    the requested band; the band widens if no pair qualifies."""
    az = {cam.id: math.degrees(camera_azimuth(cam)) for cam in scene.cameras}
    ids = sorted(az)
    lo, hi = min_sep_deg, max_sep_deg
    while True:
        pairs = [
            (a, b)
            for i, a in enumerate(ids)
            for b in ids[i + 1 :]
            if lo <= abs(az[a] - az[b]) <= hi
        ]
        if pairs:
            a, b = pairs[int(rng.integers(len(pairs)))]
            if rng.random() < 0.5:
                a, b = b, a
            return a, b
        lo, hi = max(lo - 10.0, 0.0), hi + 10.0


def batch_evaluate(scenario: Scenario, runs: int, base_cfg: RunConfig | None = None) -> list[RunReport]:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    base_cfg = base_cfg or RunConfig()
    reports = []
    for r in range(runs):
        scene_cfg = replace(scenario.scene, seed=scenario.seed + r)
        noise = replace(scenario.noise, seed=scenario.seed + 10_000 + r)
        scene = generate_scene(scene_cfg, noise)
        pair_rng = np.random.default_rng(
            np.random.SeedSequence([scenario.seed, 20_000 + r])
        )
        initial, destination = pick_view_pair(
            scene, scenario.min_pair_sep_deg, scenario.max_pair_sep_deg, pair_rng
        )
        cfg = replace(base_cfg, seed=scenario.seed + 30_000 + r)
        reports.append(run_session(scene, initial, destination, cfg, run_id=r))
    return reports


def summarize(reports) -> dict:
    n = len(reports)
    successes = [r for r in reports if r.status == Status.SUCCESS.value]
    return {
        "runs": n,
        "success_rate": len(successes) / n if n else 0.0,
        "mean_steps": float(np.mean([r.steps for r in successes])) if successes else math.nan,
        "median_steps": float(np.median([r.steps for r in successes])) if successes else math.nan,
        "mean_final_err_px": float(np.mean([r.oracle_final_error_px for r in successes]))
        if successes
        else math.nan,
        "mean_offline_ms": float(np.mean([r.offline_ms for r in reports])) if n else 0.0,
        "mean_online_ms": float(np.mean([r.online_ms for r in reports])) if n else 0.0,
    }


def metrics_csv(reports) -> str:
    lines = ["run_id,status,steps,final_err_px,offline_ms,online_ms"]
    for r in sorted(reports, key=lambda r: r.run_id):
        lines.append(
            f"{r.run_id},{r.status},{r.steps},{r.oracle_final_error_px:.3f},"
            f"{r.offline_ms:.1f},{r.online_ms:.1f}"
        )
    s = summarize(reports)
    lines.append(
        f"# summary runs={s['runs']} success_rate={s['success_rate']:.4f} "
        f"mean_steps={s['mean_steps']:.3f} mean_final_err_px={s['mean_final_err_px']:.3f} "
        f"mean_offline_ms={s['mean_offline_ms']:.1f} mean_online_ms={s['mean_online_ms']:.1f}"
    )
    return "\n".join(lines) + "\n"
