"""Synthetic multi-view scenes, pinhole rendering with a noise model,
ground-truth oracles, the auto-pilot, and batch evaluation."""

from camguide.simulator.scene import (
    DESCRIPTOR_DIM,
    MOVING_JITTER_PX,
    NoiseModel,
    Scene,
    SceneConfig,
    ScenePoint,
    VirtualCamera,
    apply_rotation,
    camera_azimuth,
    generate_scene,
    load_scene,
    look_at,
    make_camera,
    oracle_projection,
    render_view,
    save_scene,
    scene_to_json,
)
from camguide.simulator.run import (
    GuidanceRun,
    RunConfig,
    RunReport,
    Scenario,
    batch_evaluate,
    metrics_csv,
    pick_view_pair,
    run_session,
    scenario_from_dict,
    summarize,
    track_purity,
)

__all__ = [
    "DESCRIPTOR_DIM",
    "MOVING_JITTER_PX",
    "NoiseModel",
    "Scene",
    "SceneConfig",
    "ScenePoint",
    "VirtualCamera",
    "apply_rotation",
    "camera_azimuth",
    "generate_scene",
    "load_scene",
    "look_at",
    "make_camera",
    "oracle_projection",
    "render_view",
    "save_scene",
    "scene_to_json",
    "GuidanceRun",
    "RunConfig",
    "RunReport",
    "Scenario",
    "batch_evaluate",
    "metrics_csv",
    "pick_view_pair",
    "run_session",
    "scenario_from_dict",
    "summarize",
    "track_purity",
]
