"""Live guidance sessions over HTTP and a WebSocket frame stream.

A manual session keeps the overlay registered to the live orientation by
chaining the pure-rotation homography between the frame the overlay was
computed in and the current frame; a full epipolar recomputation happens
only at step boundaries (when the steered waypoint enters the center
region and a new view is captured).
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import threading
import uuid
from dataclasses import replace
from pathlib import Path

logger = logging.getLogger("camguide.service")

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from camguide import geometry, planner
from camguide.errors import (
    EPTFailure,
    NoReachableWaypoint,
    OfflinePhaseFailure,
    SessionTerminal,
    UnknownSession,
)
from camguide.planner import Overlay, OverlayKind, OverlayLine, Status
from camguide.simulator import (
    GuidanceRun,
    NoiseModel,
    RunConfig,
    Scene,
    SceneConfig,
    generate_scene,
    load_scene,
)

MODE_AUTO = "auto"
MODE_MANUAL = "manual"


def _frame_dict(frame_index, status, step_count, features, overlay, image_size) -> dict:
    return {
        "frame": int(frame_index),
        "status": status.value if isinstance(status, Status) else str(status),
        "step": int(step_count),
        "features": [
            {"bin": int(b), "x": float(p[0]), "y": float(p[1])} for b, p in features
        ],
        "overlay": planner.overlay_to_json(overlay),
        "image_size": [int(image_size[0]), int(image_size[1])],
    }


class LiveSession:
    """Single guidance run plus its frame history; single-writer."""

    def __init__(self, session_id: str, run: GuidanceRun, mode: str):
        self.id = session_id
        self.run = run
        self.mode = mode
        self.lock = threading.Lock()
        self.frames: list[dict] = []
        self._base_rotation = None
        self._base_features: list[tuple[int, np.ndarray]] = []
        self._step: planner.GuidanceStep | None = None

        if mode == MODE_AUTO:
            self._autopilot()
        else:
            self._rebase(initial=True)

    # -- shared ----------------------------------------------------------

    def _view_info(self) -> planner.ViewInfo:
        return self.run.views[self.run.session.current_view]

    def _features_of(self, view_id: int) -> list[tuple[int, np.ndarray]]:
        tracks = self.run.tracks
        return [
            (b, tracks.pixel(b, view_id))
            for b in sorted(tracks.bins_of_view.get(view_id, ()))
        ]

    def _append_frame(self, features, overlay) -> dict:
        frame = _frame_dict(
            len(self.frames),
            self.run.session.status,
            self.run.session.step_count,
            features,
            overlay,
            self._view_info().image_size,
        )
        if not self.frames or self.frames[-1]["status"] != frame["status"]:
            logger.info(
                "session %s -> %s (frame %d, step %d)",
                self.id,
                frame["status"],
                frame["frame"],
                frame["step"],
            )
        self.frames.append(frame)
        return frame

    # -- auto pilot --------------------------------------------------------

    def _autopilot(self):
        run = self.run
        while run.session.status is Status.IN_PROGRESS:
            try:
                step = run.plan()
            except (NoReachableWaypoint, EPTFailure):
                run.session.status = Status.NO_OVERLAP_FAILURE
                break
            self._append_frame(self._features_of(run.session.current_view), step.overlay)
            run.execute(step)
        self._append_frame(self._features_of(run.session.current_view), None)

    # -- manual steering ----------------------------------------------------

    def _rebase(self, initial: bool = False):
        """Recompute the overlay from scratch in the current view and make
        it the new chaining base."""
        run = self.run
        self._base_rotation = run.guided_cam.rotation.copy()
        self._base_features = self._features_of(run.session.current_view)
        self._step = None
        if run.session.status is Status.IN_PROGRESS:
            try:
                self._step = run.plan()
            except (NoReachableWaypoint, EPTFailure):
                run.session.status = Status.NO_OVERLAP_FAILURE
        overlay = self._step.overlay if self._step else None
        self._append_frame(self._base_features, overlay)

    def _chain_homography(self) -> np.ndarray:
        r_rel = self.run.guided_cam.rotation @ self._base_rotation.T
        return geometry.rotation_homography(self.run.guided_cam.intrinsics, r_rel)

    def _transferred_overlay(self, h: np.ndarray) -> tuple[Overlay | None, np.ndarray | None]:
        """Overlay moved from the base frame to the current one; also
        returns the transferred waypoint pixel."""
        if self._step is None:
            return None, None
        base = self._step.overlay
        view = self._view_info()
        w, hgt = view.image_size
        lines = []
        for line in base.lines:
            moved = geometry.transfer_line(h, line.coeffs)
            lines.append(
                OverlayLine(
                    coeffs=moved,
                    segment=geometry.clip_line_to_rect(moved, w, hgt),
                    inlier=line.inlier,
                )
            )
        point = None
        if base.point is not None:
            point = geometry.transfer_point(h, base.point)
        if base.kind is OverlayKind.LINES or point is None:
            return Overlay(OverlayKind.LINES, None, None, lines), point
        if planner.in_bounds(point, view):
            return Overlay(OverlayKind.POINT, point, None, lines), point
        delta = point - view.center
        direction = delta / np.linalg.norm(delta)
        return Overlay(OverlayKind.ARROW, point, direction, lines), point

    def steer(self, pan: float, tilt: float) -> dict:
        with self.lock:
            if self.mode != MODE_MANUAL:
                raise SessionTerminal("steer only applies to manual sessions")
            if self.run.session.status.terminal():
                raise SessionTerminal(f"session is {self.run.session.status.value}")
            run = self.run

            body = geometry.rodrigues((0.0, 1.0, 0.0), pan) @ geometry.rodrigues(
                (1.0, 0.0, 0.0), tilt
            )
            run.guided_cam = replace(run.guided_cam, rotation=body.T @ run.guided_cam.rotation)

            h = self._chain_homography()
            overlay, waypoint_px = self._transferred_overlay(h)

            centered = waypoint_px is not None and planner.in_center_region(
                waypoint_px, self._view_info(), run.cfg.planner.center_region_fraction
            )
            if centered:
                # step boundary: capture a fresh view and recompute
                new_view = run.capture()
                planner.advance(
                    run.session,
                    new_view,
                    run.tracks,
                    run.ranking,
                    run.cfg.planner,
                    run.views,
                    run.ransac_rng,
                )
                self._rebase()
                return self.frames[-1]

            features = []
            for b, p in self._base_features:
                try:
                    moved = geometry.transfer_point(h, p)
                except geometry.PointAtInfinity:
                    continue
                if planner.in_bounds(moved, self._view_info()):
                    features.append((b, moved))
            return self._append_frame(features, overlay)

    def state(self) -> dict:
        with self.lock:
            return self.frames[-1]


class SessionManager:
    def __init__(self, scenes_dir: str | None = None):
        self.scenes_dir = Path(scenes_dir) if scenes_dir else None
        self.sessions: dict[str, LiveSession] = {}
        self.lock = threading.Lock()

    def _resolve_scene(self, body: dict) -> Scene:
        if "scene_id" in body and body["scene_id"] is not None:
            if self.scenes_dir is None:
                raise HTTPException(404, detail="no scene directory configured")
            path = self.scenes_dir / f"{body['scene_id']}.json"
            if not path.exists():
                raise HTTPException(404, detail=f"unknown scene {body['scene_id']}")
            return load_scene(path)
        doc = dict(body.get("scene") or {})
        noise_doc = dict(doc.pop("noise", {}))
        if "depth_range" in doc:
            doc["depth_range"] = tuple(doc["depth_range"])
        if "image_size" in doc:
            doc["image_size"] = tuple(doc["image_size"])
        try:
            cfg = SceneConfig(**doc)
            noise = NoiseModel(**noise_doc)
        except (TypeError, ValueError) as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        return generate_scene(cfg, noise)

    def create(self, body: dict) -> str:
        scene = self._resolve_scene(body)
        mode = body.get("mode", MODE_MANUAL)
        if mode not in (MODE_AUTO, MODE_MANUAL):
            raise HTTPException(422, detail=f"unknown mode {mode!r}")
        try:
            initial = int(body["initial"])
            destination = int(body["destination"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(422, detail="initial and destination are required") from exc
        known = {cam.id for cam in scene.cameras}
        if initial == destination or initial not in known or destination not in known:
            raise HTTPException(400, detail="unknown or identical views")

        cfg = RunConfig(seed=int(body.get("seed", 0)))
        run = GuidanceRun(scene, initial, destination, cfg)
        try:
            run.offline()
        except OfflinePhaseFailure as exc:
            raise HTTPException(409, detail=f"offline phase failed: {exc}") from exc

        session_id = uuid.uuid4().hex
        live = LiveSession(session_id, run, mode)
        with self.lock:
            self.sessions[session_id] = live
        return session_id

    def get(self, session_id: str) -> LiveSession:
        with self.lock:
            live = self.sessions.get(session_id)
        if live is None:
            raise UnknownSession(session_id)
        return live


def create_app(scenes_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="camguide", version="0.1.0")
    manager = SessionManager(scenes_dir)
    app.state.manager = manager

    @app.post("/sessions")
    def create_session(body: dict):
        session_id = manager.create(body)
        return {"id": session_id}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        try:
            return manager.get(session_id).state()
        except UnknownSession:
            raise HTTPException(404, detail="unknown session")

    @app.post("/sessions/{session_id}/steer")
    def steer(session_id: str, body: dict):
        try:
            live = manager.get(session_id)
        except UnknownSession:
            raise HTTPException(404, detail="unknown session")
        pan = float(body.get("pan", 0.0))
        tilt = float(body.get("tilt", 0.0))
        if not (math.isfinite(pan) and math.isfinite(tilt)):
            raise HTTPException(422, detail="pan and tilt must be finite")
        try:
            return live.steer(pan, tilt)
        except SessionTerminal as exc:
            raise HTTPException(409, detail=str(exc))

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            live = manager.get(session_id)
        except UnknownSession:
            await websocket.close(code=4404)
            return
        cursor = int(websocket.query_params.get("from", 0))
        try:
            while True:
                with live.lock:
                    pending = live.frames[cursor:]
                for frame in pending:
                    await websocket.send_text(json.dumps(frame))
                    cursor += 1
                    if frame["status"] != Status.IN_PROGRESS.value:
                        await websocket.close()
                        return
                await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return

    return app
