"""Guidance planning: waypoint selection over the aggregated orderings,
support-set search, epipolar transfer, rotation commands, overlays, and
session state.

A session tracks the guided camera's current view against a destination
view.  Each step picks the bin closest in rank to the target whose
pixel can be transferred from a support set of auxiliary views, and
emits the rotation that would center the transferred pixel.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from camguide import geometry
from camguide.correspondence import TrackIndex
from camguide.errors import (
    EmptyView,
    EPTFailure,
    InsufficientMatches,
    NoConsensus,
    NoReachableWaypoint,
    ParallelLines,
)
from camguide.geometry import Intrinsics, RansacConfig, RotationCommand, TransferResult
from camguide.sofa import SofaRanking

REFERENCE_DIAGONAL = math.hypot(1280.0, 720.0)


class Status(str, enum.Enum):
    IN_PROGRESS = "in_progress"
    SUCCESS = "success"
    NO_OVERLAP_FAILURE = "no_overlap_failure"
    CENTER_FAILURE = "center_failure"
    STEP_LIMIT = "step_limit"

    def terminal(self) -> bool:
        return self is not Status.IN_PROGRESS


class OverlayKind(str, enum.Enum):
    POINT = "point"
    ARROW = "arrow"
    LINES = "lines"


@dataclass(frozen=True)
class ViewInfo:
    intrinsics: Intrinsics
    image_size: tuple[int, int]

    @property
    def center(self) -> np.ndarray:
        return np.array([self.image_size[0] / 2.0, self.image_size[1] / 2.0])


@dataclass(frozen=True)
class PlannerConfig:
    center_region_fraction: float = 0.2
    min_shared_tracks: int = 16
    max_support: int = 4
    min_support: int = 2
    max_steps: int = 10
    ept_threshold_px: float = 3.0  # at the 1280x720 reference diagonal
    # the candidate traversal walks from the target outward; untrusted
    # transfers blacklist their bin and the walk continues (F estimates
    # are memoized per step, so attempts are cheap)
    max_blacklist: int = 64
    # support views are diversity-selected from this many top-overlap
    # candidates
    support_shortlist: int = 8
    # transfers farther out than this many image diagonals are treated as
    # failed (line lateral noise times extrapolation swamps the signal)
    max_transfer_diagonals: float = 3.0
    # near-regime gate: when the affine prediction from the support
    # views' shared tracks falls inside its trustworthy range (half a
    # diagonal), the transfer must land within this many diagonals of it;
    # beyond that range the prediction magnitude undershoots (linear fit
    # of a tan curve) and only its direction is enforced
    prediction_gate_diag: float = 0.5
    # EPT-based success evidence carries estimation error that a direct
    # observation does not; it must land in a correspondingly shrunken
    # center box for the success audit to stay honest
    ept_success_shrink: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.center_region_fraction < 1.0:
            raise ValueError("center_region_fraction must be in (0, 1)")
        if self.max_support > 4:
            raise ValueError("support sets are capped at 4 views")


@dataclass(frozen=True)
class OverlayLine:
    coeffs: np.ndarray
    segment: tuple | None
    inlier: bool


@dataclass(frozen=True)
class Overlay:
    kind: OverlayKind
    point: np.ndarray | None
    arrow_direction: np.ndarray | None
    lines: list[OverlayLine]


@dataclass(frozen=True)
class GuidanceStep:
    waypoint_bin: int
    support_views: list[int]
    transfer: TransferResult | None
    rotation: RotationCommand
    overlay: Overlay


@dataclass
class GuidanceSession:
    current_view: int
    destination_view: int
    target_bin: int
    center_bin: int
    # robust rank anchors: median ranks of the bins around the view
    # center (a single bin's global rank can be wrecked by one confused
    # observation; the local median cannot)
    target_anchor: tuple[int, int] | None = None
    center_anchor: tuple[int, int] | None = None
    step_count: int = 0
    history: list[GuidanceStep] = field(default_factory=list)
    status: Status = Status.IN_PROGRESS
    # waypoints already centered; re-picking one oscillates (the target
    # is exempt: final centering may retry)
    visited_bins: set[int] = field(default_factory=set)


def scaled_threshold(base_px: float, image_size) -> float:
    """Pixel tolerance scaled with the image diagonal from the 1280x720
    reference."""
    diag = math.hypot(image_size[0], image_size[1])
    return base_px * diag / REFERENCE_DIAGONAL


def in_center_region(pixel, view: ViewInfo, fraction: float) -> bool:
    """Inside the central axis-aligned box of side fraction * image side."""
    c = view.center
    half_w = fraction * view.image_size[0] / 2.0
    half_h = fraction * view.image_size[1] / 2.0
    return abs(pixel[0] - c[0]) <= half_w and abs(pixel[1] - c[1]) <= half_h


def in_bounds(pixel, view: ViewInfo) -> bool:
    return 0 <= pixel[0] < view.image_size[0] and 0 <= pixel[1] < view.image_size[1]


def center_bin(view_id: int, tracks: TrackIndex, views: dict[int, ViewInfo]) -> int:
    """Bin whose observation lies nearest the image center; ties break
    toward the lower bin id."""
    bins = sorted(tracks.bins_of_view.get(view_id, ()))
    if not bins:
        raise EmptyView(f"view {view_id} observes no bins")
    center = views[view_id].center
    best = None
    best_d = math.inf
    for b in bins:
        d = float(np.linalg.norm(tracks.pixel(b, view_id) - center))
        if d < best_d:
            best_d = d
            best = b
    return best


ANCHOR_NEIGHBORHOOD = 9


def anchor_ranks(
    view_id: int,
    ranking: SofaRanking,
    tracks: TrackIndex,
    views: dict[int, ViewInfo],
) -> tuple[int, int]:
    """Median (rank_x, rank_y) of the bins nearest the view center."""
    bins = sorted(tracks.bins_of_view.get(view_id, ()))
    if not bins:
        raise EmptyView(f"view {view_id} observes no bins")
    center = views[view_id].center
    by_dist = sorted(bins, key=lambda b: float(np.linalg.norm(tracks.pixel(b, view_id) - center)))
    chosen = by_dist[:ANCHOR_NEIGHBORHOOD]
    rx = int(np.median([ranking.rank_x(b) for b in chosen]))
    ry = int(np.median([ranking.rank_y(b) for b in chosen]))
    return rx, ry


def find_support_set(
    waypoint_bin: int,
    current_view: int,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    limit: int | None = None,
) -> list[int] | None:
    """Views that observe the waypoint and overlap the current view.

    Ranked by shared-track count (descending, then view id), capped at
    ``max_support``.  A single qualifying view is returned alone for
    line-only guidance; otherwise fewer than ``min_support`` yields None.
    """
    candidates = []
    for v in tracks.views_of_bin(waypoint_bin):
        if v == current_view:
            continue
        shared = tracks.shared_count(current_view, v)
        if shared >= cfg.min_shared_tracks:
            candidates.append((-shared, v))
    candidates.sort()
    if not candidates:
        return None
    if len(candidates) < cfg.min_support and len(candidates) != 1:
        return None
    return [v for _neg, v in candidates[: limit or cfg.max_support]]


def _epipole_angle(f: np.ndarray, view: ViewInfo) -> float:
    """Orientation (mod pi) of the current view's epipole relative to the
    image center; epipolar lines of view ``j`` fan out from it, so spread
    epipoles mean well-crossing lines."""
    _u, _s, vt = np.linalg.svd(f.T)
    e = vt[-1]
    if abs(e[2]) > 1e-9:
        rel = e[:2] / e[2] - view.center
    else:
        rel = e[:2]
    return math.atan2(rel[1], rel[0]) % math.pi


def _diverse_support(
    shortlist: list[int],
    current_view: int,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    view: ViewInfo,
    rng: np.random.Generator,
    cache: dict | None,
) -> list[int]:
    """Up to ``max_support`` views chosen greedily for epipole-angle
    spread (clustered epipoles give a near-parallel line pencil whose
    intersections slide under noise).  The best-overlapping view seeds
    the selection."""
    usable = []
    for j in shortlist:
        f, _affine = _support_geometry(j, current_view, tracks, cfg, view, rng, cache)
        if f is not None:
            usable.append((j, _epipole_angle(f, view)))
    if len(usable) <= cfg.max_support:
        return [j for j, _a in usable]

    chosen = [usable[0]]
    rest = usable[1:]
    while len(chosen) < cfg.max_support and rest:
        def spread(item):
            return min(
                min(abs(item[1] - c[1]), math.pi - abs(item[1] - c[1])) for c in chosen
            )

        best = max(range(len(rest)), key=lambda i: spread(rest[i]))
        chosen.append(rest.pop(best))
    return [j for j, _a in chosen]


def _in_corridor(rank: int, alpha: int, gamma: int, margin: int) -> bool:
    """Inside the rank interval between alpha and gamma, widened by a
    tolerance for individually misranked bins."""
    lo, hi = min(alpha, gamma), max(alpha, gamma)
    return lo - margin <= rank <= hi + margin


def next_waypoint(
    session: GuidanceSession,
    ranking: SofaRanking,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    exclude: set[int] | None = None,
) -> tuple[int, list[int]]:
    """First supported bin inside the rank corridor between the current
    center anchor and the target anchor, scanning outward from the
    target.

    Candidates must be strictly rank-closer to the target than the
    current center (progress), never the center bin itself; the target
    bin is always tried first.  Candidates are visited by increasing
    rank distance ``|rx - gx| + |ry - gy|``.
    """
    exclude = exclude or set()
    gx, gy = session.target_anchor or (
        ranking.rank_x(session.target_bin),
        ranking.rank_y(session.target_bin),
    )
    ax, ay = session.center_anchor or (
        ranking.rank_x(session.center_bin),
        ranking.rank_y(session.center_bin),
    )
    d_center = abs(ax - gx) + abs(ay - gy)
    margin = max(2, math.ceil(0.02 * len(ranking.bins)))

    scored = []
    for b in ranking.bins:
        if b == session.target_bin:
            if b not in exclude:
                scored.append((-1, b))  # always first
            continue
        if b in exclude or b == session.center_bin:
            continue
        rx, ry = ranking.rank_x(b), ranking.rank_y(b)
        d = abs(rx - gx) + abs(ry - gy)
        if d < d_center and _in_corridor(rx, ax, gx, margin) and _in_corridor(ry, ay, gy, margin):
            scored.append((d, b))
    scored.sort()

    # well-posed transfers (two or more support views) first; degraded
    # single-line guidance only when nothing else is reachable
    fallback = None
    for _d, b in scored:
        support = find_support_set(b, session.current_view, tracks, cfg)
        if support and len(support) >= 2:
            return b, support
        if support and fallback is None:
            fallback = (b, support)
    if fallback is not None:
        return fallback
    raise NoReachableWaypoint(
        f"no supported bin between center rank ({ax},{ay}) and target rank ({gx},{gy})"
    )


def _support_geometry(
    j: int,
    current_view: int,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    view: ViewInfo,
    rng: np.random.Generator,
    cache: dict | None,
):
    """(F, affine) from support view ``j`` into the current view, memoized
    per step (candidate bins share support views, so re-estimating per
    bin would dominate the traversal).

    The affine least-squares fit over the shared tracks is a coarse
    pixel predictor: exact transfer must come from the epipolar lines,
    but a transfer thousands of pixels from the affine prediction is a
    spurious line crossing, not parallax.
    """
    key = (j, current_view)
    if cache is not None and key in cache:
        return cache[key]
    f = None
    affine = None
    pairs = tracks.shared_pairs(j, current_view)
    if len(pairs) >= 8:
        threshold = scaled_threshold(cfg.ept_threshold_px, view.image_size)
        ransac = RansacConfig(threshold_px=threshold, min_inliers=cfg.min_shared_tracks)
        matches = [(pa, pb) for pa, pb, _bin in pairs]
        try:
            f, _flags = geometry.estimate_fundamental(matches, ransac, rng)
        except (NoConsensus, InsufficientMatches):
            f = None
        if f is not None:
            src = np.array([[pa[0], pa[1], 1.0] for pa, _pb, _m in pairs])
            dst = np.array([pb for _pa, pb, _m in pairs])
            affine, *_ = np.linalg.lstsq(src, dst, rcond=None)
    result = (f, affine)
    if cache is not None:
        cache[key] = result
    return result


def _estimate_lines(
    waypoint_bin: int,
    current_view: int,
    support: list[int],
    tracks: TrackIndex,
    cfg: PlannerConfig,
    view: ViewInfo,
    rng: np.random.Generator,
    cache: dict | None = None,
):
    """Epipolar lines in the current view (one per usable support view)
    plus the affine pixel predictions of the waypoint."""
    threshold = scaled_threshold(cfg.ept_threshold_px, view.image_size)
    lines = []
    used = []
    predictions = []
    for j in support:
        f, affine = _support_geometry(j, current_view, tracks, cfg, view, rng, cache)
        if f is None:
            continue
        p_j = tracks.pixel(waypoint_bin, j)
        try:
            line = geometry.epipolar_line(f, p_j)
        except geometry.DegenerateLine:
            continue
        lines.append(line)
        used.append(j)
        predictions.append(np.array([p_j[0], p_j[1], 1.0]) @ affine)
    return lines, used, threshold, predictions


def _build_overlay(
    kind: OverlayKind,
    point,
    view: ViewInfo,
    lines,
    inlier_flags,
) -> Overlay:
    w, h = view.image_size
    overlay_lines = [
        OverlayLine(
            coeffs=np.asarray(l),
            segment=geometry.clip_line_to_rect(l, w, h),
            inlier=bool(flag),
        )
        for l, flag in zip(lines, inlier_flags)
    ]
    direction = None
    if kind is OverlayKind.ARROW:
        delta = np.asarray(point) - view.center
        direction = delta / np.linalg.norm(delta)
    return Overlay(kind=kind, point=point, arrow_direction=direction, lines=overlay_lines)


def _guarded_transfer(
    lines,
    predictions,
    view: ViewInfo,
    cfg: PlannerConfig,
    rng: np.random.Generator,
    require_majority: bool = True,
) -> TransferResult:
    """EPT with the planner's trust policy layered on top.

    The consensus threshold widens with the predicted eccentricity (line
    lateral error scales with extrapolation distance); the result must
    convince a majority of the lines and stay within the trusted
    extrapolation range.  Near-field transfers must land close to the
    affine prediction (accurate there); far-field transfers need only
    agree with its direction, since the linear fit undershoots a tan
    curve at range while keeping the correct side.
    """
    diag = math.hypot(*view.image_size)
    base = scaled_threshold(cfg.ept_threshold_px, view.image_size)
    med = np.median(np.asarray(predictions), axis=0)
    ecc = float(np.linalg.norm(med - view.center))
    factor = min(max(1.0, ecc / (diag / 2.0)), 6.0)
    transfer = geometry.epipolar_point_transfer(lines, base * factor, None, rng)

    if require_majority and transfer.inlier_count <= len(lines) // 2:
        raise EPTFailure(
            f"transfer convinces only {transfer.inlier_count}/{len(lines)} lines"
        )
    dist = float(np.linalg.norm(transfer.point - view.center))
    if dist > cfg.max_transfer_diagonals * diag:
        raise EPTFailure(f"transfer extrapolates to {transfer.point} (untrusted)")

    if ecc <= diag / 2.0:
        miss = float(np.linalg.norm(transfer.point - med))
        if miss > cfg.prediction_gate_diag * diag:
            raise EPTFailure(
                f"transfer {transfer.point} sits {miss:.0f}px from the affine "
                f"prediction {med}"
            )
    else:
        aligned = float(np.dot(transfer.point - view.center, med - view.center))
        if aligned <= 0.0:
            raise EPTFailure(
                f"transfer {transfer.point} opposes the predicted direction {med}"
            )
    return transfer


def _attempt_step(
    session: GuidanceSession,
    waypoint_bin: int,
    support: list[int],
    tracks: TrackIndex,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
    cache: dict | None = None,
) -> GuidanceStep:
    view = views[session.current_view]
    if len(support) >= 2:
        shortlist = find_support_set(
            waypoint_bin, session.current_view, tracks, cfg, limit=cfg.support_shortlist
        )
        support = _diverse_support(
            shortlist, session.current_view, tracks, cfg, view, rng, cache
        ) or support
    lines, used, threshold, predictions = _estimate_lines(
        waypoint_bin, session.current_view, support, tracks, cfg, view, rng, cache
    )
    if not lines:
        raise EPTFailure(f"no epipolar lines for bin {waypoint_bin}")

    if len(lines) >= 2:
        transfer = _guarded_transfer(lines, predictions, view, cfg, rng)
        target_px = transfer.point
        flags = transfer.inlier_flags
        kind = OverlayKind.POINT if in_bounds(target_px, view) else OverlayKind.ARROW
    else:
        # single support view: guide along the lone epipolar line, aiming
        # at the point on it nearest the affine prediction (the line
        # fixes one degree of freedom, the prediction the other).  The
        # prediction's vertical component is clamped to the band of
        # currently observed features: the scene is vertically bounded,
        # so tilting out of that band always loses the scene.
        transfer = None
        ys = [
            tracks.pixel(b, session.current_view)[1]
            for b in tracks.bins_of_view.get(session.current_view, ())
        ]
        aim_prior = np.array(predictions[0], dtype=np.float64)
        if ys:
            aim_prior[1] = float(np.clip(aim_prior[1], min(ys), max(ys)))
        target_px = geometry.closest_point_on_line(lines[0], aim_prior)
        if ys:
            band = 0.25 * view.image_size[1]
            if not (min(ys) - band <= target_px[1] <= max(ys) + band):
                raise EPTFailure(
                    f"line guidance for bin {waypoint_bin} tilts out of the scene band"
                )
        flags = [True]
        kind = OverlayKind.LINES
        if in_center_region(target_px, view, cfg.center_region_fraction):
            # the aim point already sits in the center region: rotating
            # toward it goes nowhere, so fall through to another bin
            raise EPTFailure(f"line guidance for bin {waypoint_bin} stagnates")

    overlay = _build_overlay(kind, target_px, view, lines, flags)
    rotation = geometry.rotation_to_center(view.intrinsics, target_px)
    return GuidanceStep(
        waypoint_bin=waypoint_bin,
        support_views=used,
        transfer=transfer,
        rotation=rotation,
        overlay=overlay,
    )


def guidance_step(
    session: GuidanceSession,
    ranking: SofaRanking,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
) -> GuidanceStep:
    """Plan and record one step.

    Transfer failures blacklist the bin and fall through to the next
    candidate; after ``max_blacklist`` unusable bins the step fails.
    """
    if session.status.terminal():
        raise ValueError("session is terminal")
    blacklist: set[int] = set(session.visited_bins)
    cache: dict = {}
    attempts = 0
    while attempts <= cfg.max_blacklist:
        waypoint, support = next_waypoint(session, ranking, tracks, cfg, exclude=blacklist)
        try:
            step = _attempt_step(session, waypoint, support, tracks, cfg, views, rng, cache)
        except (EPTFailure, NoConsensus, ParallelLines):
            blacklist.add(waypoint)
            attempts += 1
            continue
        session.history.append(step)
        session.step_count += 1
        if waypoint != session.target_bin:
            session.visited_bins.add(waypoint)
        return step
    raise EPTFailure(f"transfer failed for {attempts} candidate bins")


def transfer_target(
    session: GuidanceSession,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
) -> np.ndarray | None:
    """Current-view pixel of the target bin: its own observation when
    present, otherwise an EPT attempt from a fresh support set."""
    candidates = target_pixel_candidates(session, tracks, cfg, views, rng)
    return candidates[0][0] if candidates else None


def _ept_target(session, tracks, cfg, views, rng) -> np.ndarray | None:
    support = find_support_set(
        session.target_bin, session.current_view, tracks, cfg, limit=cfg.support_shortlist
    )
    if not support or len(support) < 2:
        return None
    view = views[session.current_view]
    cache: dict = {}
    support = (
        _diverse_support(support, session.current_view, tracks, cfg, view, rng, cache)
        or support
    )
    lines, _used, _threshold, predictions = _estimate_lines(
        session.target_bin, session.current_view, support, tracks, cfg, view, rng, cache
    )
    if len(lines) < 2:
        return None
    try:
        # no majority requirement here: with half the lines confused the
        # true pair still wins, and the center-region test downstream is
        # itself a strong filter
        return _guarded_transfer(
            lines, predictions, view, cfg, rng, require_majority=False
        ).point
    except (EPTFailure, NoConsensus, ParallelLines):
        return None


def target_pixel_candidates(
    session: GuidanceSession,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
) -> list[tuple[np.ndarray, str]]:
    """Candidate (pixel, evidence) pairs for the target in the current
    view: the bin's own observation plus the EPT transfer (either may be
    wrong on its own — the observation can be a confused feature, the
    transfer is noisy)."""
    candidates = []
    p = tracks.pixel(session.target_bin, session.current_view)
    if p is not None:
        candidates.append((p, "observation"))
    ept = _ept_target(session, tracks, cfg, views, rng)
    if ept is not None:
        candidates.append((ept, "transfer"))
    return candidates


def target_centered(
    session: GuidanceSession,
    tracks: TrackIndex,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
) -> bool:
    """Success test over the two evidence channels.

    The multi-view transfer is robust but noisy: it must land in a
    shrunken center box.  A single observation is precise but fragile
    (it may be a confused feature): it counts only when the transfer is
    unavailable or agrees with it.
    """
    view = views[session.current_view]
    candidates = dict(
        (evidence, pixel)
        for pixel, evidence in target_pixel_candidates(session, tracks, cfg, views, rng)
    )
    obs = candidates.get("observation")
    transfer = candidates.get("transfer")

    shrink = cfg.center_region_fraction * cfg.ept_success_shrink
    if transfer is not None and in_center_region(transfer, view, shrink):
        return True
    if obs is not None and in_center_region(obs, view, cfg.center_region_fraction):
        if transfer is None:
            return True
        w, h = view.image_size
        consistency = math.hypot(shrink * w / 2.0, shrink * h / 2.0)
        if float(np.linalg.norm(obs - transfer)) <= consistency:
            return True
    return False


def advance(
    session: GuidanceSession,
    new_view: int,
    tracks: TrackIndex,
    ranking: SofaRanking,
    cfg: PlannerConfig,
    views: dict[int, ViewInfo],
    rng: np.random.Generator,
) -> Status:
    """Fold a newly captured view into the session and settle its status.

    Success as soon as the target's pixel (observed or transferred)
    lands in the center region; the step cap wins over a failed final
    centering; a final centering attempt that leaves the target outside
    the region (or unlocatable) is a centering failure.
    """
    if session.status.terminal():
        return session.status
    session.current_view = new_view
    try:
        session.center_bin = center_bin(new_view, tracks, views)
        session.center_anchor = anchor_ranks(new_view, ranking, tracks, views)
    except EmptyView:
        session.status = Status.NO_OVERLAP_FAILURE
        return session.status

    if target_centered(session, tracks, cfg, views, rng):
        session.status = Status.SUCCESS
    elif session.step_count >= cfg.max_steps:
        session.status = Status.STEP_LIMIT
    elif (
        len(session.history) >= 2
        and session.history[-1].waypoint_bin == session.target_bin
        and session.history[-2].waypoint_bin == session.target_bin
    ):
        # two consecutive direct centering attempts missed: give up
        session.status = Status.CENTER_FAILURE
    return session.status


# -- transcripts --------------------------------------------------------


def overlay_to_json(overlay: Overlay | None) -> dict | None:
    if overlay is None:
        return None
    out: dict = {"kind": overlay.kind.value, "lines": []}
    out["point"] = None if overlay.point is None else [float(overlay.point[0]), float(overlay.point[1])]
    out["dir"] = (
        None
        if overlay.arrow_direction is None
        else [float(overlay.arrow_direction[0]), float(overlay.arrow_direction[1])]
    )
    for line in overlay.lines:
        seg = None
        if line.segment is not None:
            (x1, y1), (x2, y2) = line.segment
            seg = [float(x1), float(y1), float(x2), float(y2)]
        out["lines"].append(
            {
                "a": float(line.coeffs[0]),
                "b": float(line.coeffs[1]),
                "c": float(line.coeffs[2]),
                "seg": seg,
                "inlier": line.inlier,
            }
        )
    return out


def step_to_json(step: GuidanceStep) -> dict:
    transfer = None
    if step.transfer is not None:
        transfer = {
            "point": [float(step.transfer.point[0]), float(step.transfer.point[1])],
            "inliers": [bool(f) for f in step.transfer.inlier_flags],
            "inlier_count": int(step.transfer.inlier_count),
        }
    return {
        "waypoint_bin": int(step.waypoint_bin),
        "support_views": [int(v) for v in step.support_views],
        "transfer": transfer,
        "rotation": {
            "axis": [float(a) for a in step.rotation.axis],
            "angle": float(step.rotation.angle),
        },
        "overlay": overlay_to_json(step.overlay),
    }


def session_transcript(session: GuidanceSession) -> dict:
    return {
        "destination_view": int(session.destination_view),
        "target_bin": int(session.target_bin),
        "status": session.status.value,
        "steps": [step_to_json(s) for s in session.history],
    }


def transcript_json(session: GuidanceSession) -> str:
    return json.dumps(session_transcript(session), sort_keys=True)
