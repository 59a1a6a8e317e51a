"""Global spatial orderings of feature bins.

Each view ranks its visible bins along the image x and y axes; the two
global orderings that agree best with all per-view rankings (in the
pairwise-disagreement sense) are approximated with a Markov chain whose
states are bins and whose transition weights accumulate coordinate gaps
as votes.  Repeatedly extracting the highest-stationary-probability
state (the element ranked last) and removing it yields the full order.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from camguide import kernels
from camguide.errors import (
    ConvergenceWarning,
    EmptyGraph,
    EmptyView,
    NotConverged,
    UnknownBin,
)

AXIS_X = "x"
AXIS_Y = "y"


@dataclass(frozen=True)
class PartialOrder:
    """Bins observed in one view, sorted by one image coordinate.

    ``coords`` keeps the coordinate of each ranked bin: vote weights are
    coordinate gaps, which the bin sequence alone cannot supply.
    """

    view_id: int
    axis: str
    ranked_bins: tuple[int, ...]
    coords: tuple[float, ...]


@dataclass(frozen=True)
class VoteGraph:
    nodes: tuple[int, ...]  # bin ids, ascending
    weights: np.ndarray  # [i, j] = resolved vote that i precedes j


@dataclass(frozen=True)
class TransitionMatrix:
    states: tuple[int, ...]
    probs: np.ndarray


@dataclass(frozen=True)
class SofaConfig:
    damping: float = 0.05
    tol: float = 1e-9
    max_iters: int = 1000


def extract_partial_orders(tracks, views) -> list[PartialOrder]:
    """Per (view, axis) bin orderings; coordinate ties break by bin id."""
    per_view: dict[int, list[tuple[int, float, float]]] = {v: [] for v in views}
    for track in tracks:
        for obs in track.observations:
            if obs.view_id in per_view:
                per_view[obs.view_id].append(
                    (track.bin_id, float(obs.pixel[0]), float(obs.pixel[1]))
                )
    orders = []
    for view_id in views:
        rows = per_view[view_id]
        if not rows:
            continue
        for axis, coord_idx in ((AXIS_X, 1), (AXIS_Y, 2)):
            ranked = sorted(rows, key=lambda r: (r[coord_idx], r[0]))
            orders.append(
                PartialOrder(
                    view_id=view_id,
                    axis=axis,
                    ranked_bins=tuple(r[0] for r in ranked),
                    coords=tuple(r[coord_idx] for r in ranked),
                )
            )
    return orders


def kendall_distance(full, partial: PartialOrder) -> int:
    """Pairs ordered one way by the view and the other way globally."""
    rank_of = {b: i for i, b in enumerate(full)}
    try:
        ranks = np.array([rank_of[b] for b in partial.ranked_bins], dtype=np.int64)
    except KeyError as exc:
        raise UnknownBin(f"bin {exc.args[0]} missing from the full ranking") from exc
    return kernels.kendall_pairs(ranks)


def build_vote_graph(partials) -> VoteGraph:
    """Accumulate coordinate gaps as precedence votes and resolve each
    bin pair to its heavier direction (ties keep low-to-high bin id)."""
    axes = {p.axis for p in partials}
    if len(axes) > 1:
        raise ValueError(f"partial orders mix axes: {axes}")
    nodes = sorted({b for p in partials for b in p.ranked_bins})
    pos = {b: i for i, b in enumerate(nodes)}
    n = len(nodes)
    w = np.zeros((n, n))
    for p in partials:
        idx = np.array([pos[b] for b in p.ranked_bins], dtype=np.int64)
        coords = np.array(p.coords, dtype=np.float64)
        gaps = coords[None, :] - coords[:, None]  # [u, v] = x_v - x_u
        np.maximum(gaps, 0.0, out=gaps)
        w[np.ix_(idx, idx)] += gaps

    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    keep = (w > w.T) | ((w == w.T) & upper)
    return VoteGraph(nodes=tuple(nodes), weights=np.where(keep, w, 0.0))


def transition_matrix(g: VoteGraph, damping: float) -> TransitionMatrix:
    """Row-normalized vote weights, sinks as self-loops, blended with a
    uniform teleport of mass ``damping``."""
    if not 0.0 <= damping < 0.5:
        raise ValueError("damping must be in [0, 0.5)")
    n = len(g.nodes)
    if n == 0:
        raise EmptyGraph("vote graph has no nodes")
    w = g.weights
    sums = w.sum(axis=1)
    probs = np.zeros((n, n))
    for i in range(n):
        if sums[i] > 0:
            probs[i] = w[i] / sums[i]
        else:
            probs[i, i] = 1.0
    probs = (1.0 - damping) * probs + damping / n
    return TransitionMatrix(states=g.nodes, probs=probs)


def stationary_distribution(m: TransitionMatrix, tol: float = 1e-9, max_iters: int = 1000) -> np.ndarray:
    """Power iteration ``y <- M^T y`` from the uniform vector until the
    L1 change drops below ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = len(m.states)
    y = np.full(n, 1.0 / n)
    mt = m.probs.T
    for _ in range(max_iters):
        y_next = mt @ y
        delta = float(np.abs(y_next - y).sum())
        y = y_next
        if delta < tol:
            return y
    raise NotConverged(
        f"power iteration still moving after {max_iters} iterations",
        last_iterate=y,
        residual=delta,
    )


def aggregate_ranks(
    g: VoteGraph,
    damping: float = 0.05,
    tol: float = 1e-9,
    max_iters: int = 1000,
) -> list[int]:
    """Full bin ordering, rank 1 = smallest coordinate.

    Extracts the highest-probability state of the (re-normalized) chain,
    assigns it the last remaining rank, removes it, and repeats.
    Non-convergence of an extraction round degrades to a warning.
    """
    n = len(g.nodes)
    if n == 0:
        raise EmptyGraph("vote graph has no nodes")
    if not 0.0 <= damping < 0.5:
        raise ValueError("damping must be in [0, 0.5)")
    removal, converged = kernels.markov_removal_order(g.weights, damping, tol, max_iters)
    bad = int((~converged).sum())
    if bad:
        warnings.warn(
            f"{bad}/{n} extraction rounds hit the {max_iters}-iteration cap",
            ConvergenceWarning,
        )
    perm = [0] * n
    for step, state in enumerate(removal):
        perm[n - 1 - step] = g.nodes[int(state)]
    return perm


def _median_half_up(values) -> int:
    med = float(np.median(values))
    return math.floor(med + 0.5)


def _median_half_down(values) -> int:
    med = float(np.median(values))
    return math.ceil(med - 0.5)


def image_intervals(ranking, partials) -> dict[int, tuple[int, int]]:
    """Per-view interval of global ranks from the decile medians.

    The low end is the half-up-rounded median of the smallest ten
    percent of the view's ranks and the high end the half-down-rounded
    median of the largest ten percent, shrinking intervals inward.
    """
    rank_of = {b: i + 1 for i, b in enumerate(ranking)}
    out: dict[int, tuple[int, int]] = {}
    for view_id in sorted({p.view_id for p in partials}):
        bins = [b for p in partials if p.view_id == view_id for b in p.ranked_bins]
        bins = sorted(set(bins))
        if not bins:
            raise EmptyView(f"view {view_id} has no ranked bins")
        try:
            ranks = sorted(rank_of[b] for b in bins)
        except KeyError as exc:
            raise UnknownBin(f"bin {exc.args[0]} missing from the full ranking") from exc
        dsize = max(1, math.ceil(0.1 * len(ranks)))
        lo = _median_half_up(ranks[:dsize])
        hi = _median_half_down(ranks[-dsize:])
        out[view_id] = (lo, hi)
    return out


def interval_overlap(a, b):
    """Intersection of two rank intervals, or None when disjoint."""
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    if lo > hi:
        return None
    return (lo, hi)


@dataclass
class SofaRanking:
    sigma_x: list[int]
    sigma_y: list[int]
    intervals: dict[int, dict[str, tuple[int, int]]]

    def __post_init__(self):
        self._rank_x = {b: i + 1 for i, b in enumerate(self.sigma_x)}
        self._rank_y = {b: i + 1 for i, b in enumerate(self.sigma_y)}

    def rank_x(self, bin_id: int) -> int:
        return self._rank_x[bin_id]

    def rank_y(self, bin_id: int) -> int:
        return self._rank_y[bin_id]

    @property
    def bins(self) -> list[int]:
        return list(self.sigma_x)

    def axis_dump(self, axis: str) -> dict:
        order = self.sigma_x if axis == AXIS_X else self.sigma_y
        return {
            "axis": axis,
            "order": [int(b) for b in order],
            "intervals": {
                str(v): [int(iv[axis][0]), int(iv[axis][1])]
                for v, iv in self.intervals.items()
            },
        }

    def dump_json(self, axis: str) -> str:
        return json.dumps(self.axis_dump(axis), sort_keys=True)


def compute_ranking(tracks, views, cfg: SofaConfig | None = None) -> SofaRanking:
    """Offline phase: partial orders on both axes, one rank aggregation
    per axis, then per-view intervals."""
    cfg = cfg or SofaConfig()
    partials = extract_partial_orders(tracks, views)
    by_axis = {
        AXIS_X: [p for p in partials if p.axis == AXIS_X],
        AXIS_Y: [p for p in partials if p.axis == AXIS_Y],
    }
    orders = {}
    ivals = {}
    for axis, plist in by_axis.items():
        graph = build_vote_graph(plist)
        orders[axis] = aggregate_ranks(graph, cfg.damping, cfg.tol, cfg.max_iters)
        ivals[axis] = image_intervals(orders[axis], plist)

    merged: dict[int, dict[str, tuple[int, int]]] = {}
    for axis in (AXIS_X, AXIS_Y):
        for view_id, iv in ivals[axis].items():
            merged.setdefault(view_id, {})[axis] = iv
    return SofaRanking(sigma_x=orders[AXIS_X], sigma_y=orders[AXIS_Y], intervals=merged)
