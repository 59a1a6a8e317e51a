"""Visual dictionary and observation tracks.

Feature correspondence across many views is approximated by quantizing
descriptors into the leaves of a hierarchical k-means tree; every leaf
("bin") collects the observations believed to come from one scene point.
This trades recall for precision: the tree is deliberately large
(roughly ``t_k`` leaves per descriptor), so split tracks are common and
merged tracks are rare.

Observations carry an optional ``truth_point_id`` used only by the
simulator's audits; nothing in this module or its downstream consumers
reads it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from camguide.errors import DimensionMismatch, EmptyInput


@dataclass(frozen=True)
class Observation:
    view_id: int
    pixel: np.ndarray
    descriptor: np.ndarray
    truth_point_id: int | None = None


@dataclass(frozen=True)
class DictionaryConfig:
    depth: int = 3
    t_k: float = 0.9
    max_kmeans_iters: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not 0.0 < self.t_k <= 1.0:
            raise ValueError("t_k must be in (0, 1]")


@dataclass
class _TreeNode:
    centers: np.ndarray  # (k, dim) child centers
    children: list  # _TreeNode for internal children, int leaf id otherwise


@dataclass
class VisualDictionary:
    root: object  # _TreeNode or a bare leaf id
    leaf_centers: np.ndarray  # (leaf_count, dim)
    dim: int

    @property
    def leaf_count(self) -> int:
        return len(self.leaf_centers)


@dataclass
class Track:
    bin_id: int
    observations: list[Observation] = field(default_factory=list)


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator, max_iters: int):
    """Seeded k-means++ / Lloyd to an assignment fixpoint.

    Duplicate-heavy inputs may yield fewer than ``k`` clusters (the ++
    seeding stops once every point coincides with a center, and empty
    clusters are dropped).  Returns ``(centers, labels)``.
    """
    n = len(points)
    centers = [points[int(rng.integers(n))]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    while len(centers) < k:
        total = d2.sum()
        if total <= 0.0:
            break
        probs = d2 / total
        idx = int(rng.choice(n, p=probs))
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - centers[-1]) ** 2, axis=1))
    c = np.array(centers)

    labels = None
    for _ in range(max_iters):
        dists = np.linalg.norm(points[:, None, :] - c[None, :, :], axis=2)
        new_labels = dists.argmin(axis=1)  # ties resolve to the lowest index
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(len(c)):
            mask = labels == j
            if mask.any():
                c[j] = points[mask].mean(axis=0)

    keep = np.array([bool((labels == j).any()) for j in range(len(c))])
    c = c[keep]
    remap = np.cumsum(keep) - 1
    return c, remap[labels]


def build_dictionary(observations, cfg: DictionaryConfig) -> VisualDictionary:
    """Hierarchical k-means over all observation descriptors.

    The total leaf budget is ``t_k * w`` for ``w`` descriptors, spread as
    a branching factor of ``ceil((t_k * w) ** (1 / depth))`` per level.
    Nodes stop splitting when the depth is exhausted or when every
    remaining descriptor coincides (duplicates are atomic).
    """
    observations = list(observations)
    if not observations:
        raise EmptyInput("no observations to cluster")
    desc = np.array([o.descriptor for o in observations], dtype=np.float64)
    if desc.ndim != 2:
        raise DimensionMismatch("descriptors differ in length")
    dim = desc.shape[1]

    w = len(observations)
    k_total = cfg.t_k * w
    branching = max(int(np.ceil(k_total ** (1.0 / cfg.depth))), 1)
    rng = np.random.default_rng(cfg.seed)

    leaf_centers: list[np.ndarray] = []

    def make_leaf(pts: np.ndarray) -> int:
        leaf_centers.append(pts.mean(axis=0))
        return len(leaf_centers) - 1

    def split(pts: np.ndarray, depth_left: int):
        if depth_left == 0 or len(pts) < 2 or branching < 2:
            return make_leaf(pts)
        distinct = len(np.unique(pts, axis=0))
        if distinct < 2:
            return make_leaf(pts)
        centers, labels = _kmeans(
            pts, min(branching, distinct), rng, cfg.max_kmeans_iters
        )
        if len(centers) < 2:
            return make_leaf(pts)
        children = [split(pts[labels == j], depth_left - 1) for j in range(len(centers))]
        return _TreeNode(centers=centers, children=children)

    root = split(desc, cfg.depth)
    return VisualDictionary(root=root, leaf_centers=np.array(leaf_centers), dim=dim)


def quantize(dictionary: VisualDictionary, descriptor) -> int:
    """Greedy nearest-child descent from the root; ties go to the
    lowest-index child."""
    d = np.asarray(descriptor, dtype=np.float64)
    if d.shape != (dictionary.dim,):
        raise DimensionMismatch(f"descriptor dim {d.shape} != {dictionary.dim}")
    node = dictionary.root
    while isinstance(node, _TreeNode):
        dists = np.linalg.norm(node.centers - d, axis=1)
        node = node.children[int(dists.argmin())]
    return int(node)


def _quantize_batch(dictionary: VisualDictionary, desc: np.ndarray) -> np.ndarray:
    out = np.empty(len(desc), dtype=np.int64)

    def assign(node, idxs: np.ndarray):
        if not isinstance(node, _TreeNode):
            out[idxs] = int(node)
            return
        dists = np.linalg.norm(desc[idxs][:, None, :] - node.centers[None, :, :], axis=2)
        choice = dists.argmin(axis=1)
        for j, child in enumerate(node.children):
            sub = idxs[choice == j]
            if len(sub):
                assign(child, sub)

    assign(dictionary.root, np.arange(len(desc)))
    return out


def build_tracks(views, dictionary: VisualDictionary) -> list[Track]:
    """Group observations by quantized bin.

    A view contributes at most one observation per bin (the one whose
    descriptor is nearest the leaf center survives); bins observed in
    fewer than two views are dropped.
    """
    flat: list[Observation] = [o for view_obs in views for o in view_obs]
    if not flat:
        return []
    desc = np.array([o.descriptor for o in flat], dtype=np.float64)
    bins = _quantize_batch(dictionary, desc)
    center_dist = np.linalg.norm(desc - dictionary.leaf_centers[bins], axis=1)

    best: dict[tuple[int, int], tuple[float, int]] = {}
    for i, obs in enumerate(flat):
        key = (int(bins[i]), obs.view_id)
        cur = best.get(key)
        if cur is None or center_dist[i] < cur[0]:
            best[key] = (float(center_dist[i]), i)

    grouped: dict[int, list[Observation]] = {}
    for (bin_id, _view), (_d, i) in best.items():
        grouped.setdefault(bin_id, []).append(flat[i])

    tracks = []
    for bin_id in sorted(grouped):
        obs = sorted(grouped[bin_id], key=lambda o: o.view_id)
        if len(obs) >= 2:
            tracks.append(Track(bin_id=bin_id, observations=obs))
    return tracks


def shared_tracks(a: int, b: int, tracks) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Correspondence pairs between two views, ordered by bin id."""
    pairs = []
    for track in tracks:
        pa = pb = None
        for obs in track.observations:
            if obs.view_id == a:
                pa = obs.pixel
            elif obs.view_id == b:
                pb = obs.pixel
        if pa is not None and pb is not None:
            pairs.append((pa, pb, track.bin_id))
    pairs.sort(key=lambda t: t[2])
    return pairs


class TrackIndex:
    """Mutable view/bin index over a track list.

    Supports the online phase: newly rendered views are quantized with
    the frozen dictionary and folded into existing tracks only (a bin
    never gains a track after the offline build).
    """

    def __init__(self, tracks: list[Track], dictionary: VisualDictionary):
        self.dictionary = dictionary
        self.tracks: dict[int, Track] = {t.bin_id: t for t in tracks}
        self.bins_of_view: dict[int, set[int]] = {}
        self._pixel: dict[tuple[int, int], np.ndarray] = {}
        self._dist: dict[tuple[int, int], float] = {}
        for t in tracks:
            for obs in t.observations:
                self._admit(t, obs)

    def _admit(self, track: Track, obs: Observation):
        self.bins_of_view.setdefault(obs.view_id, set()).add(track.bin_id)
        self._pixel[(track.bin_id, obs.view_id)] = obs.pixel
        self._dist[(track.bin_id, obs.view_id)] = float(
            np.linalg.norm(
                np.asarray(obs.descriptor, dtype=np.float64)
                - self.dictionary.leaf_centers[track.bin_id]
            )
        )

    def register_view(self, observations) -> int:
        """Quantize a new view's observations into existing tracks.
        Returns the number of observations admitted."""
        admitted = 0
        for obs in observations:
            bin_id = quantize(self.dictionary, obs.descriptor)
            track = self.tracks.get(bin_id)
            if track is None:
                continue
            dist = float(
                np.linalg.norm(
                    np.asarray(obs.descriptor, dtype=np.float64)
                    - self.dictionary.leaf_centers[bin_id]
                )
            )
            key = (bin_id, obs.view_id)
            if key in self._pixel and self._dist[key] <= dist:
                continue
            track.observations = [
                o for o in track.observations if o.view_id != obs.view_id
            ] + [obs]
            self._pixel[key] = obs.pixel
            self._dist[key] = dist
            self.bins_of_view.setdefault(obs.view_id, set()).add(bin_id)
            admitted += 1
        return admitted

    def pixel(self, bin_id: int, view_id: int) -> np.ndarray | None:
        return self._pixel.get((bin_id, view_id))

    def views_of_bin(self, bin_id: int) -> list[int]:
        track = self.tracks.get(bin_id)
        if track is None:
            return []
        return [o.view_id for o in track.observations]

    def shared_count(self, a: int, b: int) -> int:
        sa = self.bins_of_view.get(a, set())
        sb = self.bins_of_view.get(b, set())
        return len(sa & sb)

    def shared_pairs(self, a: int, b: int) -> list[tuple[np.ndarray, np.ndarray, int]]:
        common = sorted(self.bins_of_view.get(a, set()) & self.bins_of_view.get(b, set()))
        return [(self._pixel[(m, a)], self._pixel[(m, b)], m) for m in common]

    def track_list(self) -> list[Track]:
        return [self.tracks[b] for b in sorted(self.tracks)]


def dump_tracks(tracks, fp) -> None:
    """One JSON object per line: {"bin": id, "obs": [{"view", "x", "y"}]}."""
    for t in tracks:
        rec = {
            "bin": t.bin_id,
            "obs": [
                {"view": o.view_id, "x": float(o.pixel[0]), "y": float(o.pixel[1])}
                for o in t.observations
            ],
        }
        fp.write(json.dumps(rec) + "\n")


def load_tracks(fp) -> list[Track]:
    """Inverse of `dump_tracks`; descriptors are not round-tripped."""
    tracks = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        obs = [
            Observation(
                view_id=int(o["view"]),
                pixel=np.array([o["x"], o["y"]], dtype=np.float64),
                descriptor=np.zeros(0),
            )
            for o in rec["obs"]
        ]
        tracks.append(Track(bin_id=int(rec["bin"]), observations=obs))
    return tracks
