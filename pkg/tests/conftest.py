import numpy as np
import pytest

from camguide.correspondence import Observation, Track, TrackIndex, VisualDictionary
from camguide.simulator import make_camera, oracle_projection


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_rig(n_points=60, seed=0, n_cams=4, spread=6.0):
    """Deterministic point cloud plus cameras on one side, all seeing
    most of it.  Ground truth comes from `oracle_projection`."""
    r = np.random.default_rng(seed)
    pts = np.column_stack(
        [
            r.uniform(-4.0, 4.0, n_points),
            r.uniform(-2.0, 2.0, n_points),
            r.uniform(9.0, 12.0, n_points),
        ]
    )
    cams = []
    for i in range(n_cams):
        cx = -spread / 2 + spread * i / max(n_cams - 1, 1)
        cams.append(make_camera(i, (cx, r.uniform(-0.2, 0.2), -1.0), (0.0, 0.0, 10.0), 60.0, (1280, 720)))
    return pts, cams


@pytest.fixture
def rig():
    return make_rig()


class _PointLike:
    def __init__(self, position):
        self.position = np.asarray(position, dtype=np.float64)


def project(cam, xyz):
    """Oracle pixel of a bare 3-vector (may be outside the image)."""
    return oracle_projection(cam, _PointLike(xyz))


def fake_track_index(specs, dim=4):
    """TrackIndex from {(bin_id): [(view_id, (x, y)), ...]} specs; all
    descriptors collapse onto one leaf center per bin."""
    n_bins = max(specs) + 1
    dictionary = VisualDictionary(
        root=0, leaf_centers=np.zeros((n_bins, dim)), dim=dim
    )
    tracks = []
    for bin_id, obs in sorted(specs.items()):
        tracks.append(
            Track(
                bin_id=bin_id,
                observations=[
                    Observation(
                        view_id=v,
                        pixel=np.asarray(p, dtype=np.float64),
                        descriptor=np.zeros(dim),
                    )
                    for v, p in obs
                ],
            )
        )
    return TrackIndex(tracks, dictionary)
