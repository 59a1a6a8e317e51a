"""Hand-constructed scenes for the failure-mode and multi-step protocols.

Both constructors return ``(scene, initial_view, destination_view)`` and
are deterministic per seed.
"""

from __future__ import annotations

import math

import numpy as np

from camguide.simulator.scene import (
    CAMERA_BAND_DEPTH,
    CAMERA_BAND_HALF_WIDTH,
    NoiseModel,
    Scene,
    ScenePoint,
    camera_azimuth,
    make_camera,
)

_GAP_TAG = 0x6A9
_ARC_TAG = 0xA2C


def _band_points(rng, n, az_lo_deg, az_hi_deg, seed, id_offset=0):
    phi = np.radians(rng.uniform(az_lo_deg, az_hi_deg, size=n))
    rho = rng.uniform(8.0, 12.0, size=n)
    height = rng.uniform(-2.5, 2.5, size=n)
    return [
        ScenePoint(
            id=id_offset + i,
            position=np.array(
                [rho[i] * math.sin(phi[i]), height[i], rho[i] * math.cos(phi[i])]
            ),
            descriptor_seed=(seed << 20) + id_offset + i,
        )
        for i in range(n)
    ]


def _band_center(rng):
    return (
        rng.uniform(-CAMERA_BAND_HALF_WIDTH, CAMERA_BAND_HALF_WIDTH),
        rng.uniform(-0.3, 0.3),
        -rng.uniform(0.0, CAMERA_BAND_DEPTH),
    )


def _aim_point(rng, az_lo_deg, az_hi_deg):
    phi = math.radians(rng.uniform(az_lo_deg, az_hi_deg))
    return (10.0 * math.sin(phi), rng.uniform(-1.0, 1.0), 10.0 * math.cos(phi))


def gap_scene(seed: int, noise: NoiseModel | None = None) -> tuple[Scene, int, int]:
    """Two angularly disjoint point clusters whose viewer groups never
    co-observe: guidance from one cluster toward the other must end in a
    no-overlap failure."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _GAP_TAG]))
    points = _band_points(rng, 160, -70.0, -25.0, seed) + _band_points(
        rng, 160, 25.0, 70.0, seed, id_offset=160
    )
    cameras = []
    for j in range(25):
        cameras.append(make_camera(j, _band_center(rng), _aim_point(rng, -60.0, -35.0), 60.0, (1280, 720)))
    for j in range(25, 50):
        cameras.append(make_camera(j, _band_center(rng), _aim_point(rng, 35.0, 60.0), 60.0, (1280, 720)))
    scene = Scene(
        points=points,
        cameras=cameras,
        noise=noise or NoiseModel(seed=seed),
        seed=seed,
    )
    initial = min(cameras[:25], key=camera_azimuth).id
    destination = max(cameras[25:], key=camera_azimuth).id
    return scene, initial, destination


def arc_scene(seed: int, noise: NoiseModel | None = None) -> tuple[Scene, int, int]:
    """A 150-degree band with full camera coverage; initial and
    destination aims are ~140 degrees apart, forcing a chain of
    intermediate views (a single rotation cannot be supported)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _ARC_TAG]))
    points = _band_points(rng, 420, -75.0, 75.0, seed)
    cameras = [
        make_camera(j, _band_center(rng), _aim_point(rng, -72.0, 72.0), 60.0, (1280, 720))
        for j in range(60)
    ]
    # pin the endpoints so the pair is always ~140 degrees apart
    cameras[58] = make_camera(58, (0.0, 0.0, -1.0), _aim_point(rng, -71.0, -69.0), 60.0, (1280, 720))
    cameras[59] = make_camera(59, (0.0, 0.0, -1.0), _aim_point(rng, 69.0, 71.0), 60.0, (1280, 720))
    scene = Scene(
        points=points,
        cameras=cameras,
        noise=noise or NoiseModel(seed=seed),
        seed=seed,
    )
    return scene, 58, 59
