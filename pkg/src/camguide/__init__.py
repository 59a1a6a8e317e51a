"""camguide: rotation-only camera guidance over synthetic multi-view scenes.

The pipeline locates a destination scene point in the guided camera's
image plane by intersecting epipolar lines from a small support set of
auxiliary views, and plans multi-step rotations over a pair of global
spatial orderings of feature bins aggregated from all views.
"""

from camguide.kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
