"""Camera-to-LiDAR geometric matching toolkit.

Python surface over the C++ core: LiDAR-map projection with occlusion
filtering, flow-based correspondence generation, robust PnP with iterative
refinement, calibration metrics, extrinsic aggregation and dataset IO.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
