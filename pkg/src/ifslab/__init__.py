"""Chaos-game laboratory for iterated function systems on the plane and the Riemann sphere."""

from .errors import BudgetExceeded, InvalidInput, OrbitEscape
from .hyperspace import INF, PointCloud, hausdorff, prune
from .ifs_core import Affine2D, Ifs, Mobius, iterate_hutchinson, mobius_pair, sierpinski
from .chaosgame import run_orbit, rapunzel_experiment

__version__ = "0.1.0"
