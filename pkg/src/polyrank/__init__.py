"""Tools for one-vertex triangle complexes whose links are the ample
16-vertex trivalent graph: link graphs, classification, homology, universal
cover development, rings, strips, flats and mesoscopic counts."""

__version__ = "0.1.0"

from .complexes import Presentation, PresentationError, parse_presentation, preset  # noqa: E402
from .cover import CoverBall, develop_ball  # noqa: E402
from .linkgraph import BudgetExceeded, LinkGraph  # noqa: E402

__all__ = [
    "__version__", "BudgetExceeded", "CoverBall", "LinkGraph", "Presentation",
    "PresentationError", "develop_ball", "parse_presentation", "preset",
]
