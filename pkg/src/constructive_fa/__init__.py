"""Constructive functional analysis on finite data.

Counting-measure and grid function spaces, operator families with
certified norm lower bounds, the gliding-hump divergence construction,
finite selectors driven by analytic witnesses, and certified subsequence
extraction in ``C(K)`` and ``L^p``.
"""

from .errors import *  # noqa: F401,F403
from .extraction import *  # noqa: F401,F403
from .hump import *  # noqa: F401,F403
from .mollify import *  # noqa: F401,F403
from .operators import *  # noqa: F401,F403
from .selection import *  # noqa: F401,F403
from .spaces import *  # noqa: F401,F403

__version__ = "0.1.0"
