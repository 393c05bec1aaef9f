"""UbuntuWorld: a simulated Ubuntu terminal with planning, Q-learning and
Ask Ubuntu retrieval."""

import os as _os

_here = _os.path.dirname(__file__)
if _os.path.isdir(_os.path.join(_here, "data")):
    _os.environ.setdefault("UBUNTUWORLD_DATA_DIR", _os.path.join(_here, "data"))

from ._core import *  # noqa: E402,F401,F403
from ._core import __doc__  # noqa: E402,F401
