from fbmctrl._core import *  # noqa: F401,F403
from fbmctrl._core import __version__  # noqa: F401
