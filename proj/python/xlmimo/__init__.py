"""Python bindings for the xlmimo XL-MIMO scheduling library."""

from ._xlmimo import *  # noqa: F401,F403
from ._xlmimo import __doc__  # noqa: F401
