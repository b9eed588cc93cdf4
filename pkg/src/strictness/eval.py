"""The evaluators under their short name; see strictness.evaluation."""

from strictness.evaluation import *  # noqa: F401,F403
from strictness.evaluation import __all__  # noqa: F401
