"""Probing harness for tweet representations.

Builds the eight elementary property prediction tasks from an annotated
corpus, trains frozen-representation softmax probes, and runs the task
accuracy, tweet-length, and word-order analyses.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
