"""Small shared helpers."""

from __future__ import annotations

import functools
import gc


def gc_paused(fn):
    """Run ``fn`` with the cyclic garbage collector off.

    Building covers allocates hundreds of thousands of small tuples, and
    repeated generation-2 sweeps over them dominate the runtime otherwise.
    """

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        was = gc.isenabled()
        gc.disable()
        try:
            return fn(*args, **kwargs)
        finally:
            if was:
                gc.enable()

    return wrapper
