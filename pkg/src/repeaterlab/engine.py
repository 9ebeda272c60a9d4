"""Selects the simulation core backend at import time.

The hot loop lives in ``repeaterlab._engine_impl``, which setup.py compiles
to a C extension with Cython.  When the extension is absent (or the
``REPEATERLAB_PURE`` environment variable is set) the interpreted source of
the same module is used instead, with identical behaviour.
"""

import importlib.util
import os
import pathlib


def load_pure_impl(name="repeaterlab._engine_impl_pure"):
    """Load the interpreted implementation regardless of the compiled one.

    Used by the fallback path and by the backend benchmark.
    """
    path = pathlib.Path(__file__).with_name("_engine_impl.py")
    spec = importlib.util.spec_from_file_location(name, path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


if os.environ.get("REPEATERLAB_PURE"):
    _impl = load_pure_impl()
else:
    from . import _engine_impl as _impl

BACKEND = "pure" if _impl.__file__.endswith(".py") else "compiled"

PS_PER_S = _impl.PS_PER_S
TIME_LIMIT = _impl.TIME_LIMIT
splitmix64 = _impl.splitmix64
fork_seed = _impl.fork_seed
fork_rng = _impl.fork_rng
bsm_draw = _impl.bsm_draw
Event = _impl.Event
Timeline = _impl.Timeline
Memory = _impl.Memory
Pair = _impl.Pair
ChainParams = _impl.ChainParams
ChainRuntime = _impl.ChainRuntime
