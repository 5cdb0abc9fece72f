"""Charge-basis tomography simulator (Python bindings)."""

import json

try:
    from ._cbtomo import *  # noqa: F401,F403
    from . import _cbtomo as _ext
except ImportError:  # in-tree build: the extension sits next to the package
    from _cbtomo import *  # noqa: F401,F403
    import _cbtomo as _ext

__version__ = _ext.__version__


def run_preset(name, out, threads=0):
    """Run a built-in preset and return the manifest as a dict."""
    return json.loads(_ext.run_config(_ext.preset_yaml(name), str(out), threads))
