"""Disk cache for strata: enumerations and echelon presentations.

Cache files are JSON, one per (kind, signature, degree, relation-sign,
code-version) key; rationals are stored as ``p/q`` strings, diagrams in
their text serialization.  Writes go through a temp file and ``os.replace``
so concurrent writers never expose a torn file.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

#: Bumped whenever enumeration order, canonical forms, or relation
#: generation change; stale cache entries are simply never looked up again.
CODE_VERSION = "1"

_ENV_VAR = "JDCALC_CACHE_DIR"
_override = None


def set_cache_dir(path):
    """Set the cache directory (CLI ``--cache-dir``); None restores the
    default resolution order."""
    global _override
    _override = path


def cache_dir():
    if _override is not None:
        return _override
    return os.environ.get(_ENV_VAR, os.path.join(os.getcwd(),
                                                 ".jdcalc-cache"))


def _path_for(key):
    text = "|".join(str(k) for k in key)
    digest = hashlib.sha256(text.encode()).hexdigest()[:20]
    safe = "".join(ch if ch.isalnum() or ch in "@*.-" else "_"
                   for ch in text)[:60]
    return os.path.join(cache_dir(), "%s-%s.json" % (safe, digest))


def load(key):
    path = _path_for(key)
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except (OSError, ValueError):
        return None


def store(key, payload):
    path = _path_for(key)
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path),
                                   suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh)
        os.replace(tmp, path)
    except OSError:
        pass  # caching is best-effort; results are recomputed when missing
