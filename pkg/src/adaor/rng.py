"""Seeded random streams.

Every random draw in the package comes from a numpy PCG64 generator built
here from an explicit integer seed plus a string key, so independent
subsystems (data sampling, noise, mixing, initial noise) get decorrelated
but fully reproducible streams.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: object) -> np.random.Generator:
    """PCG64 generator for (seed, *key); identical arguments give identical streams."""
    material = [int(seed)]
    for part in key:
        if isinstance(part, str):
            material.extend(part.encode("utf-8"))
        else:
            material.append(int(part))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(material)))
