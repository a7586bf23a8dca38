#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import numpy as np

STREAM_IDS = {
    "init": 0,
    "noise": 1,
    "mc": 2,
    "shift": 3,
    "target": 4,
    "field": 5,
    "corpus": 6,
}


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Returns an independent generator for the named stream.

    Components never share generators: each derives its own from the global seed, the stream name and an optional
    tuple of indices (restart number, grid point, ...), so that any of them can be re-seeded in isolation.

    >>> stream(7, "noise").random() == stream(7, "noise").random()
    True
    >>> stream(7, "noise").random() == stream(7, "init").random()
    False
    """
    try:
        stream_id = STREAM_IDS[name]
    except KeyError as exc:
        msg = f"Unknown random stream '{name}'"
        raise ValueError(msg) from exc
    return np.random.default_rng([seed, stream_id, *extra])
