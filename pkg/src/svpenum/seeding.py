"""Deterministic per-phase random streams.

One user-facing seed expands into independent phase streams via
``SeedSequence([seed, phase])``, so sampling and solving can be reproduced
in isolation. Concurrent workers must derive their own streams by mixing a
worker index the same way.
"""

from __future__ import annotations

import numpy as np

PHASE_REDUCE = 0
PHASE_SAMPLE = 1
PHASE_SOLVE = 2


def phase_rng(seed: int, phase: int) -> np.random.Generator:
    """Generator for one phase of a run: ``default_rng(SeedSequence([seed, phase]))``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(phase)]))
