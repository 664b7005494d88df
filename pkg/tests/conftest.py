"""Shared fixtures; the expensive ladder decompositions are computed
once per session and reused by the scaling and structure tests."""

import numpy as np
import pytest

from pxqsim import fermion, spectral

LADDER_SIZES = (40, 60, 80, 100, 120)
LADDER_G = 1.5
LADDER_WINDOW = 60
LADDER_DISORDER = 1e-4


@pytest.fixture(scope="session")
def ladder_h2g_cache():
    """Mid-window data for the coupled ladder on the h = 2g line.

    Maps chain length to ``(mean_ipr, support_sizes)`` where the
    support sizes (90% weight) cover the whole window, sorted.
    """
    out = {}
    for n in LADDER_SIZES:
        model = fermion.coupled_chain_model(
            n, 1.0, 2.0 * LADDER_G, LADDER_G, LADDER_DISORDER, seed=0
        )
        dec = spectral.diagonalize(model, window_size=LADDER_WINDOW)
        report = spectral.mean_ipr_window(dec, LADDER_WINDOW)
        supports = sorted(
            spectral.support_size(dec.vectors[:, k]) for k in range(LADDER_WINDOW)
        )
        out[n] = (report.mean, supports)
    return out
