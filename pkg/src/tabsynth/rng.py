"""Seeded, splittable random streams shared by every stochastic stage.

All randomness in the package flows through named substreams derived from a
single 64-bit master seed.  A substream is identified by a *stream domain*
(one of the ``STREAM_*`` constants below) plus integer path components, e.g.
``(STREAM_GENERATE, attribute_index, block_index)``.  Two runs with the same
seed therefore produce identical output regardless of evaluation order or
thread schedule, because each unit of work owns its own stream.

The generator is PCG64 keyed through ``numpy.random.SeedSequence`` with the
path as ``spawn_key``; both are stable, documented constructions.  Laplace
and uniform draws are produced by explicit inverse-CDF formulas on top of
``Generator.random()`` so the byte-level output depends only on the PCG64
bit stream, not on library-internal sampler choices.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream domains.  Values are part of the stable output format: changing them
# changes every seeded artifact.
STREAM_DESCRIBE = 1   # per-attribute description noise
STREAM_STRUCTURE = 2  # network root choice and per-step score noise
STREAM_CPT = 3        # per-node conditional-table noise
STREAM_GENERATE = 4   # per (attribute, block) value synthesis
STREAM_MISSING = 5    # per (attribute, block) missing-cell mask
STREAM_CORRELATED = 6 # per (node, block) bin selection in correlated mode
STREAM_LINKER = 7     # linked-id assignment and row shuffles
STREAM_PROBE = 8      # pathology injection and cluster synthesis

#: Rows per generation block.  Fixed: part of the seeded output format.
BLOCK_ROWS = 1024


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the PCG64 generator for ``(seed, path)``.

    ``seed`` is reduced modulo 2**64 so negative seeds are accepted.
    """
    seq = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed for handing to an independent pipeline stage."""
    seq = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=tuple(path))
    lo, hi = seq.generate_state(2)
    return (int(hi) << 32) | int(lo)


def laplace(rng: np.random.Generator, scale: float, size: int | tuple[int, ...] = 1) -> np.ndarray:
    """Draw Laplace(0, scale) variates by inverse CDF.

    x = -scale * sign(u - 1/2) * ln(1 - 2|u - 1/2|) with u uniform on [0, 1).
    The |u - 1/2| term is clipped just below 1/2 to keep the log finite.
    """
    u = rng.random(size) - 0.5
    mag = np.minimum(np.abs(u), 0.5 - 2.0 ** -53)
    return -scale * np.sign(u) * np.log1p(-2.0 * mag)


def choice_index(rng: np.random.Generator, probabilities: np.ndarray, size: int) -> np.ndarray:
    """Sample ``size`` indices from a probability vector by inverse CDF.

    Zero-probability bins are unreachable (searchsorted with side='right'
    skips zero-width CDF steps).
    """
    cdf = np.cumsum(np.asarray(probabilities, dtype=float))
    cdf[-1] = 1.0
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def uniform_int(rng: np.random.Generator, low: int, high: int, size: int) -> np.ndarray:
    """Uniform integers on the closed range [low, high] from uniform doubles."""
    if high < low:
        raise ValueError(f"empty integer range [{low}, {high}]")
    span = high - low + 1
    return low + np.minimum((rng.random(size) * span).astype(np.int64), span - 1)


def block_count(rows: int) -> int:
    """Number of generation blocks needed for ``rows`` output rows."""
    return max(0, (rows + BLOCK_ROWS - 1) // BLOCK_ROWS)


def block_bounds(block: int, rows: int) -> tuple[int, int]:
    """Half-open row range [start, stop) covered by ``block``."""
    start = block * BLOCK_ROWS
    return start, min(start + BLOCK_ROWS, rows)
