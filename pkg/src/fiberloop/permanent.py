"""Matrix permanent kernels.

The permanent is the bosonic analogue of the determinant (no sign
alternation) and is what multi-photon transition amplitudes reduce to.
Two routes are provided: a fast inclusion-exclusion method used everywhere,
and a naive permutation expansion kept as its independent oracle.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

DEFAULT_SIZE_CAP = 12


def _checked(matrix: np.ndarray, max_n: int) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent requires a square matrix, got shape {a.shape}")
    if a.shape[0] > max_n:
        raise ValueError(f"matrix size {a.shape[0]} exceeds cap {max_n}")
    return a


def permanent(matrix: np.ndarray, max_n: int = DEFAULT_SIZE_CAP) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula, O(2^n n).

    perm(A) = (-1)^n sum over nonempty column subsets S of
    (-1)^|S| prod_i sum_{j in S} A[i, j].
    """
    a = _checked(matrix, max_n)
    n = a.shape[0]
    if n == 0:
        return complex(1.0)
    # Column-subset membership table, one row per nonempty subset.
    masks = np.arange(1, 1 << n, dtype=np.uint32)
    member = (masks[:, None] >> np.arange(n, dtype=np.uint32)) & 1
    row_sums = member.astype(np.complex128) @ a.T  # [subset, i] = sum_{j in S} A[i, j]
    products = row_sums.prod(axis=1)
    sizes = member.sum(axis=1)
    signs = np.where(sizes % 2 == 0, 1.0, -1.0)
    total = (signs * products).sum()
    if n % 2 == 1:
        total = -total
    return complex(total)


def permanent_naive(matrix: np.ndarray, max_n: int = DEFAULT_SIZE_CAP) -> complex:
    """Permanent by direct sum over all n! permutations.

    Exponentially slower than `permanent`; exists so the fast path can be
    checked against an independent formulation on small matrices.
    """
    a = _checked(matrix, max_n)
    n = a.shape[0]
    if n == 0:
        return complex(1.0)
    rows = range(n)
    total = 0.0 + 0.0j
    for perm in permutations(range(n)):
        term = 1.0 + 0.0j
        for i in rows:
            term *= a[i, perm[i]]
        total += term
    return complex(total)
