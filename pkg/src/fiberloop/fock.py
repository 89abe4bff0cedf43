"""Brute-force multi-photon simulator used to validate the other modules.

Exact Fock-space amplitudes on small instances: transition amplitudes are
permanents of row/column-repeated submatrices, and sub-unitary maps are
handled by embedding them in a larger unitary with one ancilla (loss) mode
per real mode. This is a test fixture, not a performance path; caps keep
everything at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial, prod, sqrt

import numpy as np

from .network import TransferMatrix
from .permanent import permanent

BASIS_SIZE_CAP = 100_000
CONTRACTION_TOL = 1e-9


@dataclass(frozen=True)
class FockBasis:
    """All occupation vectors of n photons over m modes, in a fixed order."""

    m: int
    n: int
    states: tuple[tuple[int, ...], ...]


def enumerate_basis(m: int, n: int, cap: int = BASIS_SIZE_CAP) -> FockBasis:
    """Enumerate occupations of n photons in m modes, most-populated-first.

    The order is descending lexicographic, e.g. (2,0), (1,1), (0,2); the
    count is C(m+n-1, n) and must not exceed `cap`.
    """
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"photon count must be >= 0, got {n}")
    size = comb(m + n - 1, n)
    if size > cap:
        raise ValueError(f"basis size {size} exceeds cap {cap}")

    states: list[tuple[int, ...]] = []

    def fill(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            states.append(tuple(prefix + [remaining]))
            return
        for k in range(remaining, -1, -1):
            fill(prefix + [k], remaining - k, slots - 1)

    fill([], n, m)
    assert len(states) == size
    return FockBasis(m, n, tuple(states))


def _mode_indices(occupancy: "tuple[int, ...] | list[int]") -> list[int]:
    """Flatten an occupation vector into one mode index per photon."""
    out: list[int] = []
    for mode, k in enumerate(occupancy):
        out.extend([mode] * int(k))
    return out


def output_amplitude(
    u: TransferMatrix, in_occ: "list[int] | tuple[int, ...]", out_occ: "list[int] | tuple[int, ...]"
) -> complex:
    """Amplitude for photons entering `in_occ` to be detected as `out_occ`.

    perm(U[rows repeated by in_occ, cols repeated by out_occ]) normalized by
    sqrt(prod in_i! prod out_j!). Exact for any linear (also sub-unitary) map.
    """
    in_occ, out_occ = list(in_occ), list(out_occ)
    if len(in_occ) != u.m or len(out_occ) != u.m:
        raise ValueError("occupation length does not match the map dimension")
    if sum(in_occ) != sum(out_occ):
        raise ValueError(f"photon numbers differ: {sum(in_occ)} in, {sum(out_occ)} out")
    rows = _mode_indices(in_occ)
    cols = _mode_indices(out_occ)
    if not rows:
        return complex(1.0)
    sub = u.entries[np.ix_(rows, cols)]
    norm = sqrt(prod(factorial(int(k)) for k in in_occ) * prod(factorial(int(k)) for k in out_occ))
    return complex(permanent(sub) / norm)


def loss_dilation(u: TransferMatrix) -> TransferMatrix:
    """Embed a contractive m x m map in a unitary on 2m modes.

    The first m modes are the real outputs, the last m are loss modes, one
    per singular direction; the off-diagonal blocks carry sqrt(1 - s^2)
    coupling into them. Rejects maps with a singular value above 1 + 1e-9.
    """
    a = u.entries
    m = u.m
    w, s, vh = np.linalg.svd(a)
    if s.max(initial=0.0) > 1.0 + CONTRACTION_TOL:
        raise ValueError(f"map is not contractive: max singular value {s.max():.6g}")
    defect = np.sqrt(np.clip(1.0 - s**2, 0.0, None))
    upper_right = w @ np.diag(defect) @ w.conj().T      # sqrt(I - A A^dag)
    lower_left = vh.conj().T @ np.diag(defect) @ vh     # sqrt(I - A^dag A)
    big = np.block([[a, upper_right], [lower_left, -a.conj().T]])
    out = TransferMatrix(2 * m, big)
    if not out.is_unitary(tol=1e-10):
        raise ValueError(f"dilation failed unitarity check (defect {out.unitarity_defect():.3e})")
    return out


def postselection_oracle(u: TransferMatrix, in_occ: "list[int] | tuple[int, ...]") -> float:
    """All-photons-detected probability via unitary embedding of the lossy map.

    Each photon couples to the loss modes independently of the others, so the
    device-level survival probability is the product, over photons, of the
    single-photon probability of ending in a real output. Each single-photon
    factor is computed by evolving one photon through the dilated unitary and
    summing the probabilities of every outcome with zero photons in the loss
    modes.
    """
    in_occ = list(in_occ)
    if len(in_occ) != u.m:
        raise ValueError("occupation length does not match the map dimension")
    big = loss_dilation(u)
    wide = 2 * u.m
    prob = 1.0
    for mode, k in enumerate(in_occ):
        if not k:
            continue
        single_in = [0] * wide
        single_in[mode] = 1
        survive = 0.0
        for j in range(u.m):  # outcomes with the photon in a real mode only
            single_out = [0] * wide
            single_out[j] = 1
            survive += abs(output_amplitude(big, single_in, single_out)) ** 2
        prob *= survive ** int(k)
    return float(prob)
