"""Non-uniform loss model and the similarity / post-selection metrics.

Loss enters through two components: the delay fiber (efficiency eta_f per
loop length of fiber) and the coupling switch (eta_s per traversal). A path
from input bin i to output bin j rides the loop j - i + 1 times, so loss is
skewed across the matrix instead of being a global factor, and cannot be
post-selected away. The skew factorizes as an element-wise loss matrix, so
the lossy map is always the lossless map times that matrix entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import SwitchingSequence, TransferMatrix, compose_loops, random_sequence, single_loop_map
from .seeding import trial_rng


@dataclass(frozen=True)
class LossParams:
    """Component efficiencies, both in [0, 1]."""

    eta_fiber: float = 1.0
    eta_switch: float = 1.0

    def __post_init__(self) -> None:
        for name, value in (("eta_fiber", self.eta_fiber), ("eta_switch", self.eta_switch)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    @property
    def eta(self) -> float:
        """Per-traversal efficiency: one fiber length and one switch pass."""
        return self.eta_fiber * self.eta_switch

    @property
    def lossless(self) -> bool:
        return self.eta_fiber == 1.0 and self.eta_switch == 1.0


@dataclass(frozen=True)
class LossMatrix:
    """Element-wise loss factors accumulated over `loops` passes.

    entry[i, j] = eta_s^L * eta^(L + j - i). Entries on a common diagonal
    (fixed j - i) are equal, and the diagonal-to-diagonal skew ratio is
    independent of L: more loops lose more light overall but do not change
    the shape of the bias. Entries below the reachable band (i - j > L) are
    formal values > 1 that get masked by the zeros of the composed map.
    """

    m: int
    loops: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.entries, dtype=np.float64)
        if a.shape != (self.m, self.m):
            raise ValueError(f"entries shape {a.shape} does not match m={self.m}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def entry(self, i: int, j: int) -> float:
        if not (1 <= i <= self.m and 1 <= j <= self.m):
            raise ValueError(f"indices ({i}, {j}) out of range 1..{self.m}")
        return float(self.entries[i - 1, j - 1])


def loss_matrix(m: int, loops: int, loss: LossParams) -> LossMatrix:
    """Loss-factor matrix for `loops` consecutive passes of the delay loop."""
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if loops < 1:
        raise ValueError(f"loop count must be >= 1, got {loops}")
    eta = loss.eta
    i = np.arange(1, m + 1)[:, None]
    j = np.arange(1, m + 1)[None, :]
    entries = loss.eta_switch**loops * eta ** (loops + j - i)
    return LossMatrix(m, loops, entries)


def lossy_single_loop_map(seq: SwitchingSequence, loss: LossParams) -> TransferMatrix:
    """Single-pass transfer matrix with per-path loss applied.

    The direct-reflection band picks up one switch factor; a path riding the
    loop from bin i to bin j picks up eta_s once plus eta^(j - i + 1), one
    per traversal. Equal, entry by entry, to the lossless map times
    loss_matrix(m, 1).
    """
    base = single_loop_map(seq)
    m = base.m
    eta_s, eta = loss.eta_switch, loss.eta
    v = np.array(base.entries)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i == j + 1:
                v[i - 1, j - 1] *= eta_s
            elif i < j + 1:
                v[i - 1, j - 1] *= eta_s * eta ** (j - i + 1)
    return TransferMatrix(m, v)


def outer_loop_prefactor(m: int, loops: int, loss: LossParams) -> float:
    """Uniform loss from the outer loop: m fiber lengths and two switches per
    round trip, loops - 1 round trips. A global scale, so it never skews the map."""
    return loss.eta_fiber ** (m * (loops - 1)) * loss.eta_switch ** (2 * (loops - 1))


def lossy_composed_map(
    seq: SwitchingSequence, loss: LossParams, include_outer: bool = True
) -> TransferMatrix:
    """Product of the per-pass lossy maps, optionally scaled by the outer-loop factor.

    Satisfies the telescoping identity: the product of lossy passes equals
    the product of lossless passes times loss_matrix(m, L) element-wise,
    because the per-pass skews compound along any path into a function of
    j - i only.
    """
    lossy = [lossy_single_loop_map(seq.loop(l), loss) for l in range(1, seq.passes + 1)]
    composed = compose_loops(lossy)
    if include_outer:
        scale = outer_loop_prefactor(seq.m, seq.passes, loss)
        return TransferMatrix(seq.m, scale * composed.entries)
    return composed


def similarity(u: TransferMatrix) -> float:
    """Closeness of the map's magnitudes to the uniform map, in (0, 1].

    S = (1/m^2) (sum |U_ij|)^2 / sum |U_ij|^2. Equals 1 exactly when all
    entry magnitudes are equal (Cauchy-Schwarz equality), and is invariant
    under global rescaling, so uniform loss does not affect it.
    """
    mags = np.abs(u.entries)
    sq = float((mags**2).sum())
    if sq == 0.0:
        raise ValueError("similarity is undefined for an all-zero map")
    return float(mags.sum() ** 2 / (u.m**2 * sq))


def postselection_probability(u: TransferMatrix, occupancy: "list[int] | tuple[int, ...] | None" = None) -> float:
    """Probability that every input photon leaves through some output bin.

    For k_i photons in input bin i this is prod_i (sum_j |U_ij|^2)^{k_i}:
    each photon survives with its input row's total transmission. Equals 1
    for a unitary map. `occupancy` defaults to one photon per bin.
    """
    if occupancy is None:
        occupancy = [1] * u.m
    occupancy = list(occupancy)
    if len(occupancy) != u.m:
        raise ValueError(f"occupancy length {len(occupancy)} does not match m={u.m}")
    if any(k < 0 or k != int(k) for k in occupancy):
        raise ValueError("occupancy must be nonnegative integers")
    row_transmission = (np.abs(u.entries) ** 2).sum(axis=1)
    prob = 1.0
    for i, k in enumerate(occupancy):
        if k:
            prob *= row_transmission[i] ** int(k)
    return float(prob)


@dataclass(frozen=True)
class OptimizeResult:
    """Best-of-N random search outcome for the similarity metric."""

    sequence: SwitchingSequence
    s_best: float
    s_mean: float
    p_s_best: float
    iterations: int


def optimize_similarity(
    m: int,
    loops: int,
    loss: LossParams,
    iterations: int,
    seed: int,
    include_outer: bool = True,
    occupancy: "list[int] | None" = None,
) -> OptimizeResult:
    """Monte-Carlo search for the switching program closest to the uniform map.

    Draws `iterations` random programs, scores the lossy composed map of
    each, and returns the argmax of the similarity together with the
    post-selection probability of that same program (the two metrics are
    always reported as a pair). Trial i draws from an independent stream
    keyed by (seed, i), so the result is identical under any evaluation
    order and sequences are shared across runs with the same seed,
    whatever the loss parameters.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    s_values = np.empty(iterations)
    best_idx = -1
    best_s = -1.0
    best_seq: SwitchingSequence | None = None
    best_map: TransferMatrix | None = None
    for i in range(iterations):
        seq = random_sequence(m, loops, trial_rng(seed, i))
        u = lossy_composed_map(seq, loss, include_outer=include_outer)
        s = similarity(u)
        s_values[i] = s
        if s > best_s:
            best_idx, best_s, best_seq, best_map = i, s, seq, u
    assert best_seq is not None and best_map is not None
    return OptimizeResult(
        sequence=best_seq,
        s_best=float(best_s),
        s_mean=float(s_values.mean()),
        p_s_best=postselection_probability(best_map, occupancy),
        iterations=iterations,
    )
