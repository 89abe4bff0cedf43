"""Temporal-mode model: loop-length error, source jitter, and output fidelity.

Photons are Gaussian wave packets riding time bins. Three regions matter:
pulses still arriving from the source, pulses inside the delay loop, and
pulses that have exited toward the detector. Each loop traversal takes one
bin period plus a length error `delta`, so every traversal displaces the
packet by `delta` inside its bin; source jitter displaces whole input
pulses. Output states are superpositions of photon configurations, each a
multiset of (bin, shift) labels, and fidelity against the shift-free output
is the squared overlap, with same-bin packets overlapping by a Gaussian in
their shift difference and different bins not overlapping at all.

Only a single loop pass is modeled here, where all the interference
happens; by construction a shift is always the origin jitter plus delta
times the number of loop entries along the path.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from math import exp, factorial, prod, sqrt
from typing import NamedTuple

import numpy as np

from .network import SwitchingSequence, random_sequence, single_loop_map
from .permanent import permanent
from .seeding import trial_rng

SOURCE = "source"
LOOP = "loop"
EXITED = "exit"

RESIDUAL_TOL = 1e-12


class BinConfusionError(ValueError):
    """A temporal shift grew large enough to threaten hopping time bins."""


class PhotonLabel(NamedTuple):
    """One photon: its time bin, its in-bin temporal shift, and its region."""

    time_bin: int
    shift: float
    region: str = EXITED


Configuration = tuple[PhotonLabel, ...]


def canonical(labels) -> Configuration:
    """Order-free multiset key for a photon configuration."""
    return tuple(sorted(labels))


@dataclass(frozen=True)
class WavePacket:
    """Normalized Gaussian temporal density with width parameter `width`.

    density(x) = (width sqrt(pi))^(-1/2) exp(-x^2 / 2 width^2); the standard
    deviation of the density is width / sqrt(2).
    """

    width: float = 1.0

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError(f"width must be positive, got {self.width}")

    def density(self, x: np.ndarray | float) -> np.ndarray | float:
        return (self.width * np.sqrt(np.pi)) ** -0.5 * np.exp(-np.asarray(x) ** 2 / (2 * self.width**2))


@dataclass(frozen=True)
class MismatchParams:
    """Timing-error parameters, all in the same units as `width`.

    delta: signed loop length error per traversal. sigma: std. dev. of the
    source jitter. width: wave-packet width parameter. bin_spacing: time-bin
    period; shifts must stay below a tenth of it so bins never blur.
    """

    delta: float = 0.0
    sigma: float = 0.0
    width: float = 1.0
    bin_spacing: float = 100.0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.width <= 0:
            raise ValueError(f"width must be positive, got {self.width}")
        if self.bin_spacing <= 0:
            raise ValueError(f"bin_spacing must be positive, got {self.bin_spacing}")
        if abs(self.delta) >= self.shift_bound:
            raise BinConfusionError(
                f"|delta| = {abs(self.delta)} exceeds the bin-confusion bound {self.shift_bound}"
            )

    @property
    def shift_bound(self) -> float:
        return self.bin_spacing / 10.0

    def without_errors(self) -> "MismatchParams":
        """Same geometry with delta and sigma switched off (the ideal device)."""
        return replace(self, delta=0.0, sigma=0.0)


@dataclass(frozen=True)
class TemporalState:
    """Superposition over photon configurations of an m-bin pulse train.

    `configs` maps each canonical configuration to its amplitude. Amplitudes
    are taken with respect to normalized occupancy states, so a lossless
    evolution keeps the squared amplitudes summing to one.
    """

    m: int
    configs: dict[Configuration, complex]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"mode count must be >= 1, got {self.m}")
        for labels in self.configs:
            for lab in labels:
                if lab.region == EXITED:
                    ok = 1 <= lab.time_bin <= self.m
                else:
                    ok = 1 <= lab.time_bin <= self.m + 1
                if not ok:
                    raise ValueError(f"label {lab} outside the {self.m}-bin train")

    def norm_sq(self) -> float:
        return float(sum(abs(g) ** 2 for g in self.configs.values()))


def pulse_train_state(
    m: int,
    occupancy: "list[int] | tuple[int, ...]",
    shifts: "list[float] | None" = None,
) -> TemporalState:
    """Source state: occupancy[i-1] photons in bin i, optionally pre-shifted.

    Photons sharing a bin share one pulse and therefore one shift.
    """
    occupancy = list(occupancy)
    if len(occupancy) != m:
        raise ValueError(f"occupancy length {len(occupancy)} does not match m={m}")
    if any(k < 0 or k != int(k) for k in occupancy):
        raise ValueError("occupancy must be nonnegative integers")
    if shifts is None:
        shifts = [0.0] * m
    if len(shifts) != m:
        raise ValueError(f"shifts length {len(shifts)} does not match m={m}")
    labels = []
    for i, k in enumerate(occupancy, start=1):
        labels.extend([PhotonLabel(i, float(shifts[i - 1]), SOURCE)] * int(k))
    return TemporalState(m, {canonical(labels): 1.0 + 0.0j})


def gaussian_overlap(shift_a: float, shift_b: float, width: float) -> float:
    """Overlap of two same-bin wave packets displaced by shift_a and shift_b.

    exp(-(shift_a - shift_b)^2 / 4 width^2); callers must treat packets in
    different bins as having overlap zero.
    """
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    d = shift_a - shift_b
    return exp(-(d * d) / (4.0 * width * width))


def _multiplicity_norm(labels) -> float:
    """sqrt of the product of factorials of label multiplicities."""
    return sqrt(prod(factorial(k) for k in Counter(labels).values()))


# Internal evolution bookkeeping: each photon is (region, position, origin
# shift, loop entries so far). Keeping the origin shift and the entry count
# separate (instead of accumulating floats) makes physically equal shifts
# compare equal, so configurations that should interfere actually merge.
_Photon = tuple[str, int, float, int]


def evolve_pulse_train(
    seq: SwitchingSequence, state: TemporalState, params: MismatchParams
) -> TemporalState:
    """Push a source state through one loop pass with length error `delta`.

    At each beamsplitter time t the arriving source pulse splits between
    entering the loop (advancing one bin) and exiting directly one bin
    early, and the pulse arriving from inside the loop splits between
    another round trip and exiting; every branch that enters the loop is
    delayed by one more `delta`. Amplitudes of coinciding configurations
    merge with bosonic multiplicity factors.
    """
    if seq.passes != 1:
        raise ValueError(f"expected a single-pass sequence, got {seq.passes} passes")
    m = seq.m
    if state.m != m:
        raise ValueError(f"state has m={state.m}, sequence has m={m}")
    bound = params.shift_bound

    work: dict[tuple[_Photon, ...], complex] = defaultdict(complex)
    for labels, gamma in state.configs.items():
        photons = []
        for lab in labels:
            if lab.region != SOURCE:
                raise ValueError(f"input photons must be in the source region, found {lab}")
            if abs(lab.shift) >= bound:
                raise BinConfusionError(f"input shift {lab.shift} exceeds bound {bound}")
            photons.append((SOURCE, lab.time_bin, lab.shift, 0))
        work[tuple(sorted(photons))] += gamma / _multiplicity_norm(labels)

    for t in range(1, m + 2):
        setting = seq.setting(t)
        nxt: dict[tuple[_Photon, ...], complex] = defaultdict(complex)
        for photons, coeff in work.items():
            options = []
            for ph in photons:
                region, pos, origin, entries = ph
                if region == SOURCE and pos == t:
                    branches = [
                        (setting.u12, (LOOP, t + 1, origin, entries + 1)),
                        (setting.u11, (EXITED, t - 1, origin, entries)),
                    ]
                elif region == LOOP and pos == t:
                    branches = [
                        (setting.u22, (LOOP, t + 1, origin, entries + 1)),
                        (setting.u21, (EXITED, t - 1, origin, entries)),
                    ]
                else:
                    options.append([(1.0 + 0.0j, ph)])
                    continue
                options.append([(a, p) for a, p in branches if a != 0])
            for combo in itertools.product(*options):
                amp = coeff
                for a, _ in combo:
                    amp *= a
                if amp == 0:
                    continue
                nxt[tuple(sorted(p for _, p in combo))] += amp
        work = nxt

    merged: dict[Configuration, complex] = defaultdict(complex)
    for photons, coeff in work.items():
        # a boundary within tolerance of a swap can leave sub-tolerance
        # amplitude in the loop or on the nonexistent bin 0; drop it
        stranded = [ph for ph in photons if ph[0] != EXITED or not 1 <= ph[1] <= m]
        if stranded:
            if abs(coeff) > RESIDUAL_TOL:
                raise RuntimeError(f"photons stranded after the final boundary: {stranded}")
            continue
        labels = []
        for _, out_bin, origin, entries in photons:
            shift = origin + entries * params.delta
            if abs(shift) >= bound:
                raise BinConfusionError(f"output shift {shift} exceeds bound {bound}")
            labels.append(PhotonLabel(out_bin, shift, EXITED))
        merged[canonical(labels)] += coeff

    configs = {
        labels: coeff * _multiplicity_norm(labels)
        for labels, coeff in merged.items()
        if coeff != 0
    }
    return TemporalState(m, configs)


def apply_jitter(
    state: TemporalState,
    sigma: float,
    rng: np.random.Generator,
    max_shift: float = 10.0,
) -> tuple[TemporalState, int]:
    """Displace each occupied source pulse by one Gaussian draw of std `sigma`.

    Photons sharing a bin share the draw. Draws pushing any of the pulse's
    photons past `max_shift` are rejected and retaken; the count of
    rejections is returned alongside the shifted state.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    for labels in state.configs:
        for lab in labels:
            if lab.region != SOURCE:
                raise ValueError("jitter applies to source states only")
    if sigma == 0:
        return state, 0

    base_shift: dict[int, list[float]] = defaultdict(list)
    for labels in state.configs:
        for lab in labels:
            base_shift[lab.time_bin].append(lab.shift)

    rejections = 0
    draw: dict[int, float] = {}
    for bin_ in sorted(base_shift):
        while True:
            eps = rng.normal(0.0, sigma)
            if all(abs(s + eps) < max_shift for s in base_shift[bin_]):
                draw[bin_] = eps
                break
            rejections += 1

    configs = {
        canonical(
            PhotonLabel(lab.time_bin, lab.shift + draw[lab.time_bin], lab.region)
            for lab in labels
        ): gamma
        for labels, gamma in state.configs.items()
    }
    return TemporalState(state.m, configs), rejections


def _pair_overlap(bra: Configuration, ket: Configuration, width: float) -> float:
    """Overlap of two normalized photon configurations.

    Literal bosonic exchange sum: over every pairing (permutation) of the
    bra photons with the ket photons, the product of single-photon overlaps,
    with pairs in different bins contributing zero; then normalized by the
    multiplicity factorials of both sides.
    """
    n = len(bra)
    if n != len(ket):
        return 0.0
    if n == 0:
        return 1.0
    table = [
        [
            gaussian_overlap(b.shift, k.shift, width) if b.time_bin == k.time_bin else 0.0
            for k in ket
        ]
        for b in bra
    ]
    total = 0.0
    for sigma in itertools.permutations(range(n)):
        term = 1.0
        for p in range(n):
            term *= table[p][sigma[p]]
            if term == 0.0:
                break
        total += term
    return total / (_multiplicity_norm(bra) * _multiplicity_norm(ket))


def fidelity_expansion(ideal: TemporalState, actual: TemporalState, width: float) -> float:
    """Squared overlap of two output states by direct configuration pairing.

    Brute-force reference: every pair of configurations contributes its
    amplitude product times the exchange-symmetrized overlap. Pairs whose
    bin occupation patterns differ are skipped because every pairing then
    crosses bins and the overlap vanishes identically.
    """
    if ideal.m != actual.m:
        raise ValueError(f"mode counts differ: {ideal.m} vs {actual.m}")

    def pattern(labels: Configuration) -> tuple[int, ...]:
        return tuple(sorted(lab.time_bin for lab in labels))

    by_pattern: dict[tuple[int, ...], list[tuple[Configuration, complex]]] = defaultdict(list)
    for labels, gamma in ideal.configs.items():
        by_pattern[pattern(labels)].append((labels, gamma))

    total = 0.0 + 0.0j
    for labels_a, gamma_a in actual.configs.items():
        for labels_i, gamma_i in by_pattern.get(pattern(labels_a), ()):
            total += np.conj(gamma_i) * gamma_a * _pair_overlap(labels_i, labels_a, width)
    return float(abs(total) ** 2)


def _loop_entries(in_bin: int, out_bin: int) -> int:
    """Loop entries on the single-pass path from input bin to output bin."""
    return out_bin - in_bin + 1 if out_bin >= in_bin else 0


def fidelity_permanent(
    seq: SwitchingSequence,
    params: MismatchParams,
    occupancy: "list[int] | tuple[int, ...]",
    jitter_shifts: "list[float] | None" = None,
) -> float:
    """Fast-path fidelity: permanent of the single-photon overlap matrix.

    The overlap with the shift-free ideal factorizes photon by photon into
    M[p, q] = sum_j conj(V[p, j]) V[q, j] * overlap(0, shift of q's path to j),
    over the occupied inputs p, q; the fidelity is |perm(M)|^2 with repeated
    inputs handled by row repetition and the matching multiplicity factors.
    Must agree with `fidelity_expansion` wherever both apply.
    """
    v = single_loop_map(seq).entries
    m = seq.m
    occupancy = list(occupancy)
    if len(occupancy) != m:
        raise ValueError(f"occupancy length {len(occupancy)} does not match m={m}")
    if jitter_shifts is None:
        jitter_shifts = [0.0] * m
    if len(jitter_shifts) != m:
        raise ValueError(f"jitter_shifts length {len(jitter_shifts)} does not match m={m}")

    inputs = [i for i, k in enumerate(occupancy, start=1) for _ in range(int(k))]
    n = len(inputs)
    if n == 0:
        return 1.0

    shift = [
        [jitter_shifts[q - 1] + _loop_entries(q, j) * params.delta for j in range(1, m + 1)]
        for q in inputs
    ]
    mat = np.zeros((n, n), dtype=np.complex128)
    for p in range(n):
        for q in range(n):
            acc = 0.0 + 0.0j
            for j in range(m):
                acc += (
                    np.conj(v[inputs[p] - 1, j])
                    * v[inputs[q] - 1, j]
                    * gaussian_overlap(0.0, shift[q][j], params.width)
                )
            mat[p, q] = acc
    norm = prod(factorial(int(k)) for k in occupancy)
    return float(abs(permanent(mat) / norm) ** 2)


@dataclass(frozen=True)
class FidelityStats:
    """Monte-Carlo fidelity statistics over random switching programs."""

    mean: float
    minimum: float
    maximum: float
    trials: int
    jitter_rejections: int


def expected_fidelity_mc(
    m: int,
    params: MismatchParams,
    trials: int,
    seed: int,
    occupancy: "list[int] | None" = None,
    jitter_repeats: int = 1,
) -> FidelityStats:
    """Fidelity statistics over `trials` random single-pass programs.

    Each trial draws a fresh program from stream (seed, trial); when sigma
    is positive it also draws one jitter shift per occupied input pulse
    (`jitter_repeats` independent draws per program, averaged). The min and
    max track the worst and best program encountered.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if jitter_repeats < 1:
        raise ValueError(f"jitter_repeats must be >= 1, got {jitter_repeats}")
    if occupancy is None:
        occupancy = [1] * m
    bound = params.shift_bound

    values = np.empty(trials)
    rejections = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        seq = random_sequence(m, 1, rng)
        acc = 0.0
        for _ in range(jitter_repeats):
            shifts = [0.0] * m
            if params.sigma > 0:
                for i, k in enumerate(occupancy):
                    if not k:
                        continue
                    while True:
                        eps = rng.normal(0.0, params.sigma)
                        if abs(eps) < bound:
                            shifts[i] = eps
                            break
                        rejections += 1
            acc += fidelity_permanent(seq, params, occupancy, shifts)
        values[t] = acc / jitter_repeats
    return FidelityStats(
        mean=float(values.mean()),
        minimum=float(values.min()),
        maximum=float(values.max()),
        trials=trials,
        jitter_rejections=rejections,
    )
