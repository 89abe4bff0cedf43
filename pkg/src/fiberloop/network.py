"""Lossless transfer maps of the time-bin fiber-loop interferometer.

A pulse train of m time bins enters a single delay loop whose coupling
beamsplitter is reprogrammed between pulses. One pass of the loop applies
m+1 beamsplitter settings; the first and last are fixed to a full swap so
the train is coupled completely into, and finally out of, the loop. The
resulting input-to-output amplitude map is an m x m unitary whose shape is
constrained by causality: a pulse can exit at most one bin earlier than it
entered.

Conventions: the public API is 1-based in the mode/time indices (i, j, t)
while storage is 0-based. Transfer matrices are indexed [input, output].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class BeamsplitterSetting:
    """One 2x2 unitary setting of the dynamic coupling beamsplitter.

    u11 is the amplitude for bypassing the loop (source -> detector arm),
    u12 for coupling into the loop, u21 for coupling out of the loop, and
    u22 for staying inside for another round trip.
    """

    u11: complex
    u12: complex
    u21: complex
    u22: complex

    def __post_init__(self) -> None:
        m = self.matrix
        if np.abs(m.conj().T @ m - np.eye(2)).max() > UNITARY_TOL:
            raise ValueError("beamsplitter setting is not unitary within 1e-12")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=np.complex128)

    @staticmethod
    def swap() -> "BeamsplitterSetting":
        """Full coupling: everything crosses between the two arms."""
        return BeamsplitterSetting(0.0, 1.0, 1.0, 0.0)

    @staticmethod
    def identity() -> "BeamsplitterSetting":
        """No coupling: both arms pass straight through."""
        return BeamsplitterSetting(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_angles(theta: float, phi: float = 0.0, lam: float = 0.0) -> "BeamsplitterSetting":
        """SU(2) element with reflectivity cos^2(theta) and two free phases.

        [[cos(t) e^{i phi},  sin(t) e^{i lam}],
         [-sin(t) e^{-i lam}, cos(t) e^{-i phi}]]
        """
        c, s = np.cos(theta), np.sin(theta)
        return BeamsplitterSetting(
            c * np.exp(1j * phi),
            s * np.exp(1j * lam),
            -s * np.exp(-1j * lam),
            c * np.exp(-1j * phi),
        )

    def is_swap(self, tol: float = UNITARY_TOL) -> bool:
        return bool(np.abs(self.matrix - BeamsplitterSetting.swap().matrix).max() <= tol)


@dataclass(frozen=True)
class SwitchingSequence:
    """Time program of the coupling beamsplitter for one or more loop passes.

    `settings[l][t-1]` is the setting applied at beamsplitter time t of pass
    l+1. Each pass holds exactly m+1 settings and must begin and end with a
    swap (full in-coupling of the first bin, full out-coupling of the last).
    """

    m: int
    settings: tuple[tuple[BeamsplitterSetting, ...], ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"mode count must be >= 1, got {self.m}")
        if len(self.settings) < 1:
            raise ValueError("sequence needs at least one pass")
        for l, one_pass in enumerate(self.settings, start=1):
            if len(one_pass) != self.m + 1:
                raise ValueError(
                    f"pass {l} has {len(one_pass)} settings, expected m+1 = {self.m + 1}"
                )
            if not (one_pass[0].is_swap() and one_pass[-1].is_swap()):
                raise ValueError(f"pass {l} violates the swap boundary conditions")

    @property
    def passes(self) -> int:
        return len(self.settings)

    def setting(self, t: int, loop: int = 1) -> BeamsplitterSetting:
        """Setting at beamsplitter time t (1..m+1) of a given pass (1-based)."""
        if not 1 <= loop <= self.passes:
            raise ValueError(f"pass index {loop} out of range 1..{self.passes}")
        if not 1 <= t <= self.m + 1:
            raise ValueError(f"time index {t} out of range 1..{self.m + 1}")
        return self.settings[loop - 1][t - 1]

    def loop(self, loop: int) -> "SwitchingSequence":
        """Single-pass slice of this sequence (1-based pass index)."""
        if not 1 <= loop <= self.passes:
            raise ValueError(f"pass index {loop} out of range 1..{self.passes}")
        return SwitchingSequence(self.m, (self.settings[loop - 1],))

    @staticmethod
    def single_pass(m: int, interior: "list[BeamsplitterSetting] | tuple[BeamsplitterSetting, ...]" = ()) -> "SwitchingSequence":
        """Build one pass from the m-1 interior settings, adding the boundary swaps."""
        interior = tuple(interior)
        if len(interior) != max(m - 1, 0):
            raise ValueError(f"expected {max(m - 1, 0)} interior settings, got {len(interior)}")
        swap = BeamsplitterSetting.swap()
        return SwitchingSequence(m, ((swap, *interior, swap),))

    @staticmethod
    def from_passes(passes: "list[SwitchingSequence]") -> "SwitchingSequence":
        """Concatenate single-pass sequences into one multi-pass program."""
        if not passes:
            raise ValueError("need at least one pass")
        m = passes[0].m
        if any(p.m != m for p in passes):
            raise ValueError("all passes must share the same mode count")
        return SwitchingSequence(m, tuple(s for p in passes for s in p.settings))


@dataclass(frozen=True)
class TransferMatrix:
    """m x m input-to-output amplitude map; rows are inputs, columns outputs.

    Unitary when built from a lossless sequence, sub-unitary under loss.
    """

    m: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.entries, dtype=np.complex128)
        if a.shape != (self.m, self.m):
            raise ValueError(f"entries shape {a.shape} does not match m={self.m}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def entry(self, i: int, j: int) -> complex:
        """Amplitude from input bin i to output bin j (1-based)."""
        if not (1 <= i <= self.m and 1 <= j <= self.m):
            raise ValueError(f"indices ({i}, {j}) out of range 1..{self.m}")
        return complex(self.entries[i - 1, j - 1])

    def unitarity_defect(self) -> float:
        u = self.entries
        return float(np.abs(u.conj().T @ u - np.eye(self.m)).max())

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_defect() <= tol


def single_loop_map(seq: SwitchingSequence) -> TransferMatrix:
    """Transfer matrix implemented by one pass of the loop.

    With 1-based indices and u(t) the setting at time t:

        V[i, j] = 0                                        for i > j + 1
        V[i, j] = u11(i)                                   for i = j + 1
        V[i, j] = u12(i) u21(j+1) prod_{k=i+1..j} u22(k)   for i < j + 1

    The i = j + 1 band is the single direct reflection; everything above it
    rides the loop from bin i to bin j. The result is checked unitary.
    """
    if seq.passes != 1:
        raise ValueError(f"expected a single-pass sequence, got {seq.passes} passes")
    m = seq.m
    u = [None] + [seq.setting(t) for t in range(1, m + 2)]  # 1-based access
    v = np.zeros((m, m), dtype=np.complex128)
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            if i > j + 1:
                continue
            if i == j + 1:
                v[i - 1, j - 1] = u[i].u11
            else:
                amp = u[i].u12 * u[j + 1].u21
                for k in range(i + 1, j + 1):
                    amp *= u[k].u22
                v[i - 1, j - 1] = amp
    out = TransferMatrix(m, v)
    if not out.is_unitary():
        raise ValueError(
            f"single-pass map is not unitary (defect {out.unitarity_defect():.3e}); "
            "sequence violates the protocol"
        )
    return out


def compose_loops(maps: "list[TransferMatrix]") -> TransferMatrix:
    """Ordered product of per-pass maps: first pass applied first.

    In the [input, output] convention the composite is maps[0] @ maps[1] @ ...
    """
    if not maps:
        raise ValueError("need at least one map")
    m = maps[0].m
    if any(v.m != m for v in maps):
        raise ValueError("all maps must share the same dimension")
    product = reduce(np.matmul, (v.entries for v in maps))
    return TransferMatrix(m, product)


def random_sequence(m: int, loops: int, rng: np.random.Generator) -> SwitchingSequence:
    """Draw a random switching program: boundary swaps fixed, interior free.

    Interior settings take theta uniform on [0, pi/2] (uniform reflectivity)
    and the two phases uniform on [0, 2 pi). Deterministic given the rng
    state; draws are consumed in pass-major, time-minor order.
    """
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if loops < 1:
        raise ValueError(f"loop count must be >= 1, got {loops}")
    passes = []
    for _ in range(loops):
        interior = [
            BeamsplitterSetting.from_angles(
                theta=rng.uniform(0.0, np.pi / 2),
                phi=rng.uniform(0.0, 2 * np.pi),
                lam=rng.uniform(0.0, 2 * np.pi),
            )
            for _ in range(m - 1)
        ]
        passes.append(SwitchingSequence.single_pass(m, interior))
    return SwitchingSequence.from_passes(passes)
