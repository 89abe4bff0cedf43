"""Seeded parameter sweeps, serialization, and the cross-module check suite.

Every sweep is a product grid with one record per grid point. A record is
fully determined by the config (master seed included), each grid point is
evaluated from streams independent of evaluation order, and records are
sorted canonically before writing, so re-running a config always reproduces
the output byte for byte. Data goes to the requested file or stdout; all
progress chatter belongs on stderr.

All temporal quantities (delta, sigma) are expressed in units of the
wave-packet width, which the config echoes explicitly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .loss import LossParams, loss_matrix, lossy_composed_map, lossy_single_loop_map, optimize_similarity
from .network import BeamsplitterSetting, SwitchingSequence, TransferMatrix, compose_loops, random_sequence, single_loop_map
from .seeding import trial_rng
from .temporal import MismatchParams, expected_fidelity_mc

LOSS_EXPERIMENTS = ("loss-similarity", "loss-switch")
MISMATCH_EXPERIMENTS = ("mismatch-delta", "jitter-sigma")
ALL_EXPERIMENTS = LOSS_EXPERIMENTS + MISMATCH_EXPERIMENTS + ("map-dump",)

DEFAULT_LOSS_ITERATIONS = 1750
DEFAULT_MISMATCH_TRIALS = 250


class ConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: an experiment name, the grid axes, and reproducibility knobs."""

    experiment: str
    modes: tuple[int, ...] = (3,)
    eta_f: tuple[float, ...] = (1.0,)
    eta_s: tuple[float, ...] = (1.0,)
    delta: tuple[float, ...] = (0.0,)   # units of width
    sigma: tuple[float, ...] = (0.0,)   # units of width
    iterations: int = 0                 # 0 means the experiment default
    master_seed: int = 0
    width: float = 1.0
    bin_spacing: float = 100.0
    include_outer: bool = True
    jitter_repeats: int = 1
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.experiment not in ALL_EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {ALL_EXPERIMENTS}")
        for name in ("modes", "eta_f", "eta_s", "delta", "sigma"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"grid axis {name!r} is empty")
        if any(m < 1 for m in self.modes):
            raise ConfigError("mode counts must be >= 1")
        if self.experiment in LOSS_EXPERIMENTS and any(m < 2 for m in self.modes):
            raise ConfigError("loss sweeps need m >= 2 (they run m-1 loop passes)")
        if not all(0.0 <= e <= 1.0 for e in self.eta_f + self.eta_s):
            raise ConfigError("efficiencies must lie in [0, 1]")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.jitter_repeats < 1:
            raise ConfigError("jitter_repeats must be >= 1")

    @property
    def effective_iterations(self) -> int:
        if self.iterations:
            return self.iterations
        return DEFAULT_LOSS_ITERATIONS if self.experiment in LOSS_EXPERIMENTS else DEFAULT_MISMATCH_TRIALS


@dataclass(frozen=True)
class SweepResult:
    """Grid records plus the config that produced them."""

    config: SweepConfig
    columns: tuple[str, ...]
    records: tuple[dict, ...]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for rec in self.records:
            lines.append(",".join(_format_cell(rec[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "config": asdict(self.config),
            "columns": list(self.columns),
            "records": [dict(r) for r in self.records],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def rendered(self) -> str:
        return self.to_json() if self.config.fmt == "json" else self.to_csv()


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def loss_point(
    m: int, eta_f: float, eta_s: float, config: SweepConfig
) -> dict:
    """Evaluate one loss-sweep grid point; independent of all other points."""
    loops = m - 1
    result = optimize_similarity(
        m=m,
        loops=loops,
        loss=LossParams(eta_f, eta_s),
        iterations=config.effective_iterations,
        seed=config.master_seed,
        include_outer=config.include_outer,
    )
    return {
        "experiment": config.experiment,
        "m": m,
        "loops": loops,
        "eta_f": eta_f,
        "eta_s": eta_s,
        "iterations": result.iterations,
        "seed": config.master_seed,
        "s_max": result.s_best,
        "s_mean": result.s_mean,
        "p_s_at_best": result.p_s_best,
        "version": __version__,
    }


def run_loss_sweep(config: SweepConfig) -> SweepResult:
    """Similarity and post-selection statistics over the (m, eta_f, eta_s) grid.

    Each point searches `iterations` random programs with m-1 loop passes
    and one photon per bin, and reports the best similarity, the mean, and
    the post-selection probability paired with the best program.
    """
    if config.experiment not in LOSS_EXPERIMENTS:
        raise ConfigError(f"run_loss_sweep got experiment {config.experiment!r}")
    records = [
        loss_point(m, eta_f, eta_s, config)
        for m in config.modes
        for eta_f in config.eta_f
        for eta_s in config.eta_s
    ]
    records.sort(key=lambda r: (r["m"], r["eta_f"], r["eta_s"]))
    columns = (
        "experiment", "m", "loops", "eta_f", "eta_s", "iterations", "seed",
        "s_max", "s_mean", "p_s_at_best", "version",
    )
    return SweepResult(config, columns, tuple(records))


def mismatch_point(m: int, delta: float, sigma: float, config: SweepConfig) -> dict:
    """Evaluate one mismatch grid point; independent of all other points."""
    params = MismatchParams(
        delta=delta * config.width,
        sigma=sigma * config.width,
        width=config.width,
        bin_spacing=config.bin_spacing,
    )
    stats = expected_fidelity_mc(
        m=m,
        params=params,
        trials=config.effective_iterations,
        seed=config.master_seed,
        jitter_repeats=config.jitter_repeats,
    )
    return {
        "experiment": config.experiment,
        "m": m,
        "loops": 1,
        "delta_over_width": delta,
        "sigma_over_width": sigma,
        "width": config.width,
        "bin_spacing": config.bin_spacing,
        "trials": stats.trials,
        "jitter_repeats": config.jitter_repeats,
        "seed": config.master_seed,
        "f_mean": stats.mean,
        "f_min": stats.minimum,
        "f_max": stats.maximum,
        "jitter_rejections": stats.jitter_rejections,
        "version": __version__,
    }


def run_mismatch_sweep(config: SweepConfig) -> SweepResult:
    """Fidelity statistics over the (m, delta, sigma) grid, one loop pass,
    one photon per bin, `iterations` random programs per point."""
    if config.experiment not in MISMATCH_EXPERIMENTS:
        raise ConfigError(f"run_mismatch_sweep got experiment {config.experiment!r}")
    records = [
        mismatch_point(m, delta, sigma, config)
        for m in config.modes
        for delta in config.delta
        for sigma in config.sigma
    ]
    records.sort(key=lambda r: (r["m"], r["delta_over_width"], r["sigma_over_width"]))
    columns = (
        "experiment", "m", "loops", "delta_over_width", "sigma_over_width",
        "width", "bin_spacing", "trials", "jitter_repeats", "seed",
        "f_mean", "f_min", "f_max", "jitter_rejections", "version",
    )
    return SweepResult(config, columns, tuple(records))


# ---------------------------------------------------------------------------
# Matrix / sequence JSON schema
# ---------------------------------------------------------------------------

def matrix_to_json(t: TransferMatrix) -> dict:
    """Complex matrix as nested [re, im] pairs."""
    return {
        "m": t.m,
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in t.entries],
    }


def matrix_from_json(payload: dict) -> TransferMatrix:
    m = int(payload["m"])
    entries = np.array(
        [[complex(re, im) for re, im in row] for row in payload["entries"]],
        dtype=np.complex128,
    )
    return TransferMatrix(m, entries)


def sequence_to_json(seq: SwitchingSequence) -> dict:
    return {
        "m": seq.m,
        "passes": [
            [[[float(u.real), float(u.imag)] for u in row] for row in s.matrix.tolist()]
            for one_pass in seq.settings
            for s in one_pass
        ],
        "pass_count": seq.passes,
    }


def sequence_from_json(payload: dict) -> SwitchingSequence:
    m = int(payload["m"])
    pass_count = int(payload["pass_count"])
    flat = payload["passes"]
    if len(flat) != pass_count * (m + 1):
        raise ConfigError("sequence payload has the wrong number of settings")
    settings = []
    for mat in flat:
        (a, b), (c, d) = ((complex(re, im) for re, im in row) for row in mat)
        settings.append(BeamsplitterSetting(a, b, c, d))
    grouped = tuple(
        tuple(settings[l * (m + 1):(l + 1) * (m + 1)]) for l in range(pass_count)
    )
    return SwitchingSequence(m, grouped)


def dump_map(
    m: int,
    loops: int,
    loss: LossParams,
    seed: int | None = None,
    sequence: SwitchingSequence | None = None,
    include_outer: bool = True,
) -> dict:
    """All maps of one device instance, serialized for inspection/regression.

    Provide either a seed (a random program is drawn) or an explicit
    sequence. Emits the per-pass lossless and lossy maps, the loss-factor
    matrix, and both composed maps.
    """
    if (seed is None) == (sequence is None):
        raise ConfigError("provide exactly one of seed or sequence")
    if sequence is None:
        sequence = random_sequence(m, loops, trial_rng(int(seed), 0))
    if sequence.m != m or sequence.passes != loops:
        raise ConfigError(
            f"sequence shape ({sequence.m} modes, {sequence.passes} passes) "
            f"does not match requested ({m}, {loops})"
        )
    per_pass = [single_loop_map(sequence.loop(l)) for l in range(1, loops + 1)]
    per_pass_lossy = [lossy_single_loop_map(sequence.loop(l), loss) for l in range(1, loops + 1)]
    return {
        "m": m,
        "loops": loops,
        "eta_f": loss.eta_fiber,
        "eta_s": loss.eta_switch,
        "include_outer": include_outer,
        "seed": seed,
        "version": __version__,
        "sequence": sequence_to_json(sequence),
        "single_pass": [matrix_to_json(v) for v in per_pass],
        "single_pass_lossy": [matrix_to_json(v) for v in per_pass_lossy],
        "loss_matrix": [[float(x) for x in row] for row in loss_matrix(m, loops, loss).entries],
        "composed": matrix_to_json(compose_loops(per_pass)),
        "composed_lossy": matrix_to_json(lossy_composed_map(sequence, loss, include_outer=include_outer)),
    }


# ---------------------------------------------------------------------------
# Cross-module validation suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def run_validation(seed: int = 0) -> list[CheckResult]:
    """Fast cross-module consistency suite; every check has an independent route."""
    from .fock import enumerate_basis, output_amplitude, postselection_oracle
    from .loss import postselection_probability, similarity
    from .permanent import permanent, permanent_naive
    from .temporal import (
        MismatchParams as MP,
        evolve_pulse_train,
        fidelity_expansion,
        fidelity_permanent,
        pulse_train_state,
    )

    checks: list[CheckResult] = []

    def record(name: str, err: float, tol: float) -> None:
        checks.append(CheckResult(name, bool(err <= tol), f"max_err={err:.3e} tol={tol:g}"))

    rng = trial_rng(seed, 0)

    # Lossless maps stay unitary.
    err = 0.0
    for _ in range(20):
        m = int(rng.integers(2, 7))
        loops = int(rng.integers(1, m))
        seq = random_sequence(m, loops, rng)
        u = compose_loops([single_loop_map(seq.loop(l)) for l in range(1, loops + 1)])
        err = max(err, u.unitarity_defect())
    record("unitary_composition", err, 1e-12)

    # Two-mode loss-factor fixtures, one and two passes.
    lp = LossParams(0.9, 0.95)
    eta = lp.eta
    expected1 = lp.eta_switch * np.array([[eta, eta**2], [1.0, eta]])
    expected2 = lp.eta_switch**2 * eta * np.array([[eta, eta**2], [1.0, eta]])
    err = max(
        float(np.abs(loss_matrix(2, 1, lp).entries - expected1).max()),
        float(np.abs(loss_matrix(2, 2, lp).entries - expected2).max()),
    )
    record("loss_matrix_two_mode_fixtures", err, 1e-15)

    # Lossy product telescopes into lossless product times the loss matrix.
    err = 0.0
    for _ in range(10):
        m = int(rng.integers(2, 6))
        loops = int(rng.integers(1, 5))
        seq = random_sequence(m, loops, rng)
        lossy = lossy_composed_map(seq, lp, include_outer=False)
        plain = compose_loops([single_loop_map(seq.loop(l)) for l in range(1, loops + 1)])
        expected = plain.entries * loss_matrix(m, loops, lp).entries
        err = max(err, float(np.abs(lossy.entries - expected).max()))
    record("loss_telescoping_identity", err, 1e-12)

    # Post-selection formula against the unitary-embedding oracle.
    err = 0.0
    for _ in range(5):
        m = int(rng.integers(2, 4))
        seq = random_sequence(m, m - 1, rng)
        u = lossy_composed_map(seq, LossParams(0.9, 0.97))
        err = max(err, abs(postselection_probability(u) - postselection_oracle(u, [1] * m)))
    record("postselection_formula_vs_oracle", err, 1e-9)

    # Permanent fast path against the permutation expansion.
    err = 0.0
    for _ in range(5):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        p, q = permanent(a), permanent_naive(a)
        err = max(err, abs(p - q) / max(abs(q), 1e-30))
    record("permanent_two_routes", err, 1e-10)

    # Overlap closed form against trapezoid quadrature of the packet product.
    packet_width = 1.0
    x = np.linspace(-30.0, 30.0, 240_001)
    err = 0.0
    from .temporal import WavePacket, gaussian_overlap

    packet = WavePacket(packet_width)
    for d in np.linspace(-4.0, 4.0, 9):
        integral = float(np.trapezoid(packet.density(x) * packet.density(x - d), x))
        err = max(err, abs(integral - gaussian_overlap(0.0, d, packet_width)))
    record("overlap_vs_quadrature", err, 1e-8)

    # The two fidelity routes coincide, and lossless evolution stays normalized.
    err = 0.0
    norm_err = 0.0
    for _ in range(5):
        m = int(rng.integers(1, 4))
        seq = random_sequence(m, 1, rng)
        params = MP(delta=float(rng.uniform(-0.5, 0.5)), width=1.0)
        shifts = [float(rng.uniform(-0.4, 0.4)) for _ in range(m)]
        occ = [1] * m
        ideal = evolve_pulse_train(seq, pulse_train_state(m, occ), params.without_errors())
        actual = evolve_pulse_train(seq, pulse_train_state(m, occ, shifts), params)
        norm_err = max(norm_err, abs(actual.norm_sq() - 1.0))
        f_exp = fidelity_expansion(ideal, actual, params.width)
        f_perm = fidelity_permanent(seq, params, occ, shifts)
        err = max(err, abs(f_exp - f_perm))
    record("fidelity_two_routes", err, 1e-10)
    record("evolution_normalization", norm_err, 1e-10)

    # Multi-photon completeness of the Fock amplitudes on a unitary map.
    err = 0.0
    for m, n in ((2, 2), (3, 2)):
        seq = random_sequence(m, 1, rng)
        u = single_loop_map(seq)
        basis = enumerate_basis(m, n)
        in_occ = list(basis.states[int(rng.integers(0, len(basis.states)))])
        total = sum(abs(output_amplitude(u, in_occ, list(out))) ** 2 for out in basis.states)
        err = max(err, abs(total - 1.0))
    record("fock_completeness", err, 1e-9)

    return checks
