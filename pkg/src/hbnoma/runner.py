"""Seeded Monte Carlo execution of the full downlink pipeline plus presets.

Each trial draws the random parts of a scenario from its own sub-seed
(master seed XOR a hash of the trial index), so aggregates do not depend
on execution order and sweeps that share a master seed see common random
numbers across points. Trials whose cluster geometry defeats zero forcing
are redrawn with a fresh attempt seed, capped at one percent of the trial
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .arrays import AngleSpec, ArrayGeometry, PathGain, SinglePathChannel
from .bounds import hermitian_correlation, lower_bound_rate
from .errors import ConfigurationError, SingularClusteringError
from .power import (
    ORDER_BY_LARGE_SCALE_GAIN,
    ClusterPlan,
    allocate_power,
    order_by_gain,
    reorder_by_effective_norm,
)
from .precoding import design_analog_stage, effective_channels, zero_forcing_precoder
from .rates import user_rate
from .scenario import ClusterSpec, ScenarioConfig, UserSpec


def _splitmix64(x: int) -> int:
    """One splitmix64 scramble step; spreads consecutive indices apart."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def trial_seed(master_seed: int, trial_idx: int, attempt: int = 0) -> int:
    """Per-trial sub-seed: master seed XOR a hash of (trial, attempt)."""
    return (master_seed & 0xFFFFFFFFFFFFFFFF) ^ _splitmix64((trial_idx << 16) | attempt)


@dataclass(frozen=True)
class UserOutcome:
    """Per-trial result for one SIC position."""

    cluster_idx: int
    sic_idx: int
    rate: float
    bound: float
    rho: float
    intra: float
    inter: float


@dataclass(frozen=True)
class TrialOutcome:
    users: tuple[UserOutcome, ...]
    sum_rate: float


@dataclass
class RunManifest:
    """Aggregated scenario results; means run over trials in index order."""

    config: dict
    seed: int
    trials: int
    version: str
    singular_redraws: int
    sum_rate_mean: float
    bound_violation_rate: float
    bound_violation_max_excess: float
    users: list[dict] = field(default_factory=list)

    CSV_HEADER = ("user_n", "user_m", "rate_mean", "rate_bound_mean", "intra_mean", "inter_mean")

    def csv_header(self) -> tuple[str, ...]:
        return self.CSV_HEADER

    def csv_rows(self) -> list[tuple]:
        return [
            (
                u["user_n"],
                u["user_m"],
                u["rate_mean"],
                u["rate_bound_mean"],
                u["intra_mean"],
                u["inter_mean"],
            )
            for u in self.users
        ]

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "seed": self.seed,
            "trials": self.trials,
            "version": self.version,
            "singular_redraws": self.singular_redraws,
            "sum_rate_mean": self.sum_rate_mean,
            "bound_violation_rate": self.bound_violation_rate,
            "bound_violation_max_excess": self.bound_violation_max_excess,
            "users": self.users,
        }

    def user_entry(self, user_n: int, user_m: int) -> dict:
        for entry in self.users:
            if entry["user_n"] == user_n and entry["user_m"] == user_m:
                return entry
        raise KeyError(f"no aggregate for user ({user_n}, {user_m})")


def _materialize_trial(
    config: ScenarioConfig, rng: np.random.Generator
) -> tuple[dict[int, SinglePathChannel], list[list[int]]]:
    """Draw the random angles/gains of one trial and build all channels.

    Draw order is fixed (cluster by cluster, user by user: AoD, AoA, gain)
    so identical configs consume identical random streams.
    """
    bs = ArrayGeometry(config.bs_antennas)
    mu = ArrayGeometry(config.mu_antennas)
    channels: dict[int, SinglePathChannel] = {}
    membership: list[list[int]] = []
    uid = 0
    for cluster in config.clusters:
        members = []
        for spec in cluster.users:
            aod = spec.aod_deg
            if aod is None:
                aod = math.degrees(rng.uniform(-math.pi / 2, math.pi / 2))
            aoa = spec.aoa_deg
            if aoa is None:
                aoa = math.degrees(rng.uniform(-math.pi / 2, math.pi / 2))
            g = spec.small_scale
            if g is None:
                g = complex(rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
            channels[uid] = SinglePathChannel(
                aoa=AngleSpec.from_degrees(aoa),
                aod=AngleSpec.from_degrees(aod),
                gain=PathGain(small_scale=g, large_scale_db=spec.large_scale_db),
                bs_array=bs,
                mu_array=mu,
            )
            members.append(uid)
            uid += 1
        membership.append(members)
    return channels, membership


def run_trial(config: ScenarioConfig, rng: np.random.Generator, snr_db: float) -> TrialOutcome:
    """One full pipeline pass: draw, order, steer, zero-force, allocate, rate."""
    channels, membership = _materialize_trial(config, rng)
    gains = {uid: ch.gain.magnitude for uid, ch in channels.items()}

    plan = ClusterPlan(
        tuple(tuple(order_by_gain({uid: gains[uid] for uid in members})) for members in membership),
        ordering_basis=ORDER_BY_LARGE_SCALE_GAIN,
    )
    precoder, combiners = design_analog_stage(channels, plan)
    effective = effective_channels(channels, precoder, combiners)
    plan = reorder_by_effective_norm(effective, plan)

    baseband = zero_forcing_precoder(
        [effective.vector(uid) for uid in plan.first_users],
        precoder,
        [gains[uid] for uid in plan.first_users],
        config.mu_antennas,
    )

    total_power = 10.0 ** (snr_db / 10.0)
    powers = allocate_power(plan, total_power, config.resolved_fractions())
    cluster_power = powers.cluster_power[0]
    first_aods = [channels[uid].aod.normalized for uid in plan.first_users]

    outcomes = []
    total = 0.0
    for n, cluster in enumerate(plan.assignments):
        first_vec = effective.vector(cluster[0])
        for m, uid in enumerate(cluster):
            breakdown = user_rate(n, m, plan, effective, baseband, powers)
            if m == 0:
                rho, bound = 1.0, breakdown.rate_bps_hz
            else:
                rho = hermitian_correlation(effective.vector(uid), first_vec).rho
                bound = lower_bound_rate(
                    sic_idx=m,
                    rho=rho,
                    user_power=powers.power_of(uid),
                    stronger_powers=[powers.power_of(cluster[k]) for k in range(m)],
                    cluster_power=cluster_power,
                    gain_magnitude=gains[uid],
                    bs_antennas=config.bs_antennas,
                    mu_antennas=config.mu_antennas,
                    precoder=precoder,
                    baseband=baseband,
                    cluster_idx=n,
                    first_user_aods=first_aods,
                    user_aod=channels[uid].aod.normalized,
                )
            outcomes.append(
                UserOutcome(
                    cluster_idx=n,
                    sic_idx=m,
                    rate=breakdown.rate_bps_hz,
                    bound=bound,
                    rho=rho,
                    intra=breakdown.intra_interference,
                    inter=breakdown.inter_interference,
                )
            )
            total += breakdown.rate_bps_hz
    return TrialOutcome(users=tuple(outcomes), sum_rate=total)


def run_scenario(config: ScenarioConfig, snr_db: float | None = None) -> RunManifest:
    """Run the configured trial budget and aggregate position-wise means.

    Singular cluster draws are redrawn under a fresh attempt seed; more
    redraws than one percent of the budget aborts the run.
    """
    snr = config.single_snr_db() if snr_db is None else float(snr_db)
    n_positions = config.num_clusters * config.users_per_cluster
    sums = {
        key: np.zeros(n_positions)
        for key in ("rate", "bound", "rho", "intra", "inter")
    }
    sum_rate_acc = 0.0
    violations = 0
    bound_evals = 0
    worst_excess = 0.0
    redraws = 0
    max_redraws = math.ceil(0.01 * config.trials)

    for trial in range(config.trials):
        attempt = 0
        while True:
            rng = np.random.default_rng(trial_seed(config.seed, trial, attempt))
            try:
                outcome = run_trial(config, rng, snr)
                break
            except SingularClusteringError:
                redraws += 1
                attempt += 1
                if redraws > max_redraws:
                    raise SingularClusteringError(
                        f"{redraws} singular cluster draws exceed the 1% redraw cap "
                        f"({max_redraws} of {config.trials} trials)"
                    ) from None
        for idx, user in enumerate(outcome.users):
            sums["rate"][idx] += user.rate
            sums["bound"][idx] += user.bound
            sums["rho"][idx] += user.rho
            sums["intra"][idx] += user.intra
            sums["inter"][idx] += user.inter
            if user.sic_idx > 0:
                bound_evals += 1
                if user.bound > user.rate:
                    violations += 1
                    worst_excess = max(worst_excess, user.bound - user.rate)
        sum_rate_acc += outcome.sum_rate

    users = []
    idx = 0
    for n in range(config.num_clusters):
        for m in range(config.users_per_cluster):
            users.append(
                {
                    "user_n": n + 1,
                    "user_m": m + 1,
                    "rate_mean": float(sums["rate"][idx] / config.trials),
                    "rate_bound_mean": float(sums["bound"][idx] / config.trials),
                    "rho_mean": float(sums["rho"][idx] / config.trials),
                    "intra_mean": float(sums["intra"][idx] / config.trials),
                    "inter_mean": float(sums["inter"][idx] / config.trials),
                }
            )
            idx += 1

    echo = config.as_dict()
    echo["snr_db"] = snr
    return RunManifest(
        config=echo,
        seed=config.seed,
        trials=config.trials,
        version=__version__,
        singular_redraws=redraws,
        sum_rate_mean=sum_rate_acc / config.trials,
        bound_violation_rate=violations / bound_evals if bound_evals else 0.0,
        bound_violation_max_excess=worst_excess,
        users=users,
    )


SWEEP_AOD_OF_USER = "aod_of_user"
SWEEP_SNR_DB = "snr_db"
SWEEP_RHO_TARGET = "rho_target"
_SWEEP_VARIABLES = (SWEEP_AOD_OF_USER, SWEEP_SNR_DB, SWEEP_RHO_TARGET)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep, over which grid, and which user to track.

    ``target_user`` is a one-based (cluster, SIC position) pair.
    """

    variable: str
    start: float
    stop: float
    step: float
    target_user: tuple[int, int] = (1, 2)

    def __post_init__(self) -> None:
        if self.variable not in _SWEEP_VARIABLES:
            raise ConfigurationError(
                f"sweep variable must be one of {_SWEEP_VARIABLES}, got {self.variable!r}"
            )
        if self.step <= 0 or self.stop < self.start:
            raise ConfigurationError(
                f"empty sweep range: start={self.start}, stop={self.stop}, step={self.step}"
            )

    def grid(self) -> list[float]:
        n_steps = int(round((self.stop - self.start) / self.step))
        return [self.start + k * self.step for k in range(n_steps + 1)]

    def validate_target(self, config: ScenarioConfig) -> None:
        n, m = self.target_user
        if not (1 <= n <= config.num_clusters and 1 <= m <= config.users_per_cluster):
            raise ConfigurationError(
                f"sweep target user {self.target_user} does not exist in a "
                f"{config.num_clusters}x{config.users_per_cluster} scenario"
            )


def spearman_rank_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman correlation via average ranks; NaN-free for constant input."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)

    def ranks(values: np.ndarray) -> np.ndarray:
        order = np.argsort(values, kind="stable")
        ranked = np.empty(len(values))
        ranked[order] = np.arange(1, len(values) + 1)
        for v in np.unique(values):
            mask = values == v
            if mask.sum() > 1:
                ranked[mask] = ranked[mask].mean()
        return ranked

    rx, ry = ranks(xs), ranks(ys)
    sx, sy = rx.std(), ry.std()
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return float(np.mean((rx - rx.mean()) * (ry - ry.mean())) / (sx * sy))


# Beam-alignment sweep preset: two clusters of two users, beams at +-60
# degrees, strong users at 0 dB and weak users at -10 dB with the weak user
# of cluster one swept toward its beam. The first users' directions are a
# free choice of this preset and are echoed in the emitted metadata.
FIG2_FIRST_AOD_DEG = 60.0
FIG2_OTHER_CLUSTER_AODS = (-60.0, -50.0)
FIG2_SWEEP_START_DEG = 50.0
FIG2_SWEEP_STOP_DEG = 60.0


def fig2_config(
    swept_aod_deg: float, seed: int, trials: int, snr_db: float | tuple[float, ...]
) -> ScenarioConfig:
    return ScenarioConfig(
        bs_antennas=16,
        mu_antennas=4,
        clusters=(
            ClusterSpec(
                (
                    UserSpec(aod_deg=FIG2_FIRST_AOD_DEG, aoa_deg=None, large_scale_db=0.0),
                    UserSpec(aod_deg=swept_aod_deg, aoa_deg=None, large_scale_db=-10.0),
                )
            ),
            ClusterSpec(
                (
                    UserSpec(aod_deg=FIG2_OTHER_CLUSTER_AODS[0], aoa_deg=None, large_scale_db=0.0),
                    UserSpec(aod_deg=FIG2_OTHER_CLUSTER_AODS[1], aoa_deg=None, large_scale_db=-10.0),
                )
            ),
        ),
        snr_db=snr_db,
        intra_fractions=(0.25, 0.75),
        seed=seed,
        trials=trials,
    )


@dataclass
class Fig2Sweep:
    """Alignment sweep table: mean correlation, rate, and bound per point."""

    rows: list[tuple[float, float, float, float, float]]
    spearman_by_snr: dict[float, float]
    seed: int
    trials: int
    version: str

    CSV_HEADER = ("aod_deg", "rho", "rate_sim_bps_hz", "rate_bound_bps_hz", "snr_db")

    def csv_header(self) -> tuple[str, ...]:
        return self.CSV_HEADER

    def csv_rows(self) -> list[tuple]:
        return list(self.rows)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "version": self.version,
            "spearman_rho_vs_rate_by_snr": {
                f"{snr:g}": value for snr, value in self.spearman_by_snr.items()
            },
            "rows": [dict(zip(self.CSV_HEADER, row)) for row in self.rows],
        }


def sweep_fig2(
    snr_db_values: Sequence[float] = (0.0, 5.0),
    step_deg: float = 0.25,
    trials: int = 1000,
    seed: int = 1,
) -> Fig2Sweep:
    """Sweep the weak user of cluster one from 50 to 60 degrees.

    The tracked user is SIC position (1, 2); its mean correlation against
    the serving beam, mean simulated rate, and mean rate bound are emitted
    per sweep point and SNR. All points share the master seed, so the
    fading draws are common random numbers across the sweep.
    """
    sweep = SweepSpec(
        variable=SWEEP_AOD_OF_USER,
        start=FIG2_SWEEP_START_DEG,
        stop=FIG2_SWEEP_STOP_DEG,
        step=step_deg,
        target_user=(1, 2),
    )
    rows = []
    spearman: dict[float, float] = {}
    for snr in snr_db_values:
        rhos, rates = [], []
        for aod in sweep.grid():
            config = fig2_config(aod, seed, trials, snr)
            sweep.validate_target(config)
            manifest = run_scenario(config, snr_db=snr)
            entry = manifest.user_entry(*sweep.target_user)
            rows.append(
                (aod, entry["rho_mean"], entry["rate_mean"], entry["rate_bound_mean"], snr)
            )
            rhos.append(entry["rho_mean"])
            rates.append(entry["rate_mean"])
        spearman[float(snr)] = spearman_rank_correlation(rhos, rates)
    return Fig2Sweep(
        rows=rows,
        spearman_by_snr=spearman,
        seed=seed,
        trials=trials,
        version=__version__,
    )


# Correlation-vs-angle preset: three clusters with beams at 0, -40 and +40
# degrees; the weak user of cluster one walks the whole angular range. The
# correlation is geometry determined, so gains are pinned and one trial
# per point suffices.
FIG3_FIRST_AODS_DEG = (0.0, -40.0, 40.0)
FIG3_SECOND_AODS_DEG = (None, -45.0, 45.0)  # filled per point for cluster one


def fig3_config(swept_aod_deg: float, seed: int) -> ScenarioConfig:
    clusters = []
    for first, second in zip(FIG3_FIRST_AODS_DEG, FIG3_SECOND_AODS_DEG):
        second_aod = swept_aod_deg if second is None else second
        clusters.append(
            ClusterSpec(
                (
                    UserSpec(aod_deg=first, aoa_deg=0.0, large_scale_db=0.0, small_scale=1 + 0j),
                    UserSpec(
                        aod_deg=second_aod, aoa_deg=0.0, large_scale_db=-10.0, small_scale=1 + 0j
                    ),
                )
            )
        )
    return ScenarioConfig(
        bs_antennas=16,
        mu_antennas=4,
        clusters=tuple(clusters),
        snr_db=5.0,
        intra_fractions=(0.25, 0.75),
        seed=seed,
        trials=1,
    )


@dataclass
class Fig3Sweep:
    """Correlation of the swept user against its serving beam, per angle."""

    rows: list[tuple[float, float]]
    seed: int
    version: str

    CSV_HEADER = ("aod_deg", "rho")

    def csv_header(self) -> tuple[str, ...]:
        return self.CSV_HEADER

    def csv_rows(self) -> list[tuple]:
        return list(self.rows)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "version": self.version,
            "rows": [dict(zip(self.CSV_HEADER, row)) for row in self.rows],
        }


def sweep_fig3(step_deg: float = 0.5, seed: int = 1) -> Fig3Sweep:
    """Walk the weak user of cluster one across [-90, 90] degrees."""
    sweep = SweepSpec(
        variable=SWEEP_AOD_OF_USER, start=-90.0, stop=90.0, step=step_deg, target_user=(1, 2)
    )
    rows = []
    for aod in sweep.grid():
        config = fig3_config(aod, seed)
        sweep.validate_target(config)
        manifest = run_scenario(config)
        rows.append((aod, manifest.user_entry(*sweep.target_user)["rho_mean"]))
    return Fig3Sweep(rows=rows, seed=seed, version=__version__)
