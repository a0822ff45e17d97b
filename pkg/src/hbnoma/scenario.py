"""Scenario configuration: dataclasses plus a small key-value file format.

A scenario file holds flat ``key = value`` lines and one ``cluster { ... }``
block per cluster, each block listing ``user`` lines::

    # two clusters of two users, 16x1 base station, 4x1 terminals
    bs_antennas = 16
    mu_antennas = 4
    snr_db = 5            # or a comma list: 0,5
    seed = 1
    trials = 1000
    intra_fractions = 0.25,0.75   # optional, defaults to the geometric split

    cluster {
      user aod_deg=60 aoa_deg=random large_scale_db=0
      user aod_deg=55 aoa_deg=random large_scale_db=-10
    }
    cluster {
      user aod_deg=-60 aoa_deg=random large_scale_db=0
      user aod_deg=-50 aoa_deg=random large_scale_db=-10 gain=1+0j
    }

Angles are physical degrees or the word ``random`` (drawn uniformly in
[-90, 90] per trial); ``gain`` optionally pins the small-scale gain to a
fixed complex value instead of a per-trial draw. Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError
from .power import default_intra_fractions

_TOP_KEYS = ("bs_antennas", "mu_antennas", "snr_db", "seed", "trials", "intra_fractions")
_USER_KEYS = ("aod_deg", "aoa_deg", "large_scale_db", "gain")


@dataclass(frozen=True)
class UserSpec:
    """One user's geometry and gain; ``None`` angles are drawn per trial."""

    aod_deg: float | None
    aoa_deg: float | None
    large_scale_db: float = 0.0
    small_scale: complex | None = None

    def as_dict(self) -> dict:
        return {
            "aod_deg": "random" if self.aod_deg is None else self.aod_deg,
            "aoa_deg": "random" if self.aoa_deg is None else self.aoa_deg,
            "large_scale_db": self.large_scale_db,
            "gain": None
            if self.small_scale is None
            else [self.small_scale.real, self.small_scale.imag],
        }


@dataclass(frozen=True)
class ClusterSpec:
    users: tuple[UserSpec, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one Monte Carlo scenario."""

    bs_antennas: int
    mu_antennas: int
    clusters: tuple[ClusterSpec, ...]
    snr_db: float | tuple[float, ...] = 5.0
    intra_fractions: tuple[float, ...] | None = None
    seed: int = 1
    trials: int = 1000

    def __post_init__(self) -> None:
        self.validate()

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    @property
    def users_per_cluster(self) -> int:
        return len(self.clusters[0].users)

    def resolved_fractions(self) -> tuple[float, ...]:
        if self.intra_fractions is not None:
            return self.intra_fractions
        return default_intra_fractions(self.users_per_cluster)

    def single_snr_db(self) -> float:
        if isinstance(self.snr_db, tuple):
            if len(self.snr_db) != 1:
                raise ConfigurationError(
                    "this operation needs a single snr_db; got a list"
                )
            return self.snr_db[0]
        return float(self.snr_db)

    def validate(self) -> None:
        if self.bs_antennas < 1 or self.mu_antennas < 1:
            raise ConfigurationError("antenna counts must be >= 1")
        if not self.clusters:
            raise ConfigurationError("at least one cluster is required")
        sizes = {len(c.users) for c in self.clusters}
        if sizes == {0}:
            raise ConfigurationError("clusters must contain users")
        if len(sizes) != 1:
            raise ConfigurationError(
                f"all clusters must serve the same number of users, got sizes {sorted(sizes)}"
            )
        if 0 in sizes:
            raise ConfigurationError("clusters must contain users")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        snrs = self.snr_db if isinstance(self.snr_db, tuple) else (self.snr_db,)
        if not snrs or any(not math.isfinite(s) for s in snrs):
            raise ConfigurationError(f"snr_db must be finite, got {self.snr_db!r}")
        for cluster in self.clusters:
            for user in cluster.users:
                for angle in (user.aod_deg, user.aoa_deg):
                    if angle is not None and not -90.0 <= angle <= 90.0:
                        raise ConfigurationError(
                            f"angles must lie in [-90, 90] degrees, got {angle!r}"
                        )
        if self.intra_fractions is not None:
            fr = self.intra_fractions
            if len(fr) != self.users_per_cluster:
                raise ConfigurationError(
                    f"{len(fr)} intra fractions for {self.users_per_cluster} users per cluster"
                )
            if any(f <= 0 for f in fr):
                raise ConfigurationError(f"intra fractions must be positive, got {fr}")
            if abs(sum(fr) - 1.0) > 1e-9:
                raise ConfigurationError(f"intra fractions must sum to 1, got {sum(fr)!r}")
            if any(b < a for a, b in zip(fr, fr[1:])):
                raise ConfigurationError(f"intra fractions must be nondecreasing, got {fr}")

    def as_dict(self) -> dict:
        return {
            "bs_antennas": self.bs_antennas,
            "mu_antennas": self.mu_antennas,
            "snr_db": list(self.snr_db) if isinstance(self.snr_db, tuple) else self.snr_db,
            "intra_fractions": list(self.resolved_fractions()),
            "seed": self.seed,
            "trials": self.trials,
            "clusters": [
                {"users": [u.as_dict() for u in c.users]} for c in self.clusters
            ],
        }


def _parse_angle(value: str, line_no: int) -> float | None:
    if value == "random":
        return None
    try:
        return float(value)
    except ValueError:
        raise ConfigurationError(
            f"line {line_no}: angle must be a number or 'random', got {value!r}"
        ) from None


def _parse_user_line(line: str, line_no: int) -> UserSpec:
    fields: dict[str, str] = {}
    for token in line.split()[1:]:
        if "=" not in token:
            raise ConfigurationError(f"line {line_no}: expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        if key not in _USER_KEYS:
            raise ConfigurationError(f"line {line_no}: unknown user key {key!r}")
        if key in fields:
            raise ConfigurationError(f"line {line_no}: duplicate user key {key!r}")
        fields[key] = value
    if "aod_deg" not in fields or "aoa_deg" not in fields:
        raise ConfigurationError(f"line {line_no}: user needs aod_deg and aoa_deg")
    gain: complex | None = None
    if "gain" in fields:
        try:
            gain = complex(fields["gain"])
        except ValueError:
            raise ConfigurationError(
                f"line {line_no}: gain must parse as complex, got {fields['gain']!r}"
            ) from None
    try:
        large_scale = float(fields.get("large_scale_db", "0"))
    except ValueError:
        raise ConfigurationError(
            f"line {line_no}: large_scale_db must be a number, got {fields['large_scale_db']!r}"
        ) from None
    return UserSpec(
        aod_deg=_parse_angle(fields["aod_deg"], line_no),
        aoa_deg=_parse_angle(fields["aoa_deg"], line_no),
        large_scale_db=large_scale,
        small_scale=gain,
    )


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse a scenario file body; unknown keys and malformed lines raise."""
    top: dict[str, str] = {}
    clusters: list[ClusterSpec] = []
    current: list[UserSpec] | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "cluster {":
            if current is not None:
                raise ConfigurationError(f"line {line_no}: nested cluster block")
            current = []
        elif line == "}":
            if current is None:
                raise ConfigurationError(f"line {line_no}: stray closing brace")
            if not current:
                raise ConfigurationError(f"line {line_no}: empty cluster block")
            clusters.append(ClusterSpec(tuple(current)))
            current = None
        elif current is not None:
            if not line.startswith("user"):
                raise ConfigurationError(
                    f"line {line_no}: cluster blocks may only contain user lines"
                )
            current.append(_parse_user_line(line, line_no))
        else:
            if "=" not in line:
                raise ConfigurationError(f"line {line_no}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _TOP_KEYS:
                raise ConfigurationError(f"line {line_no}: unknown key {key!r}")
            if key in top:
                raise ConfigurationError(f"line {line_no}: duplicate key {key!r}")
            top[key] = value
    if current is not None:
        raise ConfigurationError("unterminated cluster block")
    if not clusters:
        raise ConfigurationError("config declares no clusters")

    def _to_int(key: str, default: int | None = None) -> int:
        if key not in top:
            if default is None:
                raise ConfigurationError(f"missing required key {key!r}")
            return default
        try:
            return int(top[key])
        except ValueError:
            raise ConfigurationError(f"{key} must be an integer, got {top[key]!r}") from None

    snr: float | tuple[float, ...] = 5.0
    if "snr_db" in top:
        try:
            parts = [float(p) for p in top["snr_db"].split(",")]
        except ValueError:
            raise ConfigurationError(f"snr_db must be numbers, got {top['snr_db']!r}") from None
        snr = parts[0] if len(parts) == 1 else tuple(parts)

    fractions: tuple[float, ...] | None = None
    if "intra_fractions" in top:
        try:
            fractions = tuple(float(p) for p in top["intra_fractions"].split(","))
        except ValueError:
            raise ConfigurationError(
                f"intra_fractions must be numbers, got {top['intra_fractions']!r}"
            ) from None

    return ScenarioConfig(
        bs_antennas=_to_int("bs_antennas"),
        mu_antennas=_to_int("mu_antennas"),
        clusters=tuple(clusters),
        snr_db=snr,
        intra_fractions=fractions,
        seed=_to_int("seed", 1),
        trials=_to_int("trials", 1000),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
