"""User ordering inside clusters and two-stage transmit power allocation.

Powers are noise normalized: the total budget equals the linear SNR, and
the cluster budget is an even split of it. Inside a cluster a fixed
fraction vector is applied, nondecreasing in the SIC index so the user
with the strongest channel receives the least power.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Sequence

from .errors import ConfigurationError

if TYPE_CHECKING:  # pragma: no cover
    from .precoding import EffectiveChannelSet

logger = logging.getLogger(__name__)

ORDER_BY_LARGE_SCALE_GAIN = "large_scale_gain"
ORDER_BY_EFFECTIVE_NORM = "effective_norm"

_FRACTION_TOL = 1e-9


@dataclass(frozen=True)
class ClusterPlan:
    """Cluster membership with users ordered for SIC.

    ``assignments[n][0]`` is the first user of cluster ``n`` (strongest by
    the declared ordering basis); identifiers are opaque integers.
    """

    assignments: tuple[tuple[int, ...], ...]
    ordering_basis: str = ORDER_BY_LARGE_SCALE_GAIN

    def __post_init__(self) -> None:
        if not self.assignments:
            raise ConfigurationError("cluster plan needs at least one cluster")
        seen: set[int] = set()
        for cluster in self.assignments:
            if not cluster:
                raise ConfigurationError("empty cluster in plan")
            for uid in cluster:
                if uid in seen:
                    raise ConfigurationError(f"user {uid} assigned to more than one cluster")
                seen.add(uid)

    @property
    def num_clusters(self) -> int:
        return len(self.assignments)

    @property
    def first_users(self) -> tuple[int, ...]:
        return tuple(cluster[0] for cluster in self.assignments)

    def all_users(self) -> tuple[int, ...]:
        return tuple(uid for cluster in self.assignments for uid in cluster)


@dataclass(frozen=True)
class PowerPlan:
    """Noise-normalized transmit powers per user plus the budgets they obey."""

    total_power: float
    cluster_power: tuple[float, ...]
    user_powers: dict[int, float] = field(compare=False)

    def power_of(self, uid: int) -> float:
        return self.user_powers[uid]


def order_by_gain(gains: Mapping[int, float]) -> list[int]:
    """Order one cluster's users by descending channel gain magnitude.

    Ties break by ascending identifier so the result is reproducible.
    """
    if not gains:
        raise ConfigurationError("cannot order an empty cluster")
    return sorted(gains, key=lambda uid: (-gains[uid], uid))


def reorder_by_effective_norm(effective: "EffectiveChannelSet", plan: ClusterPlan) -> ClusterPlan:
    """Reorder each cluster by descending effective-channel norm.

    The analog stage steers each beam at its cluster's strongest user, so
    that user should keep the largest effective norm. This is verified
    rather than assumed: a demotion is logged and the norm ordering kept.
    """
    reordered = []
    for cluster in plan.assignments:
        ranked = sorted(cluster, key=lambda uid: (-effective.norm(uid), uid))
        if ranked[0] != cluster[0]:
            logger.warning(
                "effective-norm reordering demoted first user %d below %d",
                cluster[0],
                ranked[0],
            )
        reordered.append(tuple(ranked))
    return ClusterPlan(tuple(reordered), ordering_basis=ORDER_BY_EFFECTIVE_NORM)


def default_intra_fractions(users_per_cluster: int) -> tuple[float, ...]:
    """Geometric intra-cluster power split with ratio 3.

    Fraction m is 2*3**(m-1)/(3**M - 1); for two users this is (1/4, 3/4).
    """
    if users_per_cluster < 1:
        raise ConfigurationError("users_per_cluster must be >= 1")
    m = users_per_cluster
    denom = 3**m - 1
    return tuple(2 * 3**k / denom for k in range(m))


def allocate_power(
    plan: ClusterPlan, total_power: float, intra_fractions: Sequence[float]
) -> PowerPlan:
    """Split the budget evenly over clusters, then by fixed fractions inside.

    ``intra_fractions[m]`` is the share of the cluster budget given to SIC
    position m; fractions must be positive, sum to one, and be
    nondecreasing so stronger users get less power.
    """
    if total_power <= 0:
        raise ConfigurationError(f"total power must be positive, got {total_power!r}")
    fractions = tuple(float(f) for f in intra_fractions)
    if any(f <= 0 for f in fractions):
        raise ConfigurationError(f"intra fractions must be positive, got {fractions}")
    if abs(sum(fractions) - 1.0) > _FRACTION_TOL:
        raise ConfigurationError(f"intra fractions must sum to 1, got sum {sum(fractions)!r}")
    if any(b < a for a, b in zip(fractions, fractions[1:])):
        raise ConfigurationError(f"intra fractions must be nondecreasing, got {fractions}")
    for cluster in plan.assignments:
        if len(cluster) != len(fractions):
            raise ConfigurationError(
                f"cluster of size {len(cluster)} does not match {len(fractions)} fractions"
            )

    cluster_power = total_power / plan.num_clusters
    user_powers = {
        uid: fractions[m] * cluster_power
        for cluster in plan.assignments
        for m, uid in enumerate(cluster)
    }
    return PowerPlan(
        total_power=total_power,
        cluster_power=tuple(cluster_power for _ in plan.assignments),
        user_powers=user_powers,
    )
