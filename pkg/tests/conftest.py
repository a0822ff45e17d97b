"""Shared builders for randomized pipeline states."""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from hbnoma import (
    AngleSpec,
    ArrayGeometry,
    ClusterPlan,
    PathGain,
    SinglePathChannel,
    allocate_power,
    default_intra_fractions,
    design_analog_stage,
    effective_channels,
    order_by_gain,
    reorder_by_effective_norm,
    zero_forcing_precoder,
)


@dataclass
class PipelineState:
    """Everything a designed downlink scenario produces, for inspection."""

    channels: dict
    plan: ClusterPlan
    precoder: object
    combiners: dict
    effective: object
    baseband: object
    powers: object
    bs_antennas: int
    mu_antennas: int

    def first_aods_normalized(self):
        return [self.channels[uid].aod.normalized for uid in self.plan.first_users]


def draw_scenario(
    rng,
    n_clusters,
    users_per_cluster,
    bs_antennas,
    mu_antennas=4,
    total_power=10 ** 0.5,
    min_first_separation_deg=None,
    weak_user_offset_deg=None,
):
    """Random channels through the full design pipeline.

    First-user AoDs can be forced pairwise apart; weak users can be placed
    near their cluster's first user instead of uniformly.
    """
    while True:
        first_aods = rng.uniform(-90.0, 90.0, n_clusters)
        if min_first_separation_deg is None:
            break
        gaps = [
            abs(first_aods[i] - first_aods[j])
            for i in range(n_clusters)
            for j in range(i + 1, n_clusters)
        ]
        if not gaps or min(gaps) >= min_first_separation_deg:
            break

    bs = ArrayGeometry(bs_antennas)
    mu = ArrayGeometry(mu_antennas)
    channels = {}
    membership = []
    uid = 0
    for n in range(n_clusters):
        members = []
        for m in range(users_per_cluster):
            if m == 0:
                aod = first_aods[n]
                large_scale = 0.0
            else:
                if weak_user_offset_deg is None:
                    aod = rng.uniform(-90.0, 90.0)
                else:
                    aod = float(
                        np.clip(
                            first_aods[n] + rng.uniform(-weak_user_offset_deg, weak_user_offset_deg),
                            -90.0,
                            90.0,
                        )
                    )
                large_scale = -10.0
            g = complex(rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
            channels[uid] = SinglePathChannel(
                aoa=AngleSpec.from_degrees(rng.uniform(-90.0, 90.0)),
                aod=AngleSpec.from_degrees(aod),
                gain=PathGain(small_scale=g, large_scale_db=large_scale),
                bs_array=bs,
                mu_array=mu,
            )
            members.append(uid)
            uid += 1
        membership.append(members)

    gains = {u: ch.gain.magnitude for u, ch in channels.items()}
    plan = ClusterPlan(
        tuple(tuple(order_by_gain({u: gains[u] for u in members})) for members in membership)
    )
    precoder, combiners = design_analog_stage(channels, plan)
    effective = effective_channels(channels, precoder, combiners)
    plan = reorder_by_effective_norm(effective, plan)
    baseband = zero_forcing_precoder(
        [effective.vector(u) for u in plan.first_users],
        precoder,
        [gains[u] for u in plan.first_users],
        mu_antennas,
    )
    powers = allocate_power(plan, total_power, default_intra_fractions(users_per_cluster))
    return PipelineState(
        channels=channels,
        plan=plan,
        precoder=precoder,
        combiners=combiners,
        effective=effective,
        baseband=baseband,
        powers=powers,
        bs_antennas=bs_antennas,
        mu_antennas=mu_antennas,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
