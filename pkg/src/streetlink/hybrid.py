"""Link adaptation between the VLC and THz links.

Four policies are supported. General switching (GS) hard-selects one link
with a hysteresis band. Soft switching applies the same rule to
exponentially smoothed metrics. Combining always uses both links. The
switching-combining policy (PSC) switches when the other link is strong
and otherwise activates both links together.

Metrics are SINR-like values in dB; ``-inf`` marks a dead link.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .link_metrics import InvalidThresholds


class Scheme(str, Enum):
    GS = "GS"
    SOFT = "SoftSw"
    COMBINING = "Combining"
    PSC = "PSC"


class Link(str, Enum):
    VLC = "VLC"
    THZ = "THz"
    BOTH = "BOTH"


@dataclass(frozen=True)
class SwitchPolicy:
    scheme: Scheme = Scheme.PSC
    low_db: float = 1.0
    high_db: float = 5.0
    smoothing: float = 0.5

    def __post_init__(self):
        if self.low_db > self.high_db:
            raise InvalidThresholds(
                f"low threshold {self.low_db} dB exceeds high threshold {self.high_db} dB")


@dataclass(frozen=True)
class SwitchState:
    active: Link = Link.VLC
    switch_count: int = 0
    time_in_state: int = 0
    # Last single link that carried traffic; BOTH collapses back to it.
    serving: Link = Link.VLC
    smoothed: tuple[float, float] | None = None


def combine_db(m_vlc, m_thz):
    """Power sum of two dB values, with ``-inf`` as the identity."""
    a = np.asarray(m_vlc, float)
    b = np.asarray(m_thz, float)
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    with np.errstate(invalid="ignore"):
        out = hi + 10.0 * np.log10(1.0 + 10.0 ** ((lo - hi) / 10.0))
    # both dead: hi = -inf gives nan above
    return np.where(np.isneginf(hi), -np.inf, out)


def static_coverage_metric(scheme: Scheme | str, m_vlc, m_thz, *, low_db: float = 1.0,
                           high_db: float = 5.0):
    """Memoryless per-point metric used for hybrid coverage maps.

    GS keeps VLC while it meets ``high_db`` and otherwise takes the better
    link. PSC takes the better link, or both combined when neither reaches
    ``high_db``.
    """
    scheme = Scheme(scheme)
    v = np.asarray(m_vlc, float)
    t = np.asarray(m_thz, float)
    best = np.maximum(v, t)
    if scheme is Scheme.GS or scheme is Scheme.SOFT:
        return np.where(v >= high_db, v, best)
    if scheme is Scheme.COMBINING:
        return combine_db(v, t)
    weak = (v < high_db) & (t < high_db)
    return np.where(weak, np.maximum(best, combine_db(v, t)), best)


def _metric_of(link: Link, m_vlc: float, m_thz: float) -> float:
    if link is Link.VLC:
        return m_vlc
    if link is Link.THZ:
        return m_thz
    return float(combine_db(m_vlc, m_thz))


def _other(link: Link) -> Link:
    return Link.THZ if link is Link.VLC else Link.VLC


def _hard_select(policy: SwitchPolicy, active: Link, m_vlc: float, m_thz: float) -> Link:
    # VLC is primary: leave it below the low threshold, return above the high one.
    if active is Link.VLC:
        if m_vlc < policy.low_db and m_thz >= policy.low_db:
            return Link.THZ
        return Link.VLC
    if m_vlc >= policy.high_db:
        return Link.VLC
    if m_thz < policy.low_db and m_vlc >= policy.low_db:
        return Link.VLC
    return Link.THZ


def _psc_select(policy: SwitchPolicy, state: SwitchState, m_vlc: float, m_thz: float) -> Link:
    if state.active is Link.BOTH:
        prev = state.serving
        if _metric_of(prev, m_vlc, m_thz) >= policy.high_db:
            return prev
        if _metric_of(_other(prev), m_vlc, m_thz) >= policy.high_db:
            return _other(prev)
        return Link.BOTH
    current = _metric_of(state.active, m_vlc, m_thz)
    if current >= policy.low_db:
        return state.active
    if _metric_of(_other(state.active), m_vlc, m_thz) >= policy.high_db:
        return _other(state.active)
    return Link.BOTH


def effective_metric(policy: SwitchPolicy, m_vlc: float, m_thz: float,
                     state: SwitchState | None = None) -> tuple[float, SwitchState]:
    """One step of the stateful link-selection machine.

    ``switch_count`` counts changes of the single serving link; entering
    or leaving the dual-link state on its own is not a handover.
    """
    if state is None:
        state = SwitchState()
    scheme = Scheme(policy.scheme)
    smoothed = state.smoothed
    if scheme is Scheme.COMBINING:
        new = Link.BOTH
    elif scheme is Scheme.PSC:
        new = _psc_select(policy, state, m_vlc, m_thz)
    else:
        sv, st = m_vlc, m_thz
        if scheme is Scheme.SOFT:
            if smoothed is not None:
                a = policy.smoothing
                sv = a * smoothed[0] + (1.0 - a) * m_vlc
                st = a * smoothed[1] + (1.0 - a) * m_thz
            smoothed = (sv, st)
        new = _hard_select(policy, state.active, sv, st)

    serving = state.serving if new is Link.BOTH else new
    switches = state.switch_count + (serving is not state.serving)
    time_in_state = state.time_in_state + 1 if new is state.active else 1
    next_state = replace(state, active=new, switch_count=switches,
                         time_in_state=time_in_state, serving=serving, smoothed=smoothed)
    return _metric_of(new, m_vlc, m_thz), next_state


@dataclass(frozen=True)
class TrajectoryStats:
    switch_count: int
    both_active_fraction: float
    outage_fraction: float
    metrics: tuple[float, ...]


def trajectory_stats(policy: SwitchPolicy, samples, *, outage_db: float | None = None,
                     initial: SwitchState | None = None) -> TrajectoryStats:
    """Run the machine along a sequence of ``(m_vlc, m_thz)`` samples.

    A sample is in outage when the delivered metric is below
    ``outage_db`` (the policy's high threshold by default).
    """
    threshold = policy.high_db if outage_db is None else outage_db
    state = initial or SwitchState()
    both = outage = 0
    delivered = []
    for m_vlc, m_thz in samples:
        metric, state = effective_metric(policy, float(m_vlc), float(m_thz), state)
        delivered.append(metric)
        both += state.active is Link.BOTH
        outage += not metric >= threshold
    n = max(len(delivered), 1)
    return TrajectoryStats(state.switch_count, both / n, outage / n, tuple(delivered))
