"""K-step and infinite-step opacity via the forward/backward product method.

A visit to a secret state at instant n of a path is exposed iff every path
whose output history is delta-close over the *whole* observation window sat
on a secret state at instant n. Matching decomposes at instant n: the
forward observer yields the set of states reachable at n under delta-close
prefixes, the backward estimator yields the set of states admitting a
delta-close continuation over the suffix, and the instant is revealed iff
the intersection of the two sets is entirely secret. K-step opacity limits
the suffix walk to K backward steps; infinite-step allows any length.
"""

from __future__ import annotations

from .errors import ValidationError
from .estimator import build_initial_estimator
from .observer import DEFAULT_STATE_CAP, build_observer
from .system import MetricSystem, NotionKind, OpacityNotion
from .verdict import Verdict, Witness

__all__ = ["verify_delayed_opacity"]


def verify_delayed_opacity(
    sys: MetricSystem,
    delta: float,
    notion: OpacityNotion,
    cap: int = DEFAULT_STATE_CAP,
) -> Verdict:
    """Decide delta-approximate K-step or infinite-step opacity exactly."""
    if notion.kind is NotionKind.PRE:
        raise NotImplementedError("pre-opacity verification is not implemented")
    if notion.kind not in (NotionKind.K_STEP, NotionKind.INFINITE_STEP):
        raise ValidationError(
            f"verify_delayed_opacity handles k-step/infinite-step, "
            f"got {notion.label()}"
        )
    kmax = notion.k if notion.kind is NotionKind.K_STEP else None

    obs = build_observer(sys, delta, cap)
    est = build_initial_estimator(sys, delta, cap)
    secret = sys.secret_bits

    est_by_ref: list[list[int]] = [[] for _ in range(sys.n_states)]
    for i, e in enumerate(est.states):
        if kmax is None or est.depths[i] <= kmax:
            est_by_ref[e.ref].append(i)

    stats = {
        "observer_states": len(obs.states),
        "estimator_states": len(est.states),
        "transitions": len(obs.transitions) + len(est.transitions),
    }

    for qi in range(len(obs.states)):
        x = obs.states[qi].ref
        if not (secret >> x) & 1:
            continue
        cur = obs.cur_bits(qi)
        for ei in est_by_ref[x]:
            matched = cur & est.states[ei].estimate
            if matched & ~secret == 0:
                prefix_states, prefix_inputs = obs.path_to(qi)
                suffix_states, suffix_inputs = est.forward_path_from(ei)
                witness = Witness(
                    states=prefix_states + suffix_states[1:],
                    inputs=prefix_inputs + suffix_inputs,
                    revealing_instant=len(prefix_states) - 1,
                )
                return Verdict(False, notion, delta, witness, stats)
    return Verdict(True, notion, delta, None, stats)
