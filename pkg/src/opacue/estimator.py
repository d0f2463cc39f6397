"""Backward subset construction estimating delta-consistent initial states.

The estimator starts from every system state paired with the set of states
whose output is delta-close to it, then walks transitions backwards: after
k backward steps a state (x, q) says that q is exactly the set of states
from which some forward run of length k is pointwise delta-close to the
forward run x -> ... -> x_end the walk traversed. Initial-state opacity then
reduces to checking q at states whose reference component is a secret
initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ResourceError, ValidationError
from .observer import DEFAULT_STATE_CAP
from .system import MetricSystem, OpacityNotion, iter_bits
from .verdict import Verdict, Witness

__all__ = ["EstimatorState", "InitialStateEstimator", "build_initial_estimator",
           "verify_initial_opacity_via_estimator"]


@dataclass(frozen=True)
class EstimatorState:
    ref: int
    estimate: int  # bitset over n states


@dataclass
class InitialStateEstimator:
    """Reachable part of the delta-approximate initial-state estimator.

    States are in BFS discovery order; the first `initial_count` entries are
    the initial states (one per system state). `depths[i]` is the minimal
    number of backward steps reaching state i, i.e. the length of a shortest
    forward run from ref(i) consistent with the walk. `parents[i]` links to
    the state the walk came from, which lies one forward step *ahead* of i.
    """

    sys: MetricSystem
    delta: float
    states: list[EstimatorState]
    initial_count: int
    transitions: list[tuple[int, int, int]]
    parents: list[Optional[tuple[int, int]]]
    depths: list[int]

    def forward_path_from(self, i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Forward system path starting at ref(i) traced by the backward walk."""
        states: list[int] = [self.states[i].ref]
        inputs: list[int] = []
        cur = i
        while True:
            link = self.parents[cur]
            if link is None:
                break
            cur, u = link
            inputs.append(u)
            states.append(self.states[cur].ref)
        return tuple(states), tuple(inputs)


def build_initial_estimator(
    sys: MetricSystem, delta: float, cap: int = DEFAULT_STATE_CAP
) -> InitialStateEstimator:
    """Materialize the reachable part of the backward initial-state estimator."""
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    n = sys.n_states
    close = [sys.close_bits(x, delta) for x in range(n)]
    pred_any = sys.pred_any
    pre = sys.pre_bits

    states: list[EstimatorState] = []
    index: dict[tuple[int, int], int] = {}
    parents: list[Optional[tuple[int, int]]] = []
    depths: list[int] = []
    transitions: list[tuple[int, int, int]] = []

    for x in range(n):
        key = (x, close[x])
        index[key] = len(states)
        states.append(EstimatorState(x, close[x]))
        parents.append(None)
        depths.append(0)
    initial_count = len(states)

    head = 0
    n_inputs = len(sys.inputs)
    while head < len(states):
        e = states[head]
        back = 0
        for x2 in iter_bits(e.estimate):
            back |= pred_any[x2]
        for u in range(n_inputs):
            for x2 in iter_bits(pre[u][e.ref]):
                q2 = back & close[x2]
                # The reference run's own predecessor always survives.
                assert q2, "internal error: empty estimate on reachable state"
                key = (x2, q2)
                j = index.get(key)
                if j is None:
                    if len(states) >= cap:
                        raise ResourceError(
                            f"estimator exceeded the cap of {cap} states"
                        )
                    j = len(states)
                    index[key] = j
                    states.append(EstimatorState(x2, q2))
                    parents.append((head, u))
                    depths.append(depths[head] + 1)
                transitions.append((head, u, j))
        head += 1

    return InitialStateEstimator(
        sys=sys,
        delta=delta,
        states=states,
        initial_count=initial_count,
        transitions=transitions,
        parents=parents,
        depths=depths,
    )


def verify_initial_opacity_via_estimator(
    sys: MetricSystem,
    delta: float,
    cap: int = DEFAULT_STATE_CAP,
) -> Verdict:
    """Decide delta-approximate initial-state opacity via the backward route.

    The system is opaque iff every reachable estimator state whose reference
    component is a secret initial state still retains a non-secret initial
    state in its estimate.
    """
    est = build_initial_estimator(sys, delta, cap)
    secret = sys.secret_bits
    initial = sys.initial_bits
    notion = OpacityNotion.initial_state()
    stats = {
        "estimator_states": len(est.states),
        "transitions": len(est.transitions),
    }
    target = initial & secret
    for i, e in enumerate(est.states):
        if not (target >> e.ref) & 1:
            continue
        if e.estimate & initial & ~secret == 0:
            states, inputs = est.forward_path_from(i)
            witness = Witness(states=states, inputs=inputs, revealing_instant=None)
            return Verdict(False, notion, delta, witness, stats)
    return Verdict(True, notion, delta, None, stats)
