"""Forward subset construction deciding approximate state-based opacity.

Each observer state is a pair (reference state, set of initial/current
state pairs). The reference component fixes what counts as delta-close at
every instant; the pair set tracks every run of the system whose output
history is pointwise delta-close to the reference run, remembering where
each such run started.

Pair sets live in a single int of n*n bits (bit i*n + c == pair (i, c)),
so interning an observer state is one dict lookup on (ref, pairs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ResourceError, ValidationError
from .system import MetricSystem, NotionKind, OpacityNotion, iter_bits
from .verdict import Verdict, Witness

DEFAULT_STATE_CAP = 2_000_000

__all__ = ["DEFAULT_STATE_CAP", "ObserverState", "Observer", "build_observer",
           "verify_state_opacity"]


@dataclass(frozen=True)
class ObserverState:
    ref: int
    pairs: int  # bitset over n*n bits


@dataclass
class Observer:
    """Reachable part of the delta-approximate observer.

    States are listed in BFS discovery order; the first `initial_count`
    entries are the initial states (one per initial system state).
    `parents[i]` is (observer parent index, input index) for the first
    discovery of state i, or None for initial states.
    """

    sys: MetricSystem
    delta: float
    states: list[ObserverState]
    initial_count: int
    transitions: list[tuple[int, int, int]]
    parents: list[Optional[tuple[int, int]]]

    def int_bits(self, i: int) -> int:
        """Possible initial states recorded in observer state i."""
        n = self.sys.n_states
        rowmask = (1 << n) - 1
        z = self.states[i].pairs
        out = 0
        for row in range(n):
            if (z >> (row * n)) & rowmask:
                out |= 1 << row
        return out

    def cur_bits(self, i: int) -> int:
        """Possible current states recorded in observer state i."""
        n = self.sys.n_states
        rowmask = (1 << n) - 1
        z = self.states[i].pairs
        out = 0
        for row in range(n):
            out |= (z >> (row * n)) & rowmask
        return out

    def path_to(self, i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Reference-state path and inputs from an initial state to state i."""
        states: list[int] = []
        inputs: list[int] = []
        cur: Optional[int] = i
        while cur is not None:
            states.append(self.states[cur].ref)
            link = self.parents[cur]
            if link is None:
                break
            cur, u = link
            inputs.append(u)
        states.reverse()
        inputs.reverse()
        return tuple(states), tuple(inputs)


def _advance(z: int, n: int, rowmask: int, succ_any) -> int:
    """Advance every tracked run one step under an arbitrary input."""
    out = 0
    shift = 0
    for _ in range(n):
        row = (z >> shift) & rowmask
        if row:
            acc = 0
            while row:
                low = row & -row
                acc |= succ_any[low.bit_length() - 1]
                row ^= low
            out |= acc << shift
        shift += n
    return out


def build_observer(
    sys: MetricSystem, delta: float, cap: int = DEFAULT_STATE_CAP
) -> Observer:
    """Materialize the reachable part of the delta-approximate observer.

    Initial states pair each initial system state x with the diagonal pairs
    (x_I, x_I) over initial states delta-close to x. Transitions advance
    every tracked pair under every input and keep the successors delta-close
    to the new reference state. Raises ResourceError past `cap` interned
    states.
    """
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    n = sys.n_states
    rowmask = (1 << n) - 1
    ones = 0
    for i in range(n):
        ones |= 1 << (i * n)
    close = [sys.close_bits(x, delta) for x in range(n)]
    repclose = [close[x] * ones for x in range(n)]
    succ_any = sys.succ_any
    post = sys.post_bits

    states: list[ObserverState] = []
    index: dict[tuple[int, int], int] = {}
    parents: list[Optional[tuple[int, int]]] = []
    transitions: list[tuple[int, int, int]] = []

    for x in sorted(sys.initial):
        diag = 0
        for i in iter_bits(sys.initial_bits & close[x]):
            diag |= 1 << (i * n + i)
        key = (x, diag)
        index[key] = len(states)
        states.append(ObserverState(x, diag))
        parents.append(None)
    initial_count = len(states)

    head = 0
    n_inputs = len(sys.inputs)
    while head < len(states):
        q = states[head]
        adv = _advance(q.pairs, n, rowmask, succ_any)
        for u in range(n_inputs):
            for x2 in iter_bits(post[u][q.ref]):
                z2 = adv & repclose[x2]
                # Clause 2 always retains the reference run's own pair, so a
                # reachable state can never carry an empty estimate.
                assert z2, "internal error: empty estimate on reachable state"
                key = (x2, z2)
                j = index.get(key)
                if j is None:
                    if len(states) >= cap:
                        raise ResourceError(
                            f"observer exceeded the cap of {cap} states"
                        )
                    j = len(states)
                    index[key] = j
                    states.append(ObserverState(x2, z2))
                    parents.append((head, u))
                transitions.append((head, u, j))
        head += 1

    return Observer(
        sys=sys,
        delta=delta,
        states=states,
        initial_count=initial_count,
        transitions=transitions,
        parents=parents,
    )


def verify_state_opacity(
    sys: MetricSystem,
    delta: float,
    notion: OpacityNotion,
    cap: int = DEFAULT_STATE_CAP,
) -> Verdict:
    """Decide delta-approximate initial-state or current-state opacity.

    The system is opaque iff no reachable observer state projects its pair
    set entirely into the secret set (initial components for initial-state,
    current components for current-state). A failure ships the reference
    path to the first revealing state in BFS order.
    """
    if notion.kind is NotionKind.PRE:
        raise NotImplementedError("pre-opacity verification is not implemented")
    if notion.kind not in (NotionKind.INITIAL_STATE, NotionKind.CURRENT_STATE):
        raise ValidationError(
            f"verify_state_opacity handles initial-state/current-state, "
            f"got {notion.label()}"
        )
    obs = build_observer(sys, delta, cap)
    secret = sys.secret_bits
    stats = {
        "observer_states": len(obs.states),
        "transitions": len(obs.transitions),
    }
    initial_notion = notion.kind is NotionKind.INITIAL_STATE
    for i in range(len(obs.states)):
        proj = obs.int_bits(i) if initial_notion else obs.cur_bits(i)
        if proj & ~secret == 0:
            states, inputs = obs.path_to(i)
            instant = None if initial_notion else len(states) - 1
            witness = Witness(states=states, inputs=inputs, revealing_instant=instant)
            return Verdict(False, notion, delta, witness, stats)
    return Verdict(True, notion, delta, None, stats)
