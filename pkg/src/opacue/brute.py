"""Definition-level opacity search used as an independent oracle.

The decision procedures here apply the opacity definitions literally:
enumerate paths of the system breadth-first while tracking, as a bitset,
the set of candidate states reached by runs whose entire output history is
delta-close to the path walked so far (the "matching set"). Memoizing on
(current state, matching set) makes the search terminate, and exhausting
all classes makes the verdict exact. Nothing here shares code with the
observer or estimator constructions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import ValidationError
from .system import MetricSystem, NotionKind, OpacityNotion, iter_bits
from .verdict import Verdict, Witness

__all__ = ["brute_force_opacity", "confirm_witness"]


def _union_succ(bits: int, succ_any) -> int:
    out = 0
    for x in iter_bits(bits):
        out |= succ_any[x]
    return out


def _union_pred(bits: int, pred_any) -> int:
    out = 0
    for x in iter_bits(bits):
        out |= pred_any[x]
    return out


@dataclass
class _Search:
    """Shared bookkeeping for one breadth-first matching-set search."""

    sys: MetricSystem
    close: list[int]
    classes: list[tuple[int, int]]
    parents: list[Optional[tuple[int, int]]]
    depths: list[int]
    index: dict[tuple[int, int], int]
    truncated: bool = False

    @classmethod
    def fresh(cls, sys: MetricSystem, delta: float) -> "_Search":
        close = [sys.close_bits(x, delta) for x in range(sys.n_states)]
        return cls(sys, close, [], [], [], {})

    def add(self, x: int, mset: int, parent: Optional[tuple[int, int]], depth: int) -> Optional[int]:
        key = (x, mset)
        if key in self.index:
            return None
        i = len(self.classes)
        self.index[key] = i
        self.classes.append(key)
        self.parents.append(parent)
        self.depths.append(depth)
        return i

    def path_to(self, i: int, tail: Optional[tuple[int, int]] = None):
        states: list[int] = []
        inputs: list[int] = []
        if tail is not None:
            u, x2 = tail
            states.append(x2)
            inputs.append(u)
        cur: Optional[int] = i
        while cur is not None:
            states.append(self.classes[cur][0])
            link = self.parents[cur]
            if link is None:
                break
            cur, u = link
            inputs.append(u)
        states.reverse()
        inputs.reverse()
        return tuple(states), tuple(inputs)


def _expand(search: _Search, start_count: int, depth_limit: Optional[int], reveal):
    """BFS over (state, matching set) classes; `reveal` inspects new classes.

    `reveal` is called on every interned class index and may return a
    Verdict-terminating payload; expansion stops at the first non-None
    result, which preserves BFS discovery order of counterexamples.
    """
    sys = search.sys
    succ_any = sys.succ_any
    post = sys.post_bits
    queue = deque(range(start_count))
    for i in queue:
        hit = reveal(i)
        if hit is not None:
            return hit
    while queue:
        i = queue.popleft()
        if depth_limit is not None and search.depths[i] >= depth_limit:
            search.truncated = True
            continue
        x, mset = search.classes[i]
        stepped = _union_succ(mset, succ_any)
        for u in range(len(sys.inputs)):
            for x2 in iter_bits(post[u][x]):
                m2 = stepped & search.close[x2]
                j = search.add(x2, m2, (i, u), search.depths[i] + 1)
                if j is None:
                    continue
                hit = reveal(j)
                if hit is not None:
                    return hit
                queue.append(j)
    return None


def _verdict_stats(search: _Search, extra: Optional[_Search] = None) -> dict:
    classes = len(search.classes)
    if extra is not None:
        classes += len(extra.classes)
    exact = not search.truncated and (extra is None or not extra.truncated)
    return {"classes": classes, "exact": exact}


def _brute_initial(sys: MetricSystem, delta: float, depth: Optional[int]) -> Verdict:
    notion = OpacityNotion.initial_state()
    search = _Search.fresh(sys, delta)
    secret = sys.secret_bits
    nonsecret_initial = sys.initial_bits & ~secret
    for x0 in sorted(sys.initial):
        if (secret >> x0) & 1:
            m0 = nonsecret_initial & search.close[x0]
            search.add(x0, m0, None, 0)
    start_count = len(search.classes)

    def reveal(i: int):
        x, mset = search.classes[i]
        if mset == 0:
            states, inputs = search.path_to(i)
            return Witness(states=states, inputs=inputs, revealing_instant=None)
        return None

    witness = _expand(search, start_count, depth, reveal)
    stats = _verdict_stats(search)
    if witness is not None:
        return Verdict(False, notion, delta, witness, stats)
    return Verdict(True, notion, delta, None, stats)


def _brute_current(sys: MetricSystem, delta: float, depth: Optional[int]) -> Verdict:
    notion = OpacityNotion.current_state()
    search = _Search.fresh(sys, delta)
    secret = sys.secret_bits
    for x0 in sorted(sys.initial):
        f0 = sys.initial_bits & search.close[x0]
        search.add(x0, f0, None, 0)
    start_count = len(search.classes)

    def reveal(i: int):
        x, fset = search.classes[i]
        if (secret >> x) & 1 and fset & ~secret == 0:
            states, inputs = search.path_to(i)
            return Witness(states=states, inputs=inputs,
                           revealing_instant=len(states) - 1)
        return None

    witness = _expand(search, start_count, depth, reveal)
    stats = _verdict_stats(search)
    if witness is not None:
        return Verdict(False, notion, delta, witness, stats)
    return Verdict(True, notion, delta, None, stats)


def _brute_delayed(
    sys: MetricSystem, delta: float, notion: OpacityNotion, depth: Optional[int]
) -> Verdict:
    """Two-phase search for K-step / infinite-step opacity.

    Phase 1 walks prefixes, tracking the full matching set F. At every class
    whose state is secret, phase 2 continues the walk over suffixes tracking
    only the runs that sat on a *non-secret* state at the secret instant;
    the instant is revealed iff that survivor set dies within the allowed
    delay.
    """
    secret = sys.secret_bits
    kmax = notion.k if notion.kind is NotionKind.K_STEP else None

    phase1 = _Search.fresh(sys, delta)
    for x0 in sorted(sys.initial):
        f0 = sys.initial_bits & phase1.close[x0]
        phase1.add(x0, f0, None, 0)
    _expand(phase1, len(phase1.classes), depth, lambda i: None)

    phase2 = _Search.fresh(sys, delta)
    sources: list[int] = []  # phase-2 class index -> phase-1 origin
    succ_any = sys.succ_any
    post = sys.post_bits

    def witness_for(p1: int, p2: Optional[int], tail: Optional[tuple[int, int]]):
        prefix_states, prefix_inputs = phase1.path_to(p1)
        if p2 is None:
            suffix_states: tuple[int, ...] = ()
            suffix_inputs: tuple[int, ...] = ()
        else:
            suffix_states, suffix_inputs = phase2.path_to(p2, tail)
            suffix_states = suffix_states[1:]
        return Witness(
            states=prefix_states + suffix_states,
            inputs=prefix_inputs + suffix_inputs,
            revealing_instant=len(prefix_states) - 1,
        )

    queue: deque[int] = deque()
    for p1, (x, fset) in enumerate(phase1.classes):
        if not (secret >> x) & 1:
            continue
        g0 = fset & ~secret
        if g0 == 0:
            stats = _verdict_stats(phase1, phase2)
            return Verdict(False, notion, delta, witness_for(p1, None, None), stats)
        j = phase2.add(x, g0, None, 0)
        if j is not None:
            sources.append(p1)
            queue.append(j)

    p2_limit = kmax if depth is None else (min(kmax, depth) if kmax is not None else depth)
    while queue:
        i = queue.popleft()
        if p2_limit is not None and phase2.depths[i] >= p2_limit:
            if kmax is None or phase2.depths[i] < kmax:
                phase2.truncated = True
            continue
        x, gset = phase2.classes[i]
        stepped = _union_succ(gset, succ_any)
        for u in range(len(sys.inputs)):
            for x2 in iter_bits(post[u][x]):
                g2 = stepped & phase2.close[x2]
                if g2 == 0:
                    root = i
                    while phase2.parents[root] is not None:
                        root = phase2.parents[root][0]
                    stats = _verdict_stats(phase1, phase2)
                    return Verdict(False, notion, delta,
                                   witness_for(sources[root], i, (u, x2)), stats)
                j = phase2.add(x2, g2, (i, u), phase2.depths[i] + 1)
                if j is not None:
                    queue.append(j)

    stats = _verdict_stats(phase1, phase2)
    return Verdict(True, notion, delta, None, stats)


def brute_force_opacity(
    sys: MetricSystem,
    delta: float,
    notion: OpacityNotion,
    depth: Optional[int] = None,
) -> Verdict:
    """Decide opacity by exhaustive matching-set search.

    With depth=None the search runs to saturation and the verdict is exact;
    otherwise exploration stops after `depth` steps and stats["exact"]
    reports whether the class graph was exhausted anyway.
    """
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    if depth is not None and depth < 1:
        raise ValidationError("depth must be positive")
    if notion.kind is NotionKind.PRE:
        raise NotImplementedError("pre-opacity verification is not implemented")
    if notion.kind is NotionKind.INITIAL_STATE:
        return _brute_initial(sys, delta, depth)
    if notion.kind is NotionKind.CURRENT_STATE:
        return _brute_current(sys, delta, depth)
    return _brute_delayed(sys, delta, notion, depth)


def confirm_witness(
    sys: MetricSystem, delta: float, notion: OpacityNotion, witness: Witness
) -> bool:
    """Replay a witness against the raw definition of the notion.

    Returns True iff the witness path is a real path of the system and no
    delta-close path explains the secret away at the claimed instant. Uses
    only forward/backward reachability over the transition relation.
    """
    states, inputs = witness.states, witness.inputs
    if len(states) != len(inputs) + 1:
        raise ValidationError("witness shape mismatch")
    edges = set(sys.transitions)
    for t, u in enumerate(inputs):
        if (states[t], u, states[t + 1]) not in edges:
            return False
    close = [sys.close_bits(x, delta) for x in range(sys.n_states)]
    secret = sys.secret_bits
    initial = sys.initial_bits
    m = len(states) - 1

    if notion.kind is NotionKind.INITIAL_STATE:
        x0 = states[0]
        if not ((initial >> x0) & 1 and (secret >> x0) & 1):
            return False
        mset = initial & ~secret & close[x0]
        for t in range(m):
            mset = _union_succ(mset, sys.succ_any) & close[states[t + 1]]
        return mset == 0

    if notion.kind is NotionKind.CURRENT_STATE:
        if not (secret >> states[m]) & 1:
            return False
        fset = initial & close[states[0]]
        for t in range(m):
            fset = _union_succ(fset, sys.succ_any) & close[states[t + 1]]
        return fset & ~secret == 0

    if notion.kind in (NotionKind.K_STEP, NotionKind.INFINITE_STEP):
        n_instant = witness.revealing_instant
        if n_instant is None or not 0 <= n_instant <= m:
            return False
        if not (secret >> states[n_instant]) & 1:
            return False
        if notion.kind is NotionKind.K_STEP and m - n_instant > notion.k:
            return False
        fset = initial & close[states[0]]
        for t in range(n_instant):
            fset = _union_succ(fset, sys.succ_any) & close[states[t + 1]]
        bset = close[states[m]]
        for t in range(m - 1, n_instant - 1, -1):
            bset = _union_pred(bset, sys.pred_any) & close[states[t]]
        return fset & bset & ~secret == 0

    raise NotImplementedError("pre-opacity verification is not implemented")
