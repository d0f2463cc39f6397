"""Graphviz DOT export for observers and estimators.

Nodes are labeled "ref | {tracked set}"; nodes that reveal the secret under
the requested notion are drawn double-circled; initial nodes are bold.
"""

from __future__ import annotations

from .estimator import InitialStateEstimator
from .observer import Observer
from .system import NotionKind, OpacityNotion, iter_bits

__all__ = ["observer_dot", "estimator_dot"]


def _quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def observer_dot(obs: Observer, notion: OpacityNotion) -> str:
    sys = obs.sys
    n = sys.n_states
    initial_notion = notion.kind is NotionKind.INITIAL_STATE
    lines = ["digraph observer {", "  rankdir=LR;"]
    for i, q in enumerate(obs.states):
        pairs = ", ".join(
            f"({sys.names[bit // n]},{sys.names[bit % n]})"
            for bit in iter_bits(q.pairs)
        )
        label = f"{sys.names[q.ref]} | {{{pairs}}}"
        proj = obs.int_bits(i) if initial_notion else obs.cur_bits(i)
        revealing = proj & ~sys.secret_bits == 0
        attrs = [f"label={_quote(label)}"]
        attrs.append("shape=doublecircle" if revealing else "shape=ellipse")
        if i < obs.initial_count:
            attrs.append("style=bold")
        lines.append(f"  q{i} [{', '.join(attrs)}];")
    for src, u, dst in obs.transitions:
        lines.append(f"  q{src} -> q{dst} [label={_quote(sys.inputs[u])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def estimator_dot(est: InitialStateEstimator) -> str:
    sys = est.sys
    target = sys.initial_bits & sys.secret_bits
    lines = ["digraph estimator {", "  rankdir=LR;"]
    for i, e in enumerate(est.states):
        members = ", ".join(sys.names[b] for b in iter_bits(e.estimate))
        label = f"{sys.names[e.ref]} | {{{members}}}"
        revealing = (
            (target >> e.ref) & 1
            and e.estimate & sys.initial_bits & ~sys.secret_bits == 0
        )
        attrs = [f"label={_quote(label)}"]
        attrs.append("shape=doublecircle" if revealing else "shape=ellipse")
        if i < est.initial_count:
            attrs.append("style=bold")
        lines.append(f"  e{i} [{', '.join(attrs)}];")
    for src, u, dst in est.transitions:
        lines.append(f"  e{src} -> e{dst} [label={_quote(sys.inputs[u])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
