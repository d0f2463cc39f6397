"""Finite metric transition systems: states, transitions, outputs, file format.

States are interned to dense integers 0..n-1 and every state set in this
package is carried as a Python int used as a bitset (bit i == state i), so
that the observer construction can hash sets of state pairs cheaply.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DimensionError, InputError, ParseError, ValidationError

__all__ = [
    "MetricSystem",
    "OutputMetric",
    "Path",
    "NotionKind",
    "OpacityNotion",
    "post",
    "pre",
    "delta_close",
    "parse_system",
    "serialize_system",
    "bits_of",
    "iter_bits",
]


def bits_of(indices: Iterable[int]) -> int:
    """Pack state indices into a bitset."""
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the set bit positions of a bitset in ascending order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


@dataclass(frozen=True)
class OutputMetric:
    """Metric on the output space; only the infinity norm is implemented.

    The type exists as a seam for alternative metrics, but v1 fixes the
    coordinate-wise supremum distance.
    """

    kind: str = "inf"

    def __post_init__(self):
        if self.kind != "inf":
            raise ValidationError(f"unsupported metric kind: {self.kind!r}")

    def dist(self, y: Sequence[float], y2: Sequence[float]) -> float:
        if len(y) != len(y2):
            raise DimensionError(
                f"output dimension mismatch: {len(y)} vs {len(y2)}"
            )
        d = 0.0
        for a, b in zip(y, y2):
            diff = abs(a - b)
            if diff > d:
                d = diff
        return d


def delta_close(
    metric: OutputMetric,
    y: Sequence[float],
    y2: Sequence[float],
    delta: float,
) -> bool:
    """True iff d(y, y2) <= delta.

    The comparison is an exact <= on the parsed floating point values; no
    extra tolerance is applied, since verdicts depend on the sharp
    threshold.
    """
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    return metric.dist(y, y2) <= delta


class NotionKind(enum.Enum):
    INITIAL_STATE = "initial-state"
    CURRENT_STATE = "current-state"
    K_STEP = "k-step"
    INFINITE_STEP = "infinite-step"
    PRE = "pre"


@dataclass(frozen=True)
class OpacityNotion:
    """Which state-based secret the intruder must never pin down.

    PRE is representable (so files and flags can name it) but every
    verifier rejects it with NotImplementedError.
    """

    kind: NotionKind
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind is NotionKind.K_STEP:
            if self.k is None or self.k < 0:
                raise ValidationError("k-step notion requires k >= 0")
        elif self.k is not None:
            raise ValidationError(f"{self.kind.value} notion takes no k")

    @classmethod
    def initial_state(cls) -> "OpacityNotion":
        return cls(NotionKind.INITIAL_STATE)

    @classmethod
    def current_state(cls) -> "OpacityNotion":
        return cls(NotionKind.CURRENT_STATE)

    @classmethod
    def k_step(cls, k: int) -> "OpacityNotion":
        return cls(NotionKind.K_STEP, k)

    @classmethod
    def infinite_step(cls) -> "OpacityNotion":
        return cls(NotionKind.INFINITE_STEP)

    @classmethod
    def pre(cls) -> "OpacityNotion":
        return cls(NotionKind.PRE)

    def label(self) -> str:
        if self.kind is NotionKind.K_STEP:
            return f"k-step(k={self.k})"
        return self.kind.value


@dataclass(frozen=True)
class MetricSystem:
    """A finite transition system with real-vector outputs and a secret set.

    Immutable after construction; safe to share across concurrent readers.
    """

    names: tuple[str, ...]
    inputs: tuple[str, ...]
    outputs: tuple[tuple[float, ...], ...]
    initial: tuple[int, ...]
    secret: tuple[int, ...]
    transitions: tuple[tuple[int, int, int], ...]  # (src, input, dst) indices
    metric: OutputMetric = field(default_factory=OutputMetric)

    def __post_init__(self):
        n = len(self.names)
        if n == 0:
            raise ValidationError("a system must have at least one state")
        if len(set(self.names)) != n:
            raise ValidationError("duplicate state names")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValidationError("duplicate input labels")
        if len(self.outputs) != n:
            raise ValidationError("outputs must be total on states")
        dim = len(self.outputs[0]) if self.outputs else 0
        if dim < 1:
            raise ValidationError("output dimension must be positive")
        for i, y in enumerate(self.outputs):
            if len(y) != dim:
                raise ValidationError(
                    f"state {self.names[i]!r}: output arity {len(y)} != {dim}"
                )
        for label, group in (("initial", self.initial), ("secret", self.secret)):
            for i in group:
                if not 0 <= i < n:
                    raise ValidationError(f"{label} state index {i} out of range")
        if len(set(self.transitions)) != len(self.transitions):
            raise ValidationError("duplicate transitions")
        for src, u, dst in self.transitions:
            if not 0 <= src < n or not 0 <= dst < n:
                raise ValidationError(f"transition ({src},{u},{dst}) endpoint unknown")
            if not 0 <= u < len(self.inputs):
                raise ValidationError(f"transition ({src},{u},{dst}) input unknown")

    # -- derived lookups (cached, read-only) --------------------------------

    @property
    def n_states(self) -> int:
        return len(self.names)

    @property
    def output_dim(self) -> int:
        return len(self.outputs[0])

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def input_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.inputs)}

    @cached_property
    def initial_bits(self) -> int:
        return bits_of(self.initial)

    @cached_property
    def secret_bits(self) -> int:
        return bits_of(self.secret)

    @cached_property
    def post_bits(self) -> tuple[tuple[int, ...], ...]:
        """post_bits[u][x] = bitset of u-successors of x."""
        table = [[0] * self.n_states for _ in self.inputs]
        for src, u, dst in self.transitions:
            table[u][src] |= 1 << dst
        return tuple(tuple(row) for row in table)

    @cached_property
    def pre_bits(self) -> tuple[tuple[int, ...], ...]:
        """pre_bits[u][x] = bitset of u-predecessors of x."""
        table = [[0] * self.n_states for _ in self.inputs]
        for src, u, dst in self.transitions:
            table[u][dst] |= 1 << src
        return tuple(tuple(row) for row in table)

    @cached_property
    def succ_any(self) -> tuple[int, ...]:
        """succ_any[x] = bitset of successors of x under any input."""
        out = [0] * self.n_states
        for src, _, dst in self.transitions:
            out[src] |= 1 << dst
        return tuple(out)

    @cached_property
    def pred_any(self) -> tuple[int, ...]:
        """pred_any[x] = bitset of predecessors of x under any input."""
        out = [0] * self.n_states
        for src, _, dst in self.transitions:
            out[dst] |= 1 << src
        return tuple(out)

    def close_bits(self, reference: int, delta: float) -> int:
        """Bitset of states whose output is delta-close to that of `reference`."""
        ref = self.outputs[reference]
        out = 0
        for i, y in enumerate(self.outputs):
            if delta_close(self.metric, ref, y, delta):
                out |= 1 << i
        return out

    def state_names(self, bits: int) -> list[str]:
        return [self.names[i] for i in iter_bits(bits)]


@dataclass(frozen=True)
class Path:
    """A finite path of a system: states plus the inputs taken between them."""

    states: tuple[int, ...]
    inputs: tuple[int, ...]

    def __post_init__(self):
        if not self.states:
            raise ValidationError("a path must contain at least one state")
        if len(self.inputs) != len(self.states) - 1:
            raise ValidationError("a path needs exactly one input per step")

    def validate(self, sys: MetricSystem) -> None:
        """Raise ValidationError unless every step is a transition of `sys`."""
        edges = set(sys.transitions)
        for i, u in enumerate(self.inputs):
            step = (self.states[i], u, self.states[i + 1])
            if step not in edges:
                raise ValidationError(f"step {i}: {step} is not a transition")

    def names(self, sys: MetricSystem) -> list[str]:
        return [sys.names[s] for s in self.states]


# -- Post / Pre -------------------------------------------------------------


def _check_state_set(sys: MetricSystem, q: Iterable[int]) -> int:
    bits = 0
    for x in q:
        if not 0 <= x < sys.n_states:
            raise ValidationError(f"state index {x} out of range")
        bits |= 1 << x
    return bits


def _input_of(sys: MetricSystem, u: str) -> int:
    try:
        return sys.input_index[u]
    except KeyError:
        raise InputError(f"unknown input label: {u!r}") from None


def post(sys: MetricSystem, q: Iterable[int], u: str) -> frozenset[int]:
    """Set of u-successors of any member of q."""
    bits = _check_state_set(sys, q)
    ui = _input_of(sys, u)
    table = sys.post_bits[ui]
    out = 0
    for x in iter_bits(bits):
        out |= table[x]
    return frozenset(iter_bits(out))


def pre(sys: MetricSystem, q: Iterable[int], u: str) -> frozenset[int]:
    """Set of u-predecessors of any member of q."""
    bits = _check_state_set(sys, q)
    ui = _input_of(sys, u)
    table = sys.pre_bits[ui]
    out = 0
    for x in iter_bits(bits):
        out |= table[x]
    return frozenset(iter_bits(out))


# -- file format ------------------------------------------------------------


def _expect(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise ParseError(f"{where}: {msg}")


def parse_system(text: str | bytes) -> MetricSystem:
    """Parse the JSON system format into a validated MetricSystem.

    Schema: {"states": [{"name": str, "output": [number, ...]}, ...],
             "inputs": [str, ...], "initial": [name, ...],
             "secret": [name, ...], "transitions": [[src, input, dst], ...]}
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    _expect(isinstance(doc, dict), "$", "top level must be an object")
    for key in ("states", "inputs", "initial", "secret", "transitions"):
        _expect(key in doc, "$", f"missing key {key!r}")
        _expect(isinstance(doc[key], list), key, "must be an array")

    names: list[str] = []
    outputs: list[tuple[float, ...]] = []
    for i, entry in enumerate(doc["states"]):
        where = f"states[{i}]"
        _expect(isinstance(entry, dict), where, "must be an object")
        _expect(isinstance(entry.get("name"), str), where, "needs a string 'name'")
        out = entry.get("output")
        _expect(isinstance(out, list), where, "needs an array 'output'")
        for j, v in enumerate(out):
            _expect(
                isinstance(v, (int, float)) and not isinstance(v, bool),
                f"{where}.output[{j}]",
                "must be a number",
            )
        names.append(entry["name"])
        outputs.append(tuple(float(v) for v in out))

    inputs: list[str] = []
    for i, label in enumerate(doc["inputs"]):
        _expect(isinstance(label, str), f"inputs[{i}]", "must be a string")
        inputs.append(label)

    index = {name: i for i, name in enumerate(names)}
    if len(index) != len(names):
        raise ValidationError("duplicate state names")
    input_index = {label: i for i, label in enumerate(inputs)}

    def resolve(key: str) -> tuple[int, ...]:
        out = []
        for i, name in enumerate(doc[key]):
            _expect(isinstance(name, str), f"{key}[{i}]", "must be a state name")
            if name not in index:
                raise ValidationError(f"{key}[{i}]: unknown state {name!r}")
            out.append(index[name])
        return tuple(sorted(set(out)))

    initial = resolve("initial")
    secret = resolve("secret")

    transitions: list[tuple[int, int, int]] = []
    for i, triple in enumerate(doc["transitions"]):
        where = f"transitions[{i}]"
        _expect(
            isinstance(triple, list) and len(triple) == 3,
            where,
            "must be a [src, input, dst] triple",
        )
        src, label, dst = triple
        for part in (src, dst):
            _expect(isinstance(part, str), where, "endpoints must be state names")
        _expect(isinstance(label, str), where, "input must be a label string")
        if src not in index:
            raise ValidationError(f"{where}: unknown source state {src!r}")
        if dst not in index:
            raise ValidationError(f"{where}: unknown target state {dst!r}")
        if label not in input_index:
            raise ValidationError(f"{where}: unknown input {label!r}")
        transitions.append((index[src], input_index[label], index[dst]))
    if len(set(transitions)) != len(transitions):
        raise ValidationError("duplicate transitions")

    return MetricSystem(
        names=tuple(names),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        initial=initial,
        secret=secret,
        transitions=tuple(sorted(transitions)),
    )


def serialize_system(sys: MetricSystem) -> str:
    """Emit the canonical JSON document for a system.

    Canonical form: state/input order preserved, initial/secret sorted by
    state index, transitions sorted by (src, input, dst) index triples.
    serialize(parse(doc)) is the identity on canonical documents.
    """
    doc = {
        "states": [
            {"name": name, "output": list(out)}
            for name, out in zip(sys.names, sys.outputs)
        ],
        "inputs": list(sys.inputs),
        "initial": [sys.names[i] for i in sorted(sys.initial)],
        "secret": [sys.names[i] for i in sorted(sys.secret)],
        "transitions": [
            [sys.names[src], sys.inputs[u], sys.names[dst]]
            for src, u, dst in sorted(sys.transitions)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"
