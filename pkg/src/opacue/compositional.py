"""Small-gain composition for two feedback-interconnected scalar subsystems.

Each subsystem is x_i+ = a_i*x_i + b_i*x_j with |a_i| < 1, the identity
output map, and interval state/initial/secret sets. The gain of a subsystem
is |b_i / (1 - a_i)|; when the product of the two gains is below one, local
simulation functions and local barrier certificates compose by pointwise
maximum into certificates for the interconnection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .boxes import Box, BoxUnion, grid_interval
from .control import DtControlSystem, IssCertificate
from .errors import SmallGainError, ValidationError

__all__ = [
    "Interval",
    "LinearSubsystem",
    "GainReport",
    "small_gain",
    "compose_simulation",
    "compose_barriers",
    "interconnect",
    "SimFunctionCheck",
    "SimCompositionReport",
    "BarrierConditionCheck",
    "BarrierCompositionReport",
]

# Local simulation function V_i(x_i, xhat_i) and local barrier B_i(x_i, xhat_i).
PairFn = Callable[[float, float], float]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class LinearSubsystem:
    """x+ = a*x + b*w with w the partner subsystem's state, output = state."""

    a: float
    b: float
    state: Interval
    initial: Interval
    secret: Interval

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise ValidationError(f"subsystem needs |a| < 1, got a={self.a}")
        for label, iv in (("initial", self.initial), ("secret", self.secret)):
            if iv.lo < self.state.lo or iv.hi > self.state.hi:
                raise ValidationError(f"{label} interval leaves the state interval")

    def step(self, x: float, w: float) -> float:
        return self.a * x + self.b * w

    @property
    def gain(self) -> float:
        return abs(self.b / (1 - self.a))


@dataclass(frozen=True)
class GainReport:
    gamma1: float
    gamma2: float
    product: float
    small_gain_ok: bool

    def to_report(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "product": self.product,
            "small_gain_ok": self.small_gain_ok,
        }


def small_gain(sub1: LinearSubsystem, sub2: LinearSubsystem) -> GainReport:
    """Gains gamma_i = |b_i / (1 - a_i)| and the product test gamma1*gamma2 < 1."""
    g1, g2 = sub1.gain, sub2.gain
    product = g1 * g2
    return GainReport(gamma1=g1, gamma2=g2, product=product,
                      small_gain_ok=product < 1)


def _require_small_gain(sub1: LinearSubsystem, sub2: LinearSubsystem) -> GainReport:
    report = small_gain(sub1, sub2)
    if not report.small_gain_ok:
        raise SmallGainError(
            f"small-gain condition failed: gamma1*gamma2 = {report.product} >= 1"
        )
    return report


def interconnect(sub1: LinearSubsystem, sub2: LinearSubsystem,
                 cert: Optional[IssCertificate] = None) -> DtControlSystem:
    """The 2-D feedback interconnection as a control system (no external input).

    The input box is a zero-effect placeholder so the interconnected system
    can flow through the box-domain tooling, whose quantifiers then range
    over inputs that do not influence the dynamics.
    """
    if cert is None:
        lam = max(abs(sub1.a) + abs(sub1.b), abs(sub2.a) + abs(sub2.b))
        if lam >= 1:
            lam = 0.99  # placeholder when the crude bound is not contractive
        cert = IssCertificate(c=1.0, lam=lam, g=0.0, a=1.0)
    width = min(sub1.state.hi - sub1.state.lo, sub2.state.hi - sub2.state.lo)
    return DtControlSystem(
        state_box=Box(((sub1.state.lo, sub1.state.hi), (sub2.state.lo, sub2.state.hi))),
        initial_region=BoxUnion((Box((
            (sub1.initial.lo, sub1.initial.hi), (sub2.initial.lo, sub2.initial.hi),
        )),)),
        secret_region=BoxUnion((Box((
            (sub1.secret.lo, sub1.secret.hi), (sub2.secret.lo, sub2.secret.hi),
        )),)),
        input_box=Box(((0.0, width),)),
        dynamics=(
            f"{sub1.a!r}*x1 + {sub1.b!r}*x2",
            f"{sub2.a!r}*x2 + {sub2.b!r}*x1",
        ),
        output=("x1", "x2"),
        iss_cert=cert,
    )


@dataclass(frozen=True)
class SimFunctionCheck:
    condition: str
    passed: bool
    min_margin: Optional[float]
    witness: Optional[tuple] = None


@dataclass(frozen=True)
class SimCompositionReport:
    gains: GainReport
    local_checks: tuple[tuple[SimFunctionCheck, ...], tuple[SimFunctionCheck, ...]]
    interconnected_checks: tuple[SimFunctionCheck, ...]
    composed: Callable[[Sequence[float], Sequence[float]], float]

    @property
    def all_passed(self) -> bool:
        return all(
            c.passed
            for group in (*self.local_checks, self.interconnected_checks)
            for c in group
        )


def _lattice(iv: Interval, step: float) -> list[float]:
    return grid_interval(iv.lo, iv.hi, step)


def _sim_conditions(
    sub: LinearSubsystem,
    partner: LinearSubsystem,
    v: PairFn,
    eps: float,
    theta: float,
    eta: float,
    eta_partner: float,
    resolution: float,
) -> tuple[SimFunctionCheck, ...]:
    """Sample the local simulation-function conditions for one subsystem."""
    xs = _lattice(sub.state, resolution)
    abstract = _lattice(sub.state, eta)
    abstract_secret = [p for p in abstract if sub.secret.contains(p)]
    abstract_nonsecret_init = [p for p in abstract if not sub.secret.contains(p)]
    ws = _lattice(partner.state, resolution)
    w_abstract = _lattice(partner.state, eta_partner)
    checks: list[SimFunctionCheck] = []

    # 1a: every secret initial sample is eps-tracked by an abstract secret state.
    worst, witness, ok = None, None, True
    for x0 in xs:
        if not (sub.initial.contains(x0) and sub.secret.contains(x0)):
            continue
        best = min((v(x0, xh) for xh in abstract_secret), default=None)
        if best is None:
            ok, witness = False, (x0,)
            break
        slack = eps - best
        if worst is None or slack < worst:
            worst, witness = slack, (x0,)
        if slack < 0:
            ok = False
            break
    checks.append(SimFunctionCheck("1a", ok, worst, None if ok else witness))

    # 1b: every abstract non-secret state (all abstract states are initial)
    # is eps-tracked by a non-secret initial sample.
    worst, witness, ok = None, None, True
    for xh in abstract_nonsecret_init:
        cands = [
            x0 for x0 in xs
            if sub.initial.contains(x0) and not sub.secret.contains(x0)
        ]
        best = min((v(x0, xh) for x0 in cands), default=None)
        if best is None:
            ok, witness = False, (xh,)
            break
        slack = eps - best
        if worst is None or slack < worst:
            worst, witness = slack, (xh,)
        if slack < 0:
            ok = False
            break
    checks.append(SimFunctionCheck("1b", ok, worst, None if ok else witness))

    # 2: V dominates the tracking distance everywhere.
    worst, witness, ok = None, None, True
    for x in xs:
        for xh in abstract:
            slack = v(x, xh) - abs(x - xh)
            if worst is None or slack < worst:
                worst, witness = slack, (x, xh)
            if slack < 0:
                ok = False
                break
        if not ok:
            break
    checks.append(SimFunctionCheck("2", ok, worst, None if ok else witness))

    # 3: from every eps-related pair, for all theta-close internal inputs,
    # concrete and abstract steps track each other within eps again.
    worst, witness, ok = None, None, True
    for x in xs:
        for xh in abstract:
            if v(x, xh) > eps:
                continue
            for w in ws:
                for wh in w_abstract:
                    if abs(w - wh) > theta:
                        continue
                    x_next = sub.step(x, w)
                    image = sub.step(xh, wh)
                    succs = [p for p in abstract if abs(p - image) <= eta]
                    if not succs:
                        ok, witness = False, (x, xh, w, wh)
                        break
                    # 3a: some abstract successor tracks the concrete step;
                    # 3b: the concrete step tracks every abstract successor
                    # (the concrete side is deterministic).
                    slack_a = eps - min(v(x_next, p) for p in succs)
                    slack_b = eps - max(v(x_next, p) for p in succs)
                    slack = min(slack_a, slack_b)
                    if worst is None or slack < worst:
                        worst, witness = slack, (x, xh, w, wh)
                    if slack < 0:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            break
    checks.append(SimFunctionCheck("3", ok, worst, None if ok else witness))
    return tuple(checks)


def compose_simulation(
    sub1: LinearSubsystem,
    sub2: LinearSubsystem,
    v1: PairFn,
    v2: PairFn,
    eps: tuple[float, float],
    theta: tuple[float, float],
    eta: tuple[float, float],
    resolution: float,
) -> SimCompositionReport:
    """Compose local simulation functions by pointwise maximum.

    Requires the small-gain condition (SmallGainError otherwise). Samples
    the local conditions for each subsystem with its interface bounds
    (eps_i, theta_i), then samples the interconnected step-matching
    condition for the composed function on the product grid.
    """
    gains = _require_small_gain(sub1, sub2)

    local1 = _sim_conditions(sub1, sub2, v1, eps[0], theta[0], eta[0], eta[1], resolution)
    local2 = _sim_conditions(sub2, sub1, v2, eps[1], theta[1], eta[1], eta[0], resolution)

    def composed(x: Sequence[float], xh: Sequence[float]) -> float:
        return max(v1(x[0], xh[0]), v2(x[1], xh[1]))

    eps_all = max(eps)
    xs1, xs2 = _lattice(sub1.state, resolution), _lattice(sub2.state, resolution)
    ab1, ab2 = _lattice(sub1.state, eta[0]), _lattice(sub2.state, eta[1])
    worst, witness, ok = None, None, True
    for x1 in xs1:
        for x2 in xs2:
            for xh1 in ab1:
                for xh2 in ab2:
                    if composed((x1, x2), (xh1, xh2)) > eps_all:
                        continue
                    n1 = sub1.step(x1, x2)
                    n2 = sub2.step(x2, x1)
                    img1 = sub1.step(xh1, xh2)
                    img2 = sub2.step(xh2, xh1)
                    succ1 = [p for p in ab1 if abs(p - img1) <= eta[0]]
                    succ2 = [p for p in ab2 if abs(p - img2) <= eta[1]]
                    if not succ1 or not succ2:
                        ok, witness = False, (x1, x2, xh1, xh2)
                        break
                    values = [
                        composed((n1, n2), (p1, p2)) for p1 in succ1 for p2 in succ2
                    ]
                    slack = min(eps_all - min(values), eps_all - max(values))
                    if worst is None or slack < worst:
                        worst, witness = slack, (x1, x2, xh1, xh2)
                    if slack < 0:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            break
    inter = (SimFunctionCheck("3-interconnected", ok, worst, None if ok else witness),)

    return SimCompositionReport(
        gains=gains,
        local_checks=(local1, local2),
        interconnected_checks=inter,
        composed=composed,
    )


@dataclass(frozen=True)
class BarrierConditionCheck:
    subsystem: int
    condition: str
    passed: bool
    min_margin: Optional[float]
    witness: Optional[tuple] = None


@dataclass(frozen=True)
class BarrierCompositionReport:
    gains: GainReport
    checks: tuple[BarrierConditionCheck, ...]
    composed: Callable[[Sequence[float]], float]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_report(self) -> dict:
        return {
            "small_gain": self.gains.to_report(),
            "all_passed": self.all_passed,
            "checks": [
                {
                    "subsystem": c.subsystem,
                    "condition": c.condition,
                    "passed": c.passed,
                    "min_margin": c.min_margin,
                }
                for c in self.checks
            ],
        }


def _barrier_conditions(
    idx: int,
    sub: LinearSubsystem,
    partner: LinearSubsystem,
    b: Callable[[Sequence[float]], float],
    delta: float,
    resolution: float,
    margin: float,
) -> list[BarrierConditionCheck]:
    """Sample the four local-barrier conditions for one subsystem."""
    xs = _lattice(sub.state, resolution)
    ws = _lattice(partner.state, resolution)
    pairs = [(x, xh) for x in xs for xh in xs]
    checks: list[BarrierConditionCheck] = []

    def norm(x: float, xh: float) -> float:
        return max(abs(x), abs(xh))

    # Lower bound by the augmented norm on the whole region.
    worst, witness, ok = None, None, True
    for x, xh in pairs:
        slack = b((x, xh)) - norm(x, xh)
        if worst is None or slack < worst:
            worst, witness = slack, (x, xh)
        if slack < 0:
            ok = False
            break
    checks.append(BarrierConditionCheck(idx, "norm-lower-bound", ok, worst,
                                        None if ok else witness))

    # Nonpositive on the local augmented initial region.
    worst, witness, ok = None, None, True
    count = 0
    for x, xh in pairs:
        if not (sub.initial.contains(x) and sub.secret.contains(x)):
            continue
        if not (sub.initial.contains(xh) and not sub.secret.contains(xh)):
            continue
        if abs(x - xh) > delta:
            continue
        count += 1
        slack = -b((x, xh))
        if worst is None or slack < worst:
            worst, witness = slack, (x, xh)
        if slack < 0:
            ok = False
            break
    checks.append(BarrierConditionCheck(idx, "initial", ok, worst,
                                        None if ok else witness))

    # Positive on the local output-distinguishable region.
    worst, witness, ok = None, None, True
    for x, xh in pairs:
        if abs(x - xh) <= delta:
            continue
        slack = b((x, xh)) - margin
        if worst is None or slack < worst:
            worst, witness = slack, (x, xh)
        if slack < 0:
            ok = False
            break
    checks.append(BarrierConditionCheck(idx, "unsafe", ok, worst,
                                        None if ok else witness))

    # Gain-style decrease against the partner's augmented norm.
    worst, witness, ok = None, None, True
    for x, xh in pairs:
        for w, wh in ((w, wh) for w in ws for wh in ws):
            lhs = b((sub.step(x, w), sub.step(xh, wh)))
            rhs = (1 - sub.a) * b((x, xh)) + sub.b * norm(w, wh)
            slack = rhs - lhs
            if worst is None or slack < worst:
                worst, witness = slack, (x, xh, w, wh)
            if slack < 0:
                ok = False
                break
        if not ok:
            break
    checks.append(BarrierConditionCheck(idx, "decrease", ok, worst,
                                        None if ok else witness))
    return checks


def compose_barriers(
    b1: Callable[[Sequence[float]], float],
    b2: Callable[[Sequence[float]], float],
    sub1: LinearSubsystem,
    sub2: LinearSubsystem,
    delta: float,
    resolution: float,
    margin: float = 1e-9,
) -> BarrierCompositionReport:
    """Compose local barrier certificates by pointwise maximum.

    Requires the small-gain condition (SmallGainError otherwise). Each local
    candidate takes one (x_i, xhat_i) pair; the composed evaluator takes the
    interconnected augmented point (x1, x2, xhat1, xhat2) and can be fed back
    into the opacity barrier checker for the interconnection.
    """
    gains = _require_small_gain(sub1, sub2)
    checks = _barrier_conditions(1, sub1, sub2, b1, delta, resolution, margin)
    checks += _barrier_conditions(2, sub2, sub1, b2, delta, resolution, margin)

    def composed(point: Sequence[float]) -> float:
        x1, x2, xh1, xh2 = point
        return max(b1((x1, xh1)), b2((x2, xh2)))

    return BarrierCompositionReport(
        gains=gains, checks=tuple(checks), composed=composed
    )
