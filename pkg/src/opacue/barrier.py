"""Grid-sampled validation of candidate barrier certificates.

Two checkers over the augmented system (a control system paired with
itself): a safety-style certificate whose conditions imply opacity, and a
reachability-style certificate whose conditions imply the lack of it. Both
evaluate candidates on lattice samples, so "falsified" verdicts are
decisive (each carries a concrete witness point) while "sample-passed"
verdicts are explicitly non-conclusive: sampling is not a proof.

The two theorems quantify their input choices in opposite orders (for every
adversarial input there is a matching one, versus there is an input beating
every matching one); the two orders are kept as distinct code paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .boxes import grid
from .control import DtControlSystem
from .errors import QuantizationError, ValidationError

__all__ = [
    "Evaluator",
    "AugmentedRegions",
    "Violation",
    "CheckReport",
    "build_regions",
    "check_opacity_barrier",
    "check_lack_barrier",
    "decrease_forall_exists",
    "decrease_exists_forall",
]

# A candidate certificate: any callable over the 2n augmented coordinates
# (x followed by x_hat). Polynomial instances satisfy this protocol.
Evaluator = Callable[[Sequence[float]], float]

DEFAULT_MARGIN = 1e-9

Pair = tuple[tuple[float, ...], tuple[float, ...]]


@dataclass(frozen=True)
class AugmentedRegions:
    """Lattice samples of the augmented regions at one resolution.

    Every r0 member satisfies x in X0 and secret, x_hat in X0 minus secret,
    outputs delta-close; every ru member has outputs more than delta apart;
    r is the full product grid.
    """

    r0: tuple[Pair, ...]
    ru: tuple[Pair, ...]
    r: tuple[Pair, ...]
    resolution: float


def _region_spans(cs: DtControlSystem) -> list[tuple[str, float]]:
    init_secret = cs.initial_region.intersect(cs.secret_region)
    init_nonsecret = cs.initial_region.subtract(cs.secret_region)
    return [
        ("state box", cs.state_box.span),
        ("input box", cs.input_box.span),
        ("initial-and-secret region", init_secret.span),
        ("initial-minus-secret region", init_nonsecret.span),
    ]


def build_regions(
    cs: DtControlSystem, delta: float, resolution: float
) -> AugmentedRegions:
    """Sample the augmented initial/unsafe/full regions on a lattice.

    Points are drawn from the resolution-lattice of the state box and kept
    by exact membership in each region predicate, so any reported witness
    genuinely belongs to its region.
    """
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    for label, span in _region_spans(cs):
        if resolution > span:
            raise QuantizationError(
                f"resolution {resolution} exceeds the span {span} of the {label}"
            )
    points = grid(cs.state_box, resolution)
    outputs = {p: cs.observe(p) for p in points}

    def gap(a: tuple[float, ...], b: tuple[float, ...]) -> float:
        return max(abs(i - j) for i, j in zip(outputs[a], outputs[b]))

    secret_init = [
        p for p in points
        if cs.initial_region.contains(p) and cs.secret_region.contains(p)
    ]
    nonsecret_init = [
        p for p in points
        if cs.initial_region.contains(p) and not cs.secret_region.contains(p)
    ]
    r0 = tuple(
        (x, xh) for x in secret_init for xh in nonsecret_init if gap(x, xh) <= delta
    )
    ru = tuple((x, xh) for x in points for xh in points if gap(x, xh) > delta)
    r = tuple((x, xh) for x in points for xh in points)
    return AugmentedRegions(r0=r0, ru=ru, r=r, resolution=resolution)


@dataclass(frozen=True)
class Violation:
    condition: str
    point: tuple[float, ...]
    value: float


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a sampled certificate check.

    status is "falsified" (decisive, with a witness) or "sample-passed"
    (grid evidence only, not a proof). min_margin maps each condition to the
    smallest slack observed; sample_counts records how many samples each
    condition actually saw.
    """

    status: str
    violations: tuple[Violation, ...]
    min_margin: dict[str, Optional[float]]
    sample_counts: dict[str, int]
    conclusive: bool

    @property
    def witness(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def to_report(self) -> dict:
        return {
            "status": self.status,
            "conclusive": self.conclusive,
            "condition": None if not self.violations else self.violations[0].condition,
            "witness": None if not self.violations else {
                "point": list(self.violations[0].point),
                "value": self.violations[0].value,
            },
            "violations": len(self.violations),
            "min_margin": dict(self.min_margin),
            "sample_counts": dict(self.sample_counts),
            "note": "sample-passed is not a proof; only falsification is decisive",
        }


def decrease_forall_exists(slack: list[list[float]]) -> float:
    """Value of: for every row choice there exists a column with slack >= 0.

    Returns min over rows of max over columns; the condition holds iff the
    returned value is >= 0 (rows index the adversarial input u, columns the
    matching input u_hat).
    """
    return min(max(row) for row in slack)


def decrease_exists_forall(slack: list[list[float]]) -> float:
    """Value of: some row has every column with slack >= 0.

    Returns max over rows of min over columns; the condition holds iff the
    returned value is >= 0.
    """
    return max(min(row) for row in slack)


def _finish(
    violations: list[Violation],
    margins: dict[str, Optional[float]],
    counts: dict[str, int],
) -> CheckReport:
    falsified = bool(violations)
    return CheckReport(
        status="falsified" if falsified else "sample-passed",
        violations=tuple(violations),
        min_margin=margins,
        sample_counts=counts,
        conclusive=falsified,
    )


def _track(margins: dict, key: str, value: float) -> None:
    prev = margins[key]
    if prev is None or value < prev:
        margins[key] = value


def check_opacity_barrier(
    candidate: Evaluator,
    cs: DtControlSystem,
    delta: float,
    resolution: float,
    margin: float = DEFAULT_MARGIN,
) -> CheckReport:
    """Check a safety-style certificate candidate on grid samples.

    Conditions: B <= 0 on the augmented initial region, B > 0 on the
    output-distinguishable region, and on every augmented sample, for every
    grid input u there exists a grid input u_hat keeping B from increasing.
    """
    regions = build_regions(cs, delta, resolution)
    inputs = grid(cs.input_box, resolution)
    violations: list[Violation] = []
    margins: dict[str, Optional[float]] = {"initial": None, "unsafe": None, "decrease": None}
    counts = {"initial": len(regions.r0), "unsafe": len(regions.ru), "decrease": len(regions.r)}

    for x, xh in regions.r0:
        value = candidate(x + xh)
        _track(margins, "initial", -value)
        if value > 0:
            violations.append(Violation("initial", x + xh, value))
    for x, xh in regions.ru:
        value = candidate(x + xh)
        _track(margins, "unsafe", value)
        if value <= margin:
            violations.append(Violation("unsafe", x + xh, value))
    for x, xh in regions.r:
        base = candidate(x + xh)
        slack = [
            [
                base - candidate(cs.step(x, u) + cs.step(xh, uh))
                for uh in inputs
            ]
            for u in inputs
        ]
        value = decrease_forall_exists(slack)
        _track(margins, "decrease", value)
        if value < 0:
            violations.append(Violation("decrease", x + xh, -value))
    return _finish(violations, margins, counts)


def _boundary_ring(points: list[tuple[float, ...]]) -> list[Pair]:
    """Outermost lattice ring of the box X*X: pairs with any extreme coordinate."""
    if not points:
        return []
    dim = len(points[0])
    lows = [min(p[d] for p in points) for d in range(dim)]
    highs = [max(p[d] for p in points) for d in range(dim)]

    def on_face(p: tuple[float, ...]) -> bool:
        return any(p[d] == lows[d] or p[d] == highs[d] for d in range(dim))

    return [
        (x, xh) for x in points for xh in points if on_face(x) or on_face(xh)
    ]


def check_lack_barrier(
    candidate: Evaluator,
    cs: DtControlSystem,
    delta: float,
    resolution: float,
    margin: float = DEFAULT_MARGIN,
) -> CheckReport:
    """Check a reachability-style certificate candidate on grid samples.

    Conditions: V <= 0 on the augmented initial region; V > 0 on the
    outermost grid ring of the box minus the unsafe region (the discrete
    stand-in for the domain boundary away from the unsafe set); and on every
    sample of the closure of R minus R_u there EXISTS a grid input u such
    that FOR ALL grid inputs u_hat the candidate strictly decreases.
    """
    regions = build_regions(cs, delta, resolution)
    inputs = grid(cs.input_box, resolution)
    points = grid(cs.state_box, resolution)
    violations: list[Violation] = []
    margins: dict[str, Optional[float]] = {"initial": None, "boundary": None, "decrease": None}

    def gap(x, xh) -> float:
        ya, yb = cs.observe(x), cs.observe(xh)
        return max(abs(i - j) for i, j in zip(ya, yb))

    boundary = [(x, xh) for x, xh in _boundary_ring(points) if gap(x, xh) <= delta]
    close_pairs = [(x, xh) for x, xh in regions.r if gap(x, xh) <= delta]
    counts = {
        "initial": len(regions.r0),
        "boundary": len(boundary),
        "decrease": len(close_pairs),
    }

    for x, xh in regions.r0:
        value = candidate(x + xh)
        _track(margins, "initial", -value)
        if value > 0:
            violations.append(Violation("initial", x + xh, value))
    for x, xh in boundary:
        value = candidate(x + xh)
        _track(margins, "boundary", value)
        if value <= margin:
            violations.append(Violation("boundary", x + xh, value))
    for x, xh in close_pairs:
        base = candidate(x + xh)
        # Strict decrease: slack is the decrease beyond the strictness margin.
        slack = [
            [
                base - candidate(cs.step(x, u) + cs.step(xh, uh)) - margin
                for uh in inputs
            ]
            for u in inputs
        ]
        value = decrease_exists_forall(slack)
        _track(margins, "decrease", value)
        if value < 0:
            violations.append(Violation("decrease", x + xh, -value))
    return _finish(violations, margins, counts)
