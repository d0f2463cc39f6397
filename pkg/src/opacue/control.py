"""Discrete-time control systems on box domains with stability certificates.

The incremental-stability certificate is parametric: trajectories from
states r apart under inputs v apart stay within c*lambda^k*r + g*v, and
the output map is Lipschitz with constant a. The tool checks the grid
quantization inequality against these parameters; it does not prove the
certificate itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .boxes import Box, BoxUnion
from .errors import ParseError, ValidationError
from .expr import compile_expr

__all__ = [
    "IssCertificate",
    "QuantizationParams",
    "QuantizationCheck",
    "DtControlSystem",
    "check_quantization",
    "evaluate_quantization_inequality",
    "affine_certificate",
    "parse_control_system",
]


@dataclass(frozen=True)
class IssCertificate:
    """Decay beta(r, k) = c*lambda^k*r, input gain gamma(r) = g*r, output
    Lipschitz bound alpha(r) = a*r."""

    c: float
    lam: float
    g: float
    a: float

    def __post_init__(self):
        if self.c < 1:
            raise ValidationError(f"certificate needs c >= 1, got {self.c}")
        if not 0 < self.lam < 1:
            raise ValidationError(f"certificate needs 0 < lambda < 1, got {self.lam}")
        if self.g < 0:
            raise ValidationError(f"certificate needs g >= 0, got {self.g}")
        if self.a <= 0:
            raise ValidationError(f"certificate needs a > 0, got {self.a}")

    def beta(self, r: float, k: int) -> float:
        return self.c * self.lam**k * r

    def gamma(self, r: float) -> float:
        return self.g * r

    def alpha_inv(self, eps: float) -> float:
        return eps / self.a


@dataclass(frozen=True)
class QuantizationParams:
    """State step eta, input step mu, target relation precision epsilon."""

    eta: float
    mu: float
    epsilon: float

    def __post_init__(self):
        for name, val in (("eta", self.eta), ("mu", self.mu), ("epsilon", self.epsilon)):
            if val <= 0:
                raise ValidationError(f"{name} must be positive, got {val}")


@dataclass(frozen=True)
class QuantizationCheck:
    passed: bool
    lhs: float
    rhs: float
    slack: float


def evaluate_quantization_inequality(
    cert: IssCertificate, eta: float, mu: float, epsilon: float
) -> QuantizationCheck:
    """The raw inequality c*lambda*(eps/a) + g*mu + eta <= eps/a.

    Takes bare values (degenerate eta = mu = 0 allowed, where the inequality
    reduces to c*lambda < 1 for positive epsilon).
    """
    rhs = cert.alpha_inv(epsilon)
    lhs = cert.beta(rhs, 1) + cert.gamma(mu) + eta
    return QuantizationCheck(passed=lhs <= rhs, lhs=lhs, rhs=rhs, slack=rhs - lhs)


def check_quantization(cert: IssCertificate, params: QuantizationParams) -> QuantizationCheck:
    """Evaluate the abstraction-precision inequality for the parametric forms.

    The grid is fine enough for precision epsilon iff one decay step from
    radius epsilon/a plus the input-gain and state-grid contributions fits
    back inside epsilon/a:  c*lambda*(eps/a) + g*mu + eta <= eps/a.
    """
    return evaluate_quantization_inequality(cert, params.eta, params.mu, params.epsilon)


def affine_certificate(
    a_matrix: Sequence[Sequence[float]],
    b_matrix: Sequence[Sequence[float]],
    output_lipschitz: float = 1.0,
) -> IssCertificate:
    """Certificate (c=1, lambda=|A|_inf, g=|B|_inf/(1-lambda)) for x+ = Ax + Bu.

    Valid only for contractive A: raises ValidationError when |A|_inf >= 1.
    The output Lipschitz constant defaults to 1 (identity output map).
    """
    norm_a = max(sum(abs(v) for v in row) for row in a_matrix)
    norm_b = max(sum(abs(v) for v in row) for row in b_matrix) if b_matrix else 0.0
    if norm_a >= 1:
        raise ValidationError(
            f"affine certificate requires |A|_inf < 1, got {norm_a}"
        )
    return IssCertificate(c=1.0, lam=norm_a, g=norm_b / (1 - norm_a), a=output_lipschitz)


@dataclass(frozen=True)
class DtControlSystem:
    """x(k+1) = f(x(k), u(k)), y(k) = H(x(k)) on a box state domain."""

    state_box: Box
    initial_region: BoxUnion
    secret_region: BoxUnion
    input_box: Box
    dynamics: tuple[str, ...]
    output: tuple[str, ...]
    iss_cert: IssCertificate

    def __post_init__(self):
        n, m = self.state_box.dim, self.input_box.dim
        if len(self.dynamics) != n:
            raise ValidationError(
                f"dynamics must have {n} components, got {len(self.dynamics)}"
            )
        if not self.output:
            raise ValidationError("output map needs at least one component")
        for region, label in (
            (self.initial_region, "initial"),
            (self.secret_region, "secret"),
        ):
            for box in region.boxes:
                if box.dim != n:
                    raise ValidationError(f"{label} region dimension mismatch")
                if not self.state_box.contains_box(box):
                    raise ValidationError(f"{label} region leaves the state box")

    @property
    def dim(self) -> int:
        return self.state_box.dim

    @property
    def input_dim(self) -> int:
        return self.input_box.dim

    @property
    def output_dim(self) -> int:
        return len(self.output)

    @cached_property
    def _dyn_fns(self):
        return tuple(
            compile_expr(e, self.dim, self.input_dim) for e in self.dynamics
        )

    @cached_property
    def _out_fns(self):
        return tuple(compile_expr(e, self.dim, 0) for e in self.output)

    def step(self, x: Sequence[float], u: Sequence[float]) -> tuple[float, ...]:
        return tuple(fn(x, u) for fn in self._dyn_fns)

    def observe(self, x: Sequence[float]) -> tuple[float, ...]:
        return tuple(fn(x, ()) for fn in self._out_fns)


def _parse_box(value, where: str) -> Box:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected an array of [lo, hi] pairs")
    bounds = []
    for d, pair in enumerate(value):
        if not (isinstance(pair, list) and len(pair) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                        for v in pair)):
            raise ParseError(f"{where}[{d}]: expected a numeric [lo, hi] pair")
        bounds.append((float(pair[0]), float(pair[1])))
    return Box(tuple(bounds))


def _parse_region(value, where: str) -> BoxUnion:
    """A region is one box or an array of boxes; [] is the empty region."""
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected an array")
    if not value:
        return BoxUnion(())
    first = value[0]
    if isinstance(first, list) and first and isinstance(first[0], list):
        return BoxUnion(tuple(_parse_box(b, f"{where}[{i}]") for i, b in enumerate(value)))
    return BoxUnion((_parse_box(value, where),))


def parse_control_system(text: str | bytes) -> DtControlSystem:
    """Parse the JSON control-system format.

    Schema: {"dim": n, "state_box": [[lo,hi]]*n, "initial_box": box|[box,...],
             "secret_box": box|[box,...], "input_box": [[lo,hi]]*m,
             "dynamics": [expr]*n, "output": [expr,...],
             "iss_cert": {"c":..,"lambda":..,"g":..,"a":..}}
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("$: top level must be an object")
    for key in ("dim", "state_box", "initial_box", "secret_box", "input_box",
                "dynamics", "output", "iss_cert"):
        if key not in doc:
            raise ParseError(f"$: missing key {key!r}")

    state_box = _parse_box(doc["state_box"], "state_box")
    if state_box.dim != doc["dim"]:
        raise ValidationError(
            f"dim={doc['dim']} but state_box has {state_box.dim} dimensions"
        )
    cert_doc = doc["iss_cert"]
    if not isinstance(cert_doc, dict):
        raise ParseError("iss_cert: expected an object")
    try:
        cert = IssCertificate(
            c=float(cert_doc["c"]), lam=float(cert_doc["lambda"]),
            g=float(cert_doc["g"]), a=float(cert_doc["a"]),
        )
    except KeyError as exc:
        raise ParseError(f"iss_cert: missing key {exc.args[0]!r}") from exc

    for key in ("dynamics", "output"):
        if not (isinstance(doc[key], list)
                and all(isinstance(e, str) for e in doc[key])):
            raise ParseError(f"{key}: expected an array of expression strings")

    return DtControlSystem(
        state_box=state_box,
        initial_region=_parse_region(doc["initial_box"], "initial_box"),
        secret_region=_parse_region(doc["secret_box"], "secret_box"),
        input_box=_parse_box(doc["input_box"], "input_box"),
        dynamics=tuple(doc["dynamics"]),
        output=tuple(doc["output"]),
        iss_cert=cert,
    )
