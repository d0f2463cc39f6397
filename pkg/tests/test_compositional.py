"""Small-gain reasoning and max-composition of local certificates."""

import random

import pytest

from opacue.barrier import check_opacity_barrier
from opacue.compositional import (
    Interval,
    LinearSubsystem,
    compose_barriers,
    compose_simulation,
    interconnect,
    small_gain,
)
from opacue.errors import SmallGainError, ValidationError


def sub(a=0.5, b=0.2, state=(0.0, 1.0), initial=(0.0, 0.2), secret=(0.6, 1.0)):
    return LinearSubsystem(a=a, b=b, state=Interval(*state),
                           initial=Interval(*initial), secret=Interval(*secret))


def test_gains_closed_form():
    report = small_gain(sub(), sub())
    assert report.gamma1 == abs(0.2 / (1 - 0.5))
    assert report.gamma2 == abs(0.2 / (1 - 0.5))
    assert report.product == report.gamma1 * report.gamma2
    assert report.small_gain_ok


def test_zero_coupling_always_passes():
    report = small_gain(sub(b=0.0), sub(a=0.9, b=0.99))
    assert report.gamma1 == 0.0
    assert report.product == 0.0
    assert report.small_gain_ok


def test_strong_coupling_fails():
    report = small_gain(sub(a=0.9, b=0.5), sub(a=0.9, b=0.5))
    assert report.gamma1 == abs(0.5 / (1 - 0.9))
    assert not report.small_gain_ok


def test_gain_scale_consistency_power_of_two():
    # scaling b by powers of two scales the gain exactly in floating point
    for t in (2.0, 4.0, 0.5):
        base = sub(a=0.37, b=0.11)
        scaled = sub(a=0.37, b=0.11 * t)
        assert scaled.gain == abs(t) * base.gain


def test_validation_rejects_non_contractive_a():
    with pytest.raises(ValidationError):
        sub(a=1.0)
    with pytest.raises(ValidationError):
        sub(a=-1.2)
    with pytest.raises(ValidationError):
        sub(initial=(0.0, 2.0))


def test_max_composition_properties():
    rng = random.Random(111)
    v1 = lambda x, xh: abs(x - xh)
    v2 = lambda x, xh: 2 * abs(x - xh)
    comp = lambda x, xh: max(v1(x[0], xh[0]), v2(x[1], xh[1]))
    for _ in range(100):
        x = (rng.uniform(0, 1), rng.uniform(0, 1))
        xh = (rng.uniform(0, 1), rng.uniform(0, 1))
        value = comp(x, xh)
        assert value == max(value, value)  # idempotent
        assert value == max(v2(x[1], xh[1]), v1(x[0], xh[0]))  # commutative
        # monotone: inflating one local can only raise the composition
        bigger = max(v1(x[0], xh[0]) + 0.5, v2(x[1], xh[1]))
        assert bigger >= value


def test_small_gain_gate_raises():
    bad = sub(a=0.9, b=0.5)
    with pytest.raises(SmallGainError):
        compose_barriers(lambda p: 0.0, lambda p: 0.0, bad, bad,
                         delta=0.5, resolution=0.2)
    with pytest.raises(SmallGainError):
        compose_simulation(bad, bad, lambda x, y: abs(x - y),
                           lambda x, y: abs(x - y), eps=(0.5, 0.5),
                           theta=(0.5, 0.5), eta=(0.1, 0.1), resolution=0.2)


def test_compose_simulation_tracking_distance():
    """V_i = |x - xh| with eps from the local quantization arithmetic.

    The whole state interval is initial, mirroring the grid-abstraction
    construction where every abstract state is initial (condition 1b
    otherwise has no concrete partner for far-away abstract states).
    """
    s1 = sub(initial=(0.0, 1.0))
    s2 = sub(initial=(0.0, 1.0))
    eta = (0.05, 0.05)
    # local recursion |x+ - xh+| <= a*eps + b*theta + eta needs
    # eps >= (eta + b*theta) / (1 - a); theta_i = eps_j at the interface
    eps_val = (0.05 + 0.2 * 0.3) / (1 - 0.5 - 0.0)
    eps_val = max(eps_val, 0.3)
    eps = (eps_val, eps_val)
    theta = (eps[1], eps[0])
    v = lambda x, xh: abs(x - xh)
    report = compose_simulation(s1, s2, v, v, eps=eps, theta=theta,
                                eta=eta, resolution=0.1)
    assert report.gains.small_gain_ok
    for group in report.local_checks:
        for check in group:
            assert check.passed, (check.condition, check.witness)
    for check in report.interconnected_checks:
        assert check.passed, (check.condition, check.witness)
    # composed value is the max of the locals at sampled points
    assert report.composed((0.3, 0.8), (0.5, 0.1)) == max(abs(0.3 - 0.5), abs(0.8 - 0.1))
    zero = compose_simulation(s1, s2, lambda *_: 0.0, lambda *_: 0.0,
                              eps=eps, theta=theta, eta=eta, resolution=0.1)
    assert zero.composed((0.3, 0.8), (0.5, 0.1)) == 0.0


def test_compose_barriers_norm_certificate_end_to_end():
    """|(x, xh)| as local certificate: lower bound met with equality, all
    local conditions pass, and the composed max-certificate sample-passes the
    interconnected opacity-barrier check."""
    s1, s2 = sub(), sub()
    norm = lambda p: max(abs(p[0]), abs(p[1]))
    report = compose_barriers(norm, norm, s1, s2, delta=0.5, resolution=0.2)
    assert report.all_passed
    lower = [c for c in report.checks if c.condition == "norm-lower-bound"]
    assert all(c.min_margin == 0.0 for c in lower)  # equality at the corner

    interconnected = interconnect(s1, s2)
    end_to_end = check_opacity_barrier(report.composed, interconnected,
                                       delta=0.5, resolution=0.2)
    assert end_to_end.status == "sample-passed"


def test_compose_barriers_reports_local_falsification():
    s1, s2 = sub(), sub()
    bad = lambda p: -1.0  # violates the norm lower bound
    report = compose_barriers(bad, bad, s1, s2, delta=0.5, resolution=0.2)
    assert not report.all_passed
    failing = [c for c in report.checks if not c.passed]
    assert failing and failing[0].condition == "norm-lower-bound"
    assert failing[0].witness is not None
