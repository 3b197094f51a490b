import math

import numpy as np
import pytest

from oracles import SPINDLE_FOCK_ANGLE
from petd import (DomainError, Profile, Verdict, WaveParams, make_cone, make_spindle,
                  validate_paraxial)


def test_cone_values():
    c = make_cone(0.1)
    assert c.f(2.0) == pytest.approx(0.2)
    assert c.f_dot(2.0) == pytest.approx(0.1)
    assert c.f_ddot(2.0) == 0.0
    assert c.f(0.0) == 0.0
    assert make_cone(0.05).f(10.0) == pytest.approx(0.5)
    assert c.is_cone and not c.is_compact


def test_spindle_values():
    s = make_spindle(0.1, 1.0, 5.0)
    assert s.f(3.0) == pytest.approx(0.1 * 4.0)
    assert s.f(1.0) == pytest.approx(0.0, abs=1e-15)
    assert s.f(5.0) == pytest.approx(0.0, abs=1e-15)
    assert s.f_dot(1.0) == pytest.approx(0.4)
    assert s.f_dot(5.0) == pytest.approx(-0.4)
    assert s.f_ddot(2.0) == pytest.approx(-8 * 0.1 / 4.0)
    assert s.is_compact and not s.is_cone


@pytest.mark.parametrize("prof", [make_cone(0.07), make_spindle(0.05, 0.0, 10.0),
                                  make_spindle(0.2, -1.0, 3.0)])
def test_finite_difference_derivatives(prof):
    x = prof.sample_points(41)[5:-5]
    h = 1e-5
    fd1 = (prof.f(x + h) - prof.f(x - h)) / (2 * h)
    fd2 = (prof.f(x + h) - 2 * prof.f(x) + prof.f(x - h)) / h ** 2
    assert np.allclose(fd1, prof.f_dot(x), rtol=1e-6, atol=1e-9)
    assert np.allclose(fd2, prof.f_ddot(x), rtol=1e-3, atol=1e-4)


def test_constructor_errors():
    for a in (0.0, -0.1, 1.0, 2.0):
        with pytest.raises(DomainError):
            make_cone(a)
    with pytest.raises(DomainError):
        make_spindle(0.1, 2.0, 1.0)
    with pytest.raises(DomainError):
        make_spindle(-0.1, 0.0, 1.0)
    with pytest.raises(DomainError):
        Profile(np.array([-1.0, 0.0]), 0.0, 1.0)
    with pytest.raises(DomainError):
        Profile(np.array([0.0, 0.0, 1.0]), 0.0, math.inf)


def test_wave_params():
    wp = WaveParams.from_eta(1000.0, 2e-3, 0.01)
    assert wp.k == pytest.approx(1000 + 2j)
    assert wp.eta == pytest.approx(2e-3)
    assert wp.with_eta(0.0).k == 1000.0
    for bad in (dict(k=-1.0), dict(k=1.0 - 0.1j), dict(k=1.0, theta=-0.1),
                dict(k=float("nan"))):
        with pytest.raises(DomainError):
            WaveParams(**bad)


def test_validate_cone_passes():
    rep = validate_paraxial(make_cone(0.05), WaveParams(1000.0))
    assert rep.max_slope == pytest.approx(0.05)
    assert rep.max_fock_angle == 0.0
    assert math.isinf(rep.fock_length)
    assert rep.passed


def test_validate_incidence_grades():
    c = make_cone(0.05)
    assert validate_paraxial(c, WaveParams(1000.0, 0.5)).verdict["incidence"] == Verdict.WARN
    assert validate_paraxial(c, WaveParams(1000.0, 0.8)).verdict["incidence"] == Verdict.FAIL
    assert validate_paraxial(c, WaveParams(1000.0, 0.2)).verdict["incidence"] == Verdict.PASS


def test_validate_spindle_fock_angle():
    rep = validate_paraxial(make_spindle(0.1, 0.0, 10.0), WaveParams(200.0))
    assert rep.max_fock_angle == pytest.approx(SPINDLE_FOCK_ANGLE, abs=5e-5)
    assert rep.max_slope == pytest.approx(0.4)
    assert rep.verdict["slope"] == Verdict.WARN
    d = rep.as_dict()
    assert d["verdict"]["curvature"] == "pass"


def test_validate_monotone_in_slope():
    worst = [validate_paraxial(make_cone(a), WaveParams(100.0)).worst
             for a in (0.05, 0.2, 0.35, 0.6, 0.9)]
    assert worst == sorted(worst)
