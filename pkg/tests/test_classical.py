import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonlab.classical import (
    ComparisonReport, compare, f_integral_coefficient, integrate_classical, particle_momentum,
    replay_effective,
)
from solitonlab.errors import AlignmentError, InsufficientDataError, ParameterError
from solitonlab.model import PotentialSpec

ZERO = PotentialSpec("zero")
HARM = PotentialSpec("harmonic", 1.0)


# particle integrator ----------------------------------------------------------

def test_free_particle():
    tr = integrate_classical(1.0, 0.5, ZERO, 2.0, 3.0, 0.01)
    np.testing.assert_allclose(tr.q[:, 0], 1.0 + 0.25 * tr.times, atol=1e-13)
    np.testing.assert_allclose(tr.p[:, 0], 0.5, atol=0)
    assert tr.times[-1] == pytest.approx(3.0)


def test_harmonic_closed_form():
    tr = integrate_classical(2.0, 0.0, HARM, 1.0, 4.0, 1e-3)
    np.testing.assert_allclose(tr.q[:, 0], 2 * np.cos(tr.times), atol=1e-10)
    np.testing.assert_allclose(tr.p[:, 0], -2 * np.sin(tr.times), atol=1e-10)
    assert tr.energy_drift() <= 1e-10


def test_harmonic_with_mass_and_stiffness():
    V = PotentialSpec("harmonic", 4.0)
    m = 2.0
    w = np.sqrt(4.0 / m)
    tr = integrate_classical(0.5, 1.0, V, m, 4.0, 1e-3)
    exact = 0.5 * np.cos(w * tr.times) + 1.0 / (m * w) * np.sin(w * tr.times)
    np.testing.assert_allclose(tr.q[:, 0], exact, atol=1e-9)


def test_linear_potential():
    V = PotentialSpec("linear", slope=(0.3, -0.1))
    tr = integrate_classical((0.0, 1.0), (1.0, 0.0), V, 1.0, 2.0, 0.01)
    t = tr.times[:, None]
    np.testing.assert_allclose(tr.q, [0.0, 1.0] + t * [1.0, 0.0] - 0.5 * t**2 * [0.3, -0.1],
                               atol=1e-12)
    assert tr.energy_drift() <= 1e-10


def test_well_energy_conserved():
    V = PotentialSpec("well", depth=1.0, width=2.0)
    tr = integrate_classical(1.0, 0.2, V, 1.0, 10.0, 1e-3)
    assert tr.energy_drift() <= 1e-10


def test_integrator_validation():
    with pytest.raises(ParameterError):
        integrate_classical(0.0, 0.0, ZERO, 1.0, 1.0, 0.0)
    with pytest.raises(ParameterError):
        integrate_classical(0.0, 0.0, ZERO, 0.0, 1.0, 0.1)


# replay of the effective equations ------------------------------------------------

def _oscillator(h, T=4.0, m=1.0):
    t = np.arange(0, T + h / 2, h)
    q = 2 * np.cos(t / np.sqrt(m))
    p = -2 * np.sqrt(m) * np.sin(t / np.sqrt(m))
    return t, q, p


def test_replay_exact_series_has_small_residual():
    t, q, p = _oscillator(1e-2)
    z = np.zeros_like(t)
    rr = replay_effective(t, q, p, np.ones_like(t), z, z, z, HARM)
    assert rr.max_q < 1e-4 and rr.max_p < 1e-4
    assert rr.times.size == t.size - 2


def test_replay_is_second_order():
    errs = []
    for h in (2e-2, 1e-2):
        t, q, p = _oscillator(h, m=2.0)
        z = np.zeros_like(t)
        rr = replay_effective(t, q, p, np.full_like(t, 2.0), z, z, z, PotentialSpec("harmonic", 1.0))
        errs.append(max(rr.max_q, rr.max_p))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-1.0, 1.0), which=st.sampled_from(["K", "F", "H"]))
def test_replay_detects_constant_violation(c, which):
    # adding a constant to one correction term shifts the matching residual by exactly -c
    t, q, p = _oscillator(1e-2)
    z = np.zeros_like(t)
    terms = {"K": z, "F": z, "H": z}
    base = replay_effective(t, q, p, np.ones_like(t), z, z, z, HARM)
    terms = dict(terms, **{which: np.full_like(t, c)})
    rr = replay_effective(t, q, p, np.ones_like(t), terms["K"], terms["F"], terms["H"], HARM)
    if which == "K":
        np.testing.assert_allclose(rr.rq - base.rq, -c, atol=1e-12)
        np.testing.assert_allclose(rr.rp, base.rp, atol=0)
    else:
        np.testing.assert_allclose(rr.rp - base.rp, -c, atol=1e-12)
        np.testing.assert_allclose(rr.rq, base.rq, atol=0)


def test_replay_input_checks():
    t = np.array([0.0, 0.1])
    with pytest.raises(InsufficientDataError):
        replay_effective(t, t, t, t, t, t, t, HARM)
    t = np.array([0.0, 0.1, 0.25, 0.3])
    with pytest.raises(AlignmentError):
        replay_effective(t, t, t, t + 1, t, t, t, HARM)


# comparison -----------------------------------------------------------------

def test_compare_identical_series():
    tr = integrate_classical(2.0, 0.0, HARM, 1.0, 2.0, 0.01)
    rep = compare(tr.times, tr.q, tr.p, tr, K=np.zeros(tr.times.size), H=np.zeros(tr.times.size),
                  F=np.zeros(tr.times.size), eps=0.1, eta=0.1, R_eps=1.0)
    assert rep.sup_position_error == 0.0 and rep.sup_momentum_error == 0.0
    assert rep.max_K == 0.0 and rep.F_coefficient == 0.0
    assert set(rep.as_dict()) == set(ComparisonReport.__dataclass_fields__)


def test_compare_subsamples_the_particle():
    tr = integrate_classical(2.0, 0.0, HARM, 1.0, 2.0, 0.001)
    t = tr.times[::10]
    q = tr.q[::10] + 0.01
    rep = compare(t, q, tr.p[::10], tr)
    assert rep.sup_position_error == pytest.approx(0.01, rel=1e-10)
    assert np.isnan(rep.max_K)


def test_compare_alignment_errors():
    tr = integrate_classical(2.0, 0.0, HARM, 1.0, 1.0, 0.01)
    with pytest.raises(AlignmentError):
        compare(tr.times + 0.005, tr.q, tr.p, tr)
    with pytest.raises(AlignmentError):
        compare(np.array([0.0, 2.0]), tr.q[:2], tr.p[:2], tr)
    with pytest.raises(InsufficientDataError):
        compare(np.array([]), np.zeros((0, 1)), np.zeros((0, 1)), tr)


@settings(max_examples=25, deadline=None)
@given(shift=st.floats(-5, 5))
def test_compare_translation_invariant(shift):
    V = PotentialSpec("harmonic", 1.0, center=(shift,))
    a = integrate_classical(2.0, 0.0, HARM, 1.0, 1.0, 0.01)
    b = integrate_classical(2.0 + shift, 0.0, V, 1.0, 1.0, 0.01)
    qa = a.q + 0.1 * np.sin(a.times)[:, None]
    ra = compare(a.times, qa, a.p, a)
    rb = compare(b.times, qa + shift, b.p, b)
    assert rb.sup_position_error == pytest.approx(ra.sup_position_error, abs=1e-9)


# integrated force coefficient -----------------------------------------------

def test_f_coefficient_examples():
    t = np.linspace(0, 4, 401)
    assert f_integral_coefficient(t, np.zeros_like(t)) == 0.0
    # constant F: |int| = c |b - a|, ratio tends to c |b-a| / (1 + |b-a|)
    assert f_integral_coefficient(t, np.full_like(t, 2.0)) == pytest.approx(2 * 4 / 5, rel=1e-12)
    # a zero-mean oscillation stays bounded
    c = f_integral_coefficient(t, np.cos(2 * np.pi * t))
    assert 0 < c <= 1 / np.pi
    assert f_integral_coefficient(np.array([0.0]), np.array([1.0])) == 0.0


def test_f_coefficient_scales_linearly():
    t = np.linspace(0, 3, 301)
    F = np.sin(t) + 0.3
    assert f_integral_coefficient(t, 5 * F) == pytest.approx(5 * f_integral_coefficient(t, F),
                                                             rel=1e-12)


def test_particle_momentum_rescales_to_full_mass():
    p = np.array([[0.3], [0.6]])
    np.testing.assert_allclose(particle_momentum(p, np.array([0.5, 0.6]), 2.0), [[1.2], [2.0]])
    assert particle_momentum(0.4, 0.8, 1.0) == pytest.approx(0.5)
