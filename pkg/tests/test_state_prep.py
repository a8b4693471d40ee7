import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quartit.spin import Transition, projector, selective_rotation
from quartit.state_prep import (
    initial_polarized_state,
    polarized_populations,
    prep_sequence,
    prepare,
    pseudopurity_check,
    run_sequence,
    switch_from_11,
    thermal_fraction,
)

steps = st.floats(1e-4, 1 / 6 - 1e-6)


def populations_oracle(pops, seq):
    """Population bookkeeping: pi swaps the two levels, pi/2 equalizes them (after settling)."""
    p = list(pops)
    for pulse in seq:
        i, j = pulse.transition.lo, pulse.transition.hi
        if np.isclose(abs(pulse.theta), np.pi):
            p[i], p[j] = p[j], p[i]
        elif np.isclose(abs(pulse.theta), np.pi / 2):
            p[i] = p[j] = (p[i] + p[j]) / 2
        else:
            raise AssertionError("oracle handles pi and pi/2 only")
    return np.array(p)


def test_polarized_populations():
    assert np.allclose(polarized_populations(0.1), [0.4, 0.3, 0.2, 0.1])
    assert polarized_populations(1 / 6)[3] == pytest.approx(0.0)
    with pytest.raises(ValueError):
        polarized_populations(0.2)


@settings(max_examples=30, deadline=None)
@given(steps, st.sampled_from(["00", "01", "10", "11"]),
       st.sampled_from(["single_quantum", "with_two_photon"]))
def test_prep_matches_population_oracle(d, target, variant):
    seq, rho, rep = prepare(target, d, variant)
    want = populations_oracle(polarized_populations(d), seq)
    assert np.allclose(np.real(np.diag(rho)), want, atol=1e-14)
    assert rep.pseudopure and rep.target_level == int(target, 2)
    assert rep.residual < 1e-12


def test_prep_00_example():
    _, rho, rep = prepare("00", 0.1)
    assert np.allclose(np.diag(rho).real, [0.4, 0.2, 0.2, 0.2])
    assert rep.beta == pytest.approx(0.2) and rep.alpha == pytest.approx(0.8)
    assert rep.form == "excess"


def test_11_is_deficit_and_variants_agree():
    a = prepare("11", 0.1)[1]
    b = prepare("11", 0.1, "with_two_photon")[1]
    assert np.allclose(a, b, atol=1e-12)
    assert pseudopurity_check(a).form == "deficit"
    assert np.allclose(prepare("00", 0.1)[1], prepare("00", 0.1, "with_two_photon")[1], atol=1e-12)


@pytest.mark.parametrize("target", ["00", "01", "10"])
def test_switch_from_11(target):
    seq, rho, rep = prepare(target, 0.08, via_11=True)
    assert seq[-1].transition == Transition(int(target, 2), 3)
    assert rep.pseudopure and rep.target_level == int(target, 2)


def test_pseudopurity_reports():
    mixed = pseudopurity_check(np.eye(4) / 4)
    assert mixed.verdict == "maximally mixed" and not mixed.pseudopure
    poly = pseudopurity_check(initial_polarized_state(0.1))
    assert not poly.pseudopure
    rho = 0.9 * np.eye(4) / 4 + 0.1 * projector(2)
    rep = pseudopurity_check(rho)
    assert rep.target_level == 2 and rep.beta == pytest.approx(0.1)


def test_unsettled_sequence_keeps_coherence():
    rho = run_sequence(prep_sequence("00"), initial_polarized_state(0.1), settle_after=False)
    assert abs(rho[2, 3]) > 1e-3
    assert not pseudopurity_check(rho).pseudopure


def test_thermal_fraction_formula():
    h, kb = 6.62607015e-34, 1.380649e-23
    assert thermal_fraction(60e6, 0.1) == pytest.approx(h * 60e6 / (4 * kb * 0.1), rel=1e-12)
    with pytest.raises(ValueError):
        thermal_fraction(60e6, 0.0)


def test_bad_targets():
    with pytest.raises(ValueError):
        prep_sequence("12")
    with pytest.raises(ValueError):
        switch_from_11("11")
