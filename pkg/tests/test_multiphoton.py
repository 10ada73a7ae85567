"""Photon bookkeeping: allowed line indices, process counts, scaling."""

import pytest

from qmix import multiphoton
from qmix.model import DomainError, Fock, Squeezed, TwoTone


def test_allowed_indices_two_tone_every_odd():
    assert multiphoton.allowed_indices("two_tone", 5) == (-5, -3, -1, 1, 3, 5)
    assert multiphoton.allowed_indices(TwoTone(0.1, 0.1), 2) == (-1, 1)


def test_allowed_indices_squeezed_one_mod_four():
    assert multiphoton.allowed_indices("squeezed", 8) == (-7, -3, 1, 5)
    assert multiphoton.allowed_indices("squeezed", 2) == (1,)


def test_allowed_indices_fock_three_lines():
    assert multiphoton.allowed_indices("fock", 7) == (-1, 1, 3)
    assert multiphoton.allowed_indices("fock", 1) == (-1, 1)


def test_allowed_indices_rejects_bad_input():
    with pytest.raises(DomainError):
        multiphoton.allowed_indices("two_tone", 0)
    with pytest.raises(DomainError):
        multiphoton.allowed_indices("thermal", 5)


@pytest.mark.parametrize("kind", ["two_tone", "squeezed", "fock"])
def test_energy_balance_closes_for_every_descriptor(kind):
    for n in multiphoton.allowed_indices(kind, 9):
        desc = multiphoton.process_descriptor(kind, n)
        assert desc.energy_index() == n
        assert desc.n == n


def test_two_tone_descriptor_counts():
    # Line 3: two photons from tone 1 in, one returned to tone 2.
    d3 = multiphoton.process_descriptor("two_tone", 3)
    assert (d3.coh1_absorbed, d3.coh2_absorbed) == (2, -1)
    assert d3.scaling == (2, 1)
    # The mirror line swaps the roles of the tones.
    dm3 = multiphoton.process_descriptor("two_tone", -3)
    assert (dm3.coh1_absorbed, dm3.coh2_absorbed) == (-1, 2)
    assert dm3.scaling == (1, 2)
    d1 = multiphoton.process_descriptor("two_tone", 1)
    assert (d1.coh1_absorbed, d1.coh2_absorbed) == (1, 0)
    assert multiphoton.process_descriptor("two_tone", -1).scaling == (0, 1)


def test_squeezed_descriptor_counts():
    # Line -3: one bath pair absorbed, one photon handed back to the tone.
    dm3 = multiphoton.process_descriptor("squeezed", -3)
    assert (dm3.coh1_absorbed, dm3.pairs_absorbed) == (-1, 1)
    assert dm3.scaling == (1, 1)
    d5 = multiphoton.process_descriptor("squeezed", 5)
    assert (d5.coh1_absorbed, d5.pairs_absorbed) == (3, -1)
    assert d5.scaling == (3, 1)
    d1 = multiphoton.process_descriptor(Squeezed(0.1, 2.0, 1.0), 1)
    assert (d1.coh1_absorbed, d1.pairs_absorbed) == (1, 0)


def test_fock_descriptor_counts():
    # Line 3: two tone photons in, one photon returned to the pulse.
    d3 = multiphoton.process_descriptor("fock", 3)
    assert (d3.coh1_absorbed, d3.fock_absorbed) == (2, -1)
    assert d3.scaling == (2, 1)
    dm1 = multiphoton.process_descriptor(Fock(0.1, 0.5, 0.5, 10.0), -1)
    assert (dm1.coh1_absorbed, dm1.fock_absorbed) == (0, 1)
    assert dm1.scaling == (0, 1)


def test_forbidden_lines_have_no_descriptor():
    with pytest.raises(DomainError):
        multiphoton.process_descriptor("two_tone", 2)
    with pytest.raises(DomainError):
        multiphoton.process_descriptor("squeezed", 3)
    with pytest.raises(DomainError):
        multiphoton.process_descriptor("fock", 5)


def test_predicted_scaling_matches_descriptor():
    assert multiphoton.predicted_scaling("two_tone", 5) == (3, 2)
    assert multiphoton.predicted_scaling("fock", 3) == (2, 1)
    assert multiphoton.predicted_scaling("squeezed", -7) == (3, 2)
