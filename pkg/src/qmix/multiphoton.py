"""Photon bookkeeping for the quasi-discrete emission lines.

Each stationary emission line at w_d + n delta_w is fed by an elementary
cycle that exchanges quanta with the available sources (the two coherent
tones, correlated bath pairs, or the single-photon pulse train) and emits
one photon into the line.  Counts are signed: positive means net
absorption from that source, negative means net stimulated emission back
into it.  With tone 1 sitting at +delta_w, tone 2 and the pulse carrier
at -delta_w, and a correlated pair carrying -2 delta_w in total, energy
balance reads

    n = coh1_absorbed - coh2_absorbed - 2 * pairs_absorbed - fock_absorbed

and the lowest-order cycle fixes how the line scales with the source
amplitudes.  Example: the two-tone n = 3 line absorbs two tone-1 photons
and returns one photon to tone 2 (counts (2, -1)), so it grows as
omega1^2 * omega2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from .model import DomainError, Fock, Squeezed, TwoTone

_KINDS = ("two_tone", "squeezed", "fock")


def _kind_of(scenario_or_kind: Union[str, TwoTone, Squeezed, Fock]) -> str:
    kind = getattr(scenario_or_kind, "kind", scenario_or_kind)
    if kind not in _KINDS:
        raise DomainError(f"unknown scenario kind {kind!r}")
    return kind


def allowed_indices(scenario_or_kind, n_max: int) -> Tuple[int, ...]:
    """Line indices that survive energy balance, restricted to |n| <= n_max.

    Two coherent tones populate every odd n.  A single tone plus a
    pair-correlated bath populates n = 1 mod 4 only, since trading a pair
    against tone photons moves the index in steps of four.  The pulse
    train stops at the single-correlator level and gives exactly
    {-1, +1, +3}.
    """
    kind = _kind_of(scenario_or_kind)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if kind == "two_tone":
        return tuple(n for n in range(-n_max, n_max + 1) if n % 2 != 0)
    if kind == "squeezed":
        return tuple(n for n in range(-n_max, n_max + 1) if n % 4 == 1)
    return tuple(n for n in (-1, 1, 3) if abs(n) <= n_max)


@dataclass(frozen=True)
class ProcessDescriptor:
    """Lowest-order exchange cycle behind one emission line.

    ``scaling`` is the pair of absolute photon counts (first source,
    second source); |S_n| grows with that power law in the two source
    amplitudes.  The second source is tone 2, the bath pair correlator,
    or the pulse amplitude depending on the scenario.
    """

    n: int
    coh1_absorbed: int
    coh2_absorbed: int
    pairs_absorbed: int
    fock_absorbed: int
    scaling: Tuple[int, int]

    def energy_index(self) -> int:
        """Frame index of the emitted photon implied by the counts."""
        return (
            self.coh1_absorbed
            - self.coh2_absorbed
            - 2 * self.pairs_absorbed
            - self.fock_absorbed
        )


def process_descriptor(scenario_or_kind, n: int) -> ProcessDescriptor:
    """Describe the lowest-order process feeding line n.

    Raises DomainError for indices that energy balance forbids.
    """
    kind = _kind_of(scenario_or_kind)
    if n not in allowed_indices(kind, max(abs(n), 1)):
        raise DomainError(f"line n={n} carries no {kind} process")
    if kind == "two_tone":
        # n = 2p+1: absorb p+1 photons from one tone, return p to the
        # other; mirrored for negative n.
        p = (abs(n) - 1) // 2
        c1, c2 = (p + 1, -p) if n > 0 else (-p, p + 1)
        return ProcessDescriptor(n, c1, c2, 0, 0, (abs(c1), abs(c2)))
    if kind == "squeezed":
        # n = 4k+1.  Each step of four trades one pair against two tone
        # photons: emitting a pair (k > 0) costs two extra absorbed tone
        # photons, absorbing one (k < 0) returns two.
        k = (n - 1) // 4
        coh = 2 * k + 1
        return ProcessDescriptor(n, coh, 0, -k, 0, (abs(coh), abs(k)))
    # fock: n = -1 is the scattered pulse photon itself, n = +1 the tone
    # line, n = +3 the four-wave line (two tone photons in, one photon
    # returned to the pulse carrier).
    table = {
        -1: ProcessDescriptor(-1, 0, 0, 0, 1, (0, 1)),
        1: ProcessDescriptor(1, 1, 0, 0, 0, (1, 0)),
        3: ProcessDescriptor(3, 2, 0, 0, -1, (2, 1)),
    }
    return table[n]


def predicted_scaling(scenario_or_kind, n: int) -> Tuple[int, int]:
    """Leading power law of |S_n| in the two source strengths.

    Returns (a, b): |S_n| ~ x^a * y^b with (x, y) = (omega1, omega2),
    (omega1, |m_bath|) or (omega1, pulse overlap) by scenario.
    """
    return process_descriptor(scenario_or_kind, n).scaling
