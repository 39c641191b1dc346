"""How long the quenched chain can keep the clock running.

The chain is a battery: the quench loads every resonant mode pair with
occupation ``n_k``, and each climb of the ladder drains one quantum
``epsilon0`` from it.  The extractable energy near resonance is the
mode density times the absorption weight ``cos(dtheta)**2``,

    E_av = epsilon0 * (L / 2 pi) * sum_roots 2 * cos(dtheta)**2 / |v|,

an extensive quantity (the sum runs over the same reduced-zone roots
that feed the rates, with the same factor 2 standing for the +-k pair;
``v`` is the band slope there).  A tick costs ``(d - 1) * epsilon0``,
so the battery holds ``E_av / E_ph`` ticks.  The
closed-form lifetime rescales the drain by the pumping asymmetry,

    T_star = -(gamma_up + gamma_down) / chi_second * dos_term,

defined only while the chain actually pumps (``chi_second < 0``); a
passive chain raises :class:`PassiveState`.  The renewal estimate
``n_ticks * mean_tick_time`` instead uses the exact tick interval of
the ladder, and their quotient ``formula_ratio`` exposes the clock-speed
factor separating the two conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .clock import LadderSpec, ladder_rates, solve_first_passage
from .errors import PassiveState
from .rates import SYMMETRY_FACTOR, QubitCoupling, Rates, transition_rates
from .spectra import QuenchSpec


@dataclass(frozen=True)
class LifetimeReport:
    """Energy budget and lifetime of the chain-powered clock."""

    available_energy: float
    tick_energy: float
    tick_budget: float
    lifetime: float
    renewal_lifetime: float
    formula_ratio: float
    mean_tick_time: float


def _dos_term(rates: Rates) -> float:
    # weight = 1/(2|v|) per root, so the single-particle density 1/|v| is
    # twice that; the symmetry factor counts the +-k partner as the rates do.
    L = rates.coupling.L
    return L / (2.0 * math.pi) * sum(
        SYMMETRY_FACTOR * 2.0 * c.weight * (1.0 - c.mode.n_k) for c in rates.roots)


def available_energy(quench: QuenchSpec, coupling: QubitCoupling) -> float:
    """Extractable energy stored in the resonant modes, ``epsilon0 * dos_term``."""
    rates = transition_rates(quench, coupling)
    return coupling.epsilon0 * _dos_term(rates)


def lifetime(quench: QuenchSpec, coupling: QubitCoupling,
             ladder: LadderSpec) -> LifetimeReport:
    """Battery lifetime of the chain driving the given ladder clock.

    The ladder rung must be resonant with the probe gap; mismatched
    energies would make the golden-rule rates inapplicable.
    """
    if not math.isclose(ladder.epsilon_w, coupling.epsilon0,
                        rel_tol=1e-9, abs_tol=0.0):
        raise ValueError(
            f"ladder rung epsilon_w={ladder.epsilon_w!r} must equal the probe "
            f"gap epsilon0={coupling.epsilon0!r}")
    rates = transition_rates(quench, coupling)
    chi = rates.chi_second
    if chi >= 0.0:
        raise PassiveState(
            f"chi_second={chi!r} >= 0: the chain does not pump at this gap")
    dos = _dos_term(rates)
    e_av = coupling.epsilon0 * dos
    e_ph = (ladder.d - 1) * ladder.epsilon_w
    budget = e_av / e_ph
    t_star = -(rates.total / chi) * dos
    fp = solve_first_passage(ladder_rates(rates, ladder), ladder)
    renewal = budget * fp.mean_tick_time
    return LifetimeReport(available_energy=e_av, tick_energy=e_ph,
                          tick_budget=budget, lifetime=t_star,
                          renewal_lifetime=renewal,
                          formula_ratio=renewal / t_star,
                          mean_tick_time=fp.mean_tick_time)
