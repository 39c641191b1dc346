"""Single-mode physics of the two integrable battery chains.

Both chains reduce, after a Jordan-Wigner map and a momentum-space
Bogoliubov rotation, to independent two-level problems labelled by a
momentum ``k``.  Everything downstream (transition rates, clock bias,
battery lifetime) is assembled from the four single-mode quantities
computed here: the dispersion, the Bogoliubov angle, the angle mismatch
between the two endpoints of a quench, and the resulting quasiparticle
occupation.

Two models are supported:

``ISING_XY``
    Anisotropic XY chain in a transverse field, exchange set to one, so
    the couplings along x and y are ``(1 + kappa)/2`` and
    ``(1 - kappa)/2``.  Dispersion
    ``eps_k = 2*sqrt((h - cos k)**2 + (kappa*sin k)**2)`` and rotation
    angle ``tan(2 theta_k) = kappa*sin k / (h - cos k)``.  The quenched
    parameter is the field ``h``.

``XX_RING``
    Hard-core bosons on a ring with hopping ``t``, staggered potential
    ``V`` and threaded flux ``phi``.  Dispersion
    ``eps_k = sqrt((2 t cos(k - phi))**2 + V**2)`` on the reduced zone
    ``|k| < pi/2`` and angle ``tan(2 theta_k) = V / (2 t cos k)``.  The
    quenched parameter is ``V``; the flux is stored but must stay zero
    wherever angles (and hence rates) are evaluated.

Units: ``hbar = k_B = 1`` everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import GaplessMode, OutOfBand, VanHoveSingularity

# A mode below this energy counts as gapless and has no well defined
# Bogoliubov angle.
GAPLESS_TOL = 1e-10

# Group velocities below this magnitude are treated as a van Hove point.
DERIVATIVE_TOL = 1e-6

# Residual tolerance on eps_k - eps, i.e. half the tolerance on the pair
# energy 2 eps_k used by the resonance solvers.
_ROOT_RESIDUAL_TOL = 5e-13


class ModelKind(Enum):
    ISING_XY = "ising_xy"
    XX_RING = "xx_ring"


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one chain Hamiltonian.

    Only the fields relevant to ``kind`` are meaningful; the others stay
    at zero.  Use :meth:`ising` or :meth:`xx_ring` instead of the raw
    constructor.
    """

    kind: ModelKind
    h: float = 0.0
    kappa: float = 0.0
    t: float = 0.0
    V: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("h", "kappa", "t", "V", "phi"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.kind is ModelKind.XX_RING and self.t <= 0.0:
            raise ValueError(f"hopping t must be positive, got {self.t!r}")

    @classmethod
    def ising(cls, h: float, kappa: float = 1.0) -> "ModelSpec":
        return cls(ModelKind.ISING_XY, h=float(h), kappa=float(kappa))

    @classmethod
    def xx_ring(cls, t: float, V: float, phi: float = 0.0) -> "ModelSpec":
        return cls(ModelKind.XX_RING, t=float(t), V=float(V), phi=float(phi))


@dataclass(frozen=True)
class QuenchSpec:
    """A sudden switch between two Hamiltonians of the same chain.

    Only the quenched parameter (``h`` for the transverse-field chain,
    ``V`` for the ring) may differ between ``initial`` and ``final``.
    """

    initial: ModelSpec
    final: ModelSpec

    def __post_init__(self):
        a, b = self.initial, self.final
        if a.kind is not b.kind:
            raise ValueError("both endpoints must describe the same model")
        if a.kind is ModelKind.ISING_XY:
            if a.kappa != b.kappa:
                raise ValueError("anisotropy kappa must not change across the quench")
        else:
            if a.t != b.t:
                raise ValueError("hopping t must not change across the quench")
            if a.phi != b.phi:
                raise ValueError("flux phi must not change across the quench")

    @classmethod
    def ising(cls, h_i: float, h_f: float, kappa: float = 1.0) -> "QuenchSpec":
        return cls(ModelSpec.ising(h_i, kappa), ModelSpec.ising(h_f, kappa))

    @classmethod
    def xx_ring(cls, V_i: float, V_f: float, t: float = 1.0) -> "QuenchSpec":
        return cls(ModelSpec.xx_ring(t, V_i), ModelSpec.xx_ring(t, V_f))

    @property
    def kind(self) -> ModelKind:
        return self.initial.kind

    @property
    def is_null(self) -> bool:
        return self.initial == self.final


@dataclass(frozen=True)
class ModeState:
    """Quench data of a single momentum mode."""

    k: float
    eps_i: float
    eps_f: float
    theta_i: float
    theta_f: float
    dtheta: float
    n_k: float

    @property
    def cos_two_dtheta(self) -> float:
        # Defined through n_k so that sin**2 + cos**2 = 1 holds exactly.
        return 1.0 - 2.0 * self.n_k

    @property
    def inverted(self) -> bool:
        """True when the mode carries more than half an excitation."""
        return self.n_k > 0.5


@dataclass(frozen=True)
class EnergyRoot:
    """One solution of ``eps_k == eps`` in the model's half zone."""

    k: float
    u: float  # cos(k)
    velocity: float  # d eps_k / dk at the root, signed


@dataclass(frozen=True)
class DensityOfStates:
    eps: float
    roots: tuple[EnergyRoot, ...]
    per_root: tuple[float, ...]
    total: float


def dispersion(model: ModelSpec, k):
    """Quasiparticle energy ``eps_k`` (scalar in, scalar out)."""
    karr = np.asarray(k, dtype=float)
    if model.kind is ModelKind.ISING_XY:
        e = 2.0 * np.sqrt((model.h - np.cos(karr)) ** 2 + (model.kappa * np.sin(karr)) ** 2)
    else:
        e = np.sqrt((2.0 * model.t * np.cos(karr - model.phi)) ** 2 + model.V**2)
    return e if e.ndim else float(e)


def group_velocity(model: ModelSpec, k):
    """Analytic ``d eps_k / dk``.

    At a gapless point the velocity is a 0/0 limit; this returns ``nan``
    there and the callers guard against it.
    """
    karr = np.asarray(k, dtype=float)
    eps = np.asarray(dispersion(model, karr), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if model.kind is ModelKind.ISING_XY:
            num = 4.0 * np.sin(karr) * (model.h - (1.0 - model.kappa**2) * np.cos(karr))
        else:
            kk = karr - model.phi
            num = -4.0 * model.t**2 * np.sin(kk) * np.cos(kk)
        v = np.where(eps > 0.0, num / np.where(eps > 0.0, eps, 1.0), np.nan)
    return v if v.ndim else float(v)


def bogoliubov_angle(model: ModelSpec, k):
    """Rotation angle ``theta_k`` diagonalizing the two-level mode problem.

    The half angle is taken from ``atan2`` so that
    ``cos(2 theta_k) = 2 (h - cos k) / eps_k`` (transverse-field chain)
    and ``cos(2 theta_k) = 2 t cos k / eps_k`` (ring) hold with the
    matching ``sin`` branch.

    Raises
    ------
    GaplessMode
        If any requested mode has ``eps_k < 1e-10``.
    ValueError
        For a ring with nonzero flux; the angle is only defined at
        ``phi = 0``.
    """
    karr = np.asarray(k, dtype=float)
    eps = np.asarray(dispersion(model, karr), dtype=float)
    if np.any(eps < GAPLESS_TOL):
        bad = np.atleast_1d(karr)[np.atleast_1d(eps < GAPLESS_TOL)][0]
        raise GaplessMode(f"mode k={bad!r} is gapless (eps < {GAPLESS_TOL})")
    if model.kind is ModelKind.ISING_XY:
        two_theta = np.arctan2(model.kappa * np.sin(karr), model.h - np.cos(karr))
    else:
        if model.phi != 0.0:
            raise ValueError("Bogoliubov angle is defined at zero flux only")
        two_theta = np.arctan2(model.V, 2.0 * model.t * np.cos(karr))
    theta = 0.5 * two_theta
    return theta if theta.ndim else float(theta)


def mode_state(quench: QuenchSpec, k: float) -> ModeState:
    """Single-mode summary of a quench at momentum ``k``.

    The occupation ``n_k = sin(dtheta)**2`` equals
    ``(1 - cos(2 dtheta)) / 2``; both endpoint Hamiltonians must be
    gapped at ``k``.
    """
    k = float(k)
    eps_i = dispersion(quench.initial, k)
    eps_f = dispersion(quench.final, k)
    theta_i = bogoliubov_angle(quench.initial, k)
    theta_f = bogoliubov_angle(quench.final, k)
    dtheta = theta_f - theta_i
    n_k = math.sin(dtheta) ** 2
    return ModeState(k=k, eps_i=eps_i, eps_f=eps_f, theta_i=theta_i,
                     theta_f=theta_f, dtheta=dtheta, n_k=n_k)


def _domain_max(model: ModelSpec) -> float:
    # Half zone carrying one representative of each +-k pair.
    return math.pi if model.kind is ModelKind.ISING_XY else 0.5 * math.pi


def band_edges(model: ModelSpec, reduced: bool = False) -> tuple[float, float]:
    """Extrema of ``eps_k`` over the model's momentum domain.

    With ``reduced=True`` the transverse-field chain is restricted to
    ``cos k >= 0``, the domain the rate integrals live on; the ring's
    zone is already reduced.
    """
    if model.kind is ModelKind.XX_RING:
        lo = abs(model.V)
        hi = math.hypot(2.0 * model.t, model.V)
        return lo, hi
    h, kap = model.h, model.kappa
    us = [1.0, 0.0 if reduced else -1.0]
    a = 1.0 - kap**2
    if abs(a) > 1e-12:
        u_star = h / a
        lo_u = 0.0 if reduced else -1.0
        if lo_u < u_star < 1.0:
            us.append(u_star)
    vals = [2.0 * math.sqrt((h - u) ** 2 + kap**2 * (1.0 - u**2)) for u in us]
    return min(vals), max(vals)


def _refine_root(model: ModelSpec, eps: float, k0: float, k_max: float) -> float:
    """Polish an analytic root of ``eps_k = eps`` by bracketed bisection."""

    def f(k):
        return dispersion(model, k) - eps

    if abs(f(k0)) <= _ROOT_RESIDUAL_TOL * max(1.0, eps):
        return k0
    delta = 1e-9
    while delta <= 1e-3:
        a = max(0.0, k0 - delta)
        b = min(k_max, k0 + delta)
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0.0:
            k1 = brentq(f, a, b, xtol=1e-15, rtol=8.9e-16)
            if abs(f(k1)) <= _ROOT_RESIDUAL_TOL * max(1.0, eps):
                return k1
            return k1
        delta *= 4.0
    # No sign change nearby: k0 sits at an extremum touching eps. Keep it;
    # the velocity guard downstream classifies it.
    return k0


def energy_roots(model: ModelSpec, eps: float) -> tuple[EnergyRoot, ...]:
    """All momenta in the half zone with ``eps_k == eps``.

    For the transverse-field chain the half zone is ``k in [0, pi]``
    (``u = cos k in [-1, 1]``); for the ring it is ``k in [0, pi/2]``.
    Returns an empty tuple when ``eps`` lies outside the band.
    """
    eps = float(eps)
    if eps < 0.0:
        return ()
    k_max = _domain_max(model)
    us: list[float] = []
    if model.kind is ModelKind.XX_RING:
        c2 = (eps**2 - model.V**2) / (4.0 * model.t**2)
        if -1e-14 <= c2 <= 1.0 + 1e-12:
            us.append(math.sqrt(min(max(c2, 0.0), 1.0)))
    else:
        h, kap = model.h, model.kappa
        a = 1.0 - kap**2
        b = -2.0 * h
        c = h**2 + kap**2 - eps**2 / 4.0
        if abs(a) < 1e-12:
            if abs(b) < 1e-12:
                # Flat band (|kappa| = 1, h = 0): eps_k identically 2.
                if abs(c) < 1e-12:
                    raise VanHoveSingularity(
                        "flat band: the density of states is not defined")
                us = []
            else:
                us.append(-c / b)
        else:
            disc = b * b - 4.0 * a * c
            if disc >= 0.0:
                if disc == 0.0:
                    us.append(-b / (2.0 * a))
                else:
                    sq = math.sqrt(disc)
                    q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else sq / 2.0
                    u1 = q / a
                    us.append(u1)
                    if q != 0.0:
                        u2 = c / q
                        if abs(u2 - u1) > 1e-12:
                            us.append(u2)
        us = [min(1.0, max(-1.0, u)) for u in us if -1.0 - 1e-12 <= u <= 1.0 + 1e-12]
    roots = []
    for u in sorted(set(us)):
        k0 = math.acos(u)
        if k0 > k_max + 1e-12:
            continue
        k = _refine_root(model, eps, min(k0, k_max), k_max)
        roots.append(EnergyRoot(k=k, u=math.cos(k), velocity=group_velocity(model, k)))
    return tuple(roots)


def density_of_states(model: ModelSpec, eps: float) -> DensityOfStates:
    """Per-root ``1/|d eps_k/dk|`` at energy ``eps`` and their sum.

    Each root represents one ``+-k`` pair of the full zone; the reported
    weight is per root, not doubled.

    Raises
    ------
    OutOfBand
        If no momentum reaches ``eps``.
    VanHoveSingularity
        If any root has ``|d eps_k/dk| < 1e-6``.
    """
    roots = energy_roots(model, eps)
    if not roots:
        lo, hi = band_edges(model)
        raise OutOfBand(f"eps={eps!r} outside the band [{lo:.6g}, {hi:.6g}]")
    weights = []
    for r in roots:
        v = abs(r.velocity)
        if not math.isfinite(v) or v < DERIVATIVE_TOL:
            raise VanHoveSingularity(
                f"group velocity {v!r} at k={r.k!r} is below tolerance {DERIVATIVE_TOL}")
        weights.append(1.0 / v)
    return DensityOfStates(eps=float(eps), roots=roots,
                           per_root=tuple(weights), total=sum(weights))
