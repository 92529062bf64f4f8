"""Composition layer for the decorated lattice.

Assembles the bond reduced density matrix correlators at a given temperature
by combining the conditional bond traces with the exact backbone Ising
correlation:

    q_xx = (K1 + K2)/8 + (K1 - K2)/2 * q_mumu
    q_zz = (K3 + K4)/8 + (K3 - K4)/2 * q_mumu
    q_mumu = eps(K_eff) / 4

with eps the +-1 nearest-neighbor correlation evaluated at the effective
coupling.  The order parameters couple to the backbone magnetizations:
M_z through the uniform one (ferromagnetic backbone, K_eff > K_c) and
dS_z through the staggered one (Neel backbone, K_eff < -K_c).  Sign
conventions: eps is odd in K_eff, so q_mumu < 0 in the Neel phase; the
symmetry-broken states are reported with the spin-up / sublattice-A-up
choice, which is unobservable in B and C.
"""

import enum
import math
import warnings
from dataclasses import dataclass

from . import bond_spectrum, corrkit, ising_exact
from .bond_spectrum import ModelParams
from .errors import DegeneratePointError, NumericalFailure, RegimeWarning

# temperatures below this are evaluated but flagged: elliptic-modulus
# rounding starts to dominate the near-critical band
MIN_VALIDATED_T = 1e-4


class Region(enum.Enum):
    """Correlation classes of the (T, J1) plane.

    I: nonlocal (B > 2, hence also entangled); II: entangled but local
    (B <= 2, C > 0); III: neither (B <= 2, C = 0).
    """

    I = "I"
    II = "II"
    III = "III"


@dataclass(frozen=True)
class CorrelatorSet:
    """Bond and backbone correlators at one (params, T) point."""

    q_xx: float
    q_zz: float
    q_mumu: float
    m_z: float
    ds_z: float
    t: float
    k_eff: float = math.nan
    near_critical: bool = False


@dataclass(frozen=True)
class MeasureSet:
    """Bell function (with branch values), concurrence and region label."""

    b: float
    n1: float
    n2: float
    c: float
    region: Region
    t: float
    j1: float


def correlators(p: ModelParams, t: float) -> CorrelatorSet:
    """All bond correlators of the decorated lattice at temperature t."""
    if not (math.isfinite(t) and t > 0):
        raise ValueError("temperature must be finite and positive")
    if t < MIN_VALIDATED_T:
        warnings.warn(
            f"T = {t!r} below validated floor {MIN_VALIDATED_T}; "
            "shifted exponentials stay finite but accuracy degrades",
            RegimeWarning,
            stacklevel=2,
        )
    beta = 1.0 / t
    eff = bond_spectrum.effective_coupling(p, beta)
    eps, flagged = ising_exact.nn_correlation_flagged(eff.k_eff)
    q_mumu = 0.25 * eps

    k = bond_spectrum.coefficients_K(p, beta)
    q_xx = (k.k1 + k.k2) / 8.0 + (k.k1 - k.k2) / 2.0 * q_mumu
    q_zz = (k.k3 + k.k4) / 8.0 + (k.k3 - k.k4) / 2.0 * q_mumu

    m_z = 0.0
    ds_z = 0.0
    kc = ising_exact.K_CRITICAL
    if eff.k_eff > kc:
        m = ising_exact.uniform_magnetization(eff.k_eff)
        coeff = bond_spectrum.bond_observable_coeffs(p, beta, "sz_sum")
        m_z = 0.5 * coeff.b * m
    elif eff.k_eff < -kc:
        m = ising_exact.staggered_magnetization(eff.k_eff)
        coeff = bond_spectrum.bond_observable_coeffs(p, beta, "sz_diff")
        ds_z = 0.5 * coeff.b * m

    return CorrelatorSet(
        q_xx=q_xx, q_zz=q_zz, q_mumu=q_mumu, m_z=m_z, ds_z=ds_z,
        t=t, k_eff=eff.k_eff, near_critical=flagged,
    )


def measures_from_correlators(cs: CorrelatorSet, p: ModelParams) -> MeasureSet:
    """Bell function, concurrence and region label for assembled correlators.

    The X state is rebuilt explicitly and run through the spectral Bell
    construction, which cross-checks the closed-form branch values."""
    state = corrkit.xstate_from_correlators(cs.m_z, cs.ds_z, cs.q_zz, cs.q_xx)
    state = corrkit.clamp_tiny_negatives(state)
    bell = corrkit.bell_horodecki(state)
    c = corrkit.concurrence_closed_form(cs.q_zz, cs.q_xx, cs.m_z)
    if bell.b > 2.0:
        region = Region.I
    elif c > 0.0:
        region = Region.II
    else:
        region = Region.III
    return MeasureSet(b=bell.b, n1=bell.n1, n2=bell.n2, c=c, region=region,
                      t=cs.t, j1=p.j1)


def measures(p: ModelParams, t: float) -> MeasureSet:
    return measures_from_correlators(correlators(p, t), p)


def qpt_boundary(j: float, delta: float) -> float:
    """Zero-temperature boundary between the two ordered phases,
    j1_c = (delta^2 - 1)/2 * j."""
    return 0.5 * (delta * delta - 1.0) * j


def critical_temperature(p: ModelParams, t_lo: float = 1e-3, t_hi: float = 2.0,
                         tol: float = 1e-6):
    """Temperature where |K_eff| crosses the Ising critical coupling.

    Returns None when no ordered phase exists on [t_lo, t_hi].  |K_eff| must
    be monotone decreasing in T on the bracket; this is verified by sampling
    and a violation raises NumericalFailure with the offending samples.
    """
    if not (0 < t_lo < t_hi):
        raise ValueError("need 0 < t_lo < t_hi")
    kc = ising_exact.K_CRITICAL

    def strength(t: float) -> float:
        return abs(bond_spectrum.effective_coupling(p, 1.0 / t).k_eff)

    n_check = 65
    ts = [t_lo * (t_hi / t_lo) ** (i / (n_check - 1)) for i in range(n_check)]
    vals = [strength(t) for t in ts]

    if vals[0] <= kc:
        # never ordered on the bracket (K_eff can change sign at higher T,
        # but its magnitude there stays far below critical for this model)
        if max(vals) > kc:
            raise NumericalFailure(
                f"|K_eff| re-enters the ordered regime on the bracket: {max(vals)!r}"
            )
        return None
    crossings = [i for i in range(n_check - 1)
                 if (vals[i] - kc) > 0 >= (vals[i + 1] - kc)]
    if vals[-1] >= kc or not crossings:
        raise NumericalFailure(
            f"|K_eff| = {vals[-1]!r} still above critical at t_hi = {t_hi!r}"
        )
    if len(crossings) > 1 or any(vals[i] > kc for i in range(crossings[0] + 1, n_check)):
        raise NumericalFailure(
            f"multiple |K_eff| = K_c crossings on bracket: samples {list(zip(ts, vals))!r}"
        )
    # monotone decrease is required only up to the crossing; above it
    # |K_eff| may pass through zero and rebound harmlessly below K_c
    first = crossings[0]
    for i in range(first + 1):
        if vals[i + 1] > vals[i] + 1e-10:
            raise NumericalFailure(
                "|K_eff| not monotone decreasing approaching the crossing: "
                f"samples {list(zip(ts[:first + 2], vals[:first + 2]))!r}"
            )

    lo, hi = ts[first], ts[first + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if strength(mid) > kc:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def zero_temperature_limits(p: ModelParams) -> CorrelatorSet:
    """Analytic T -> 0 correlators, taken per phase.

    Ferromagnetic side: every bond freezes into the fully polarized product
    state on a uniformly ordered backbone.  Antiferromagnetic side: the bond
    ground state is the entangled in-plane doublet member selected by the
    Neel-ordered backbone.  Exactly at the boundary the ground state is
    degenerate and no limit exists.
    """
    j1c = qpt_boundary(p.j, p.delta)
    j1_abs = abs(p.j1)
    if abs(j1_abs - j1c) < 1e-12:
        raise DegeneratePointError(
            f"j1 = {p.j1!r} sits on the degenerate phase boundary {j1c!r}"
        )
    if p.j1 < 0:
        warnings.warn("j1 < 0 mapped through |j1|; ds_z keeps the sign of j1",
                      RegimeWarning, stacklevel=2)
    if j1_abs > j1c:
        return CorrelatorSet(q_xx=0.0, q_zz=0.25, q_mumu=0.25, m_z=0.5,
                             ds_z=0.0, t=0.0, k_eff=math.inf)
    omega = p.omega
    q_xx = p.j * p.delta / (4.0 * omega)
    if p.j1 == 0.0:
        # decoupled backbone: no order, but the bond correlators are
        # class-independent so q_mumu never enters
        return CorrelatorSet(q_xx=q_xx, q_zz=-0.25, q_mumu=0.0, m_z=0.0,
                             ds_z=0.0, t=0.0, k_eff=0.0)
    return CorrelatorSet(q_xx=q_xx, q_zz=-0.25, q_mumu=-0.25, m_z=0.0,
                         ds_z=p.j1 / (2.0 * omega), t=0.0, k_eff=-math.inf)


def free_energy_density(p: ModelParams, t: float) -> float:
    """Reduced free energy ln Z per backbone site (two bonds per site)."""
    if not (math.isfinite(t) and t > 0):
        raise ValueError("temperature must be finite and positive")
    beta = 1.0 / t
    eff = bond_spectrum.effective_coupling(p, beta)
    return 2.0 * eff.log_prefactor + ising_exact.free_energy_density(eff.k_eff)


def specific_heat(p: ModelParams, t: float, rel_step: float = 1e-4) -> float:
    """Reduced specific heat per backbone site, beta^2 d^2(lnZ)/dbeta^2."""
    beta = 1.0 / t
    h = rel_step * beta

    def phi(b: float) -> float:
        return free_energy_density(p, 1.0 / b)

    return beta * beta * (phi(beta + h) - 2.0 * phi(beta) + phi(beta - h)) / (h * h)
