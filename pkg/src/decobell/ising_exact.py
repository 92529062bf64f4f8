"""Exact thermodynamics of the square-lattice Ising model with +-1 spins.

All quantities are functions of the reduced coupling K = beta*J.  The exact
results used here are standard:

    critical coupling      K_c = ln(1 + sqrt(2)) / 2,  sinh(2 K_c) = 1
    nn correlation (K>0)   eps = coth(2K)/2 * [1 + (2/pi)(2 tanh^2(2K) - 1) EK(k)]
                           with modulus k = 2 sinh(2K)/cosh^2(2K)
    magnetization (K>Kc)   m = (1 - sinh(2K)^-4)^(1/8)
    free energy density    ln Z / N = ln(2 cosh 2K)
                           + (1/pi) int_0^{pi/2} ln[(1 + sqrt(1 - k^2 sin^2 t))/2] dt

eps is extended to K < 0 as an odd function (bipartite sublattice mapping),
under which the uniform magnetization vanishes and the staggered one equals
m(|K|).  The complete elliptic integral EK is evaluated by the
arithmetic-geometric mean, which converges quadratically.
"""

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad

from .errors import DomainError, NearCriticalWarning, NumericalFailure

K_CRITICAL = 0.5 * math.log(1.0 + math.sqrt(2.0))
EPS_CRITICAL = math.sqrt(2.0) / 2.0

# beyond this coupling eps and m differ from 1 by far less than 1e-15
_SATURATION_K = 20.0
# half-width of the guard band where the elliptic modulus rounds to 1
_GUARD_BAND = 1e-10


@dataclass(frozen=True)
class IsingPoint:
    """Reduced coupling with its derived correlation and magnetization."""

    k: float
    epsilon: float
    magnetization: float


def critical_coupling() -> float:
    """Self-dual critical coupling of the square lattice."""
    return K_CRITICAL


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus convention.

    AGM iteration: K(k) = pi / (2 * agm(1, sqrt(1 - k^2))).  The integral
    diverges logarithmically at k = 1, so moduli within 1e-12 of 1 are
    rejected instead of returning a huge low-accuracy value.
    """
    if not math.isfinite(k) or k < 0.0 or k >= 1.0 - 1e-12:
        raise DomainError(f"modulus {k!r} outside [0, 1 - 1e-12)")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    # quadratic convergence: 8 sweeps reach the rounding floor from any
    # admissible modulus; the gap test alone can stall at the last bit
    for _ in range(12):
        if abs(a - b) <= 1e-15 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def _nn_correlation_positive(k_red: float) -> float:
    s2 = math.sinh(2.0 * k_red)
    c2 = math.cosh(2.0 * k_red)
    modulus = 2.0 * s2 / (c2 * c2)
    ek = elliptic_K(modulus)
    t2 = math.tanh(2.0 * k_red) ** 2
    return 0.5 * (c2 / s2) * (1.0 + (2.0 / math.pi) * (2.0 * t2 - 1.0) * ek)


def nn_correlation_flagged(k_red: float) -> tuple:
    """Nearest-neighbor correlation and a near-critical flag.

    The flag is set when |K| falls in the guard band around K_c where the
    elliptic modulus rounds to 1; there the exact critical value
    sqrt(2)/2 is substituted (one-sided limits agree).
    """
    if not math.isfinite(k_red):
        raise ValueError("coupling must be finite")
    if k_red == 0.0:
        return 0.0, False
    sign = math.copysign(1.0, k_red)
    k_abs = abs(k_red)
    if k_abs >= _SATURATION_K:
        return sign * 1.0, False
    if abs(k_abs - K_CRITICAL) < _GUARD_BAND:
        return sign * EPS_CRITICAL, True
    try:
        return sign * _nn_correlation_positive(k_abs), False
    except DomainError:
        # modulus rounded into the rejected band; |K - K_c| ~ 5e-7 or less
        return sign * EPS_CRITICAL, True


def nn_correlation(k_red: float) -> float:
    """Nearest-neighbor correlation <s_i s_j>, odd in K."""
    eps, flagged = nn_correlation_flagged(k_red)
    if flagged:
        warnings.warn(
            f"coupling {k_red!r} within guard band of K_c; returning critical value",
            NearCriticalWarning,
            stacklevel=2,
        )
    return eps


def spontaneous_magnetization(k_red: float) -> float:
    """Zero-field order parameter (1 - sinh(2|K|)^-4)^(1/8), 0 below K_c."""
    if not math.isfinite(k_red):
        raise ValueError("coupling must be finite")
    k_abs = abs(k_red)
    if k_abs <= K_CRITICAL:
        return 0.0
    if k_abs >= _SATURATION_K:
        return 1.0
    return (1.0 - math.sinh(2.0 * k_abs) ** -4) ** 0.125


def uniform_magnetization(k_red: float) -> float:
    """Uniform order parameter; nonzero only for ferromagnetic K > K_c."""
    return spontaneous_magnetization(k_red) if k_red > K_CRITICAL else 0.0


def staggered_magnetization(k_red: float) -> float:
    """Staggered order parameter; nonzero only for K < -K_c."""
    return spontaneous_magnetization(k_red) if k_red < -K_CRITICAL else 0.0


def ising_point(k_red: float) -> IsingPoint:
    eps, _ = nn_correlation_flagged(k_red)
    return IsingPoint(k=k_red, epsilon=eps, magnetization=spontaneous_magnetization(k_red))


def free_energy_density(k_red: float) -> float:
    """Reduced free energy ln Z per site (even in K); ln 2 at K = 0."""
    if not math.isfinite(k_red):
        raise ValueError("coupling must be finite")
    k_abs = abs(k_red)
    if k_abs == 0.0:
        return math.log(2.0)
    s2 = math.sinh(2.0 * k_abs)
    c2 = math.cosh(2.0 * k_abs)
    modulus = 2.0 * s2 / (c2 * c2)
    m2 = modulus * modulus

    def integrand(theta: float) -> float:
        return math.log(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - m2 * math.sin(theta) ** 2))))

    val, err = quad(integrand, 0.0, 0.5 * math.pi, limit=200,
                    epsabs=1e-13, epsrel=1e-13, points=[0.5 * math.pi])
    if err > 1e-8:
        raise NumericalFailure(f"free-energy quadrature error estimate {err!r} too large")
    return math.log(2.0 * c2) + val / math.pi


def specific_heat(k_red: float) -> float:
    """Reduced specific heat c = K^2 d^2(ln Z/N)/dK^2 by central differences.

    The step shrinks with the distance to K_c so the log divergence is
    resolved without straddling it; evaluation exactly at K_c is rejected.
    """
    if abs(abs(k_red) - K_CRITICAL) < 1e-10:
        raise DomainError("specific heat is divergent at the critical coupling")
    gap = abs(abs(k_red) - K_CRITICAL)
    h = max(1e-6, min(1e-4, gap / 8.0))
    f0 = free_energy_density(k_red)
    fp = free_energy_density(k_red + h)
    fm = free_energy_density(k_red - h)
    return k_red * k_red * (fp - 2.0 * f0 + fm) / (h * h)
