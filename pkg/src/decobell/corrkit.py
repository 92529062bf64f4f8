"""Two-qubit X-state toolkit: validation, correlation matrix, Bell function,
and Wootters concurrence.

States of interest have the real X form

    [[u+, 0,  0,  0 ],
     [0,  v+, z,  0 ],
     [0,  z,  v-, 0 ],
     [0,  0,  0,  u-]]

in the product basis {|00>, |01>, |10>, |11>}, parameterized by the bond
magnetization m_z, the sublattice imbalance ds_z, and the spin-spin
correlators q_zz, q_xx:

    u_pm = 1/4 +- m_z + q_zz
    v_pm = 1/4 +- ds_z - q_zz
    z    = 2 * q_xx

The Bell function is the CHSH maximum, B = 2*sqrt(l1 + l2), with l1 >= l2
the two largest eigenvalues of L^T L and L_ij = Tr[rho sigma_i x sigma_j]
(Horodecki's criterion).  For the X form above this reduces to
B = max(N1, N2) with N1 = 8*sqrt(q_zz^2 + q_xx^2) and N2 = 8*sqrt(2)*|q_xx|.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import NumericalFailure

SQRT2 = math.sqrt(2.0)
TSIRELSON = 2.0 * SQRT2

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# sigma_i x sigma_j, indexed [i][j]; built once, reused in every trace
_PAULI_KRON = [[np.kron(a, b) for b in _PAULI] for a in _PAULI]

# sigma_y x sigma_y is real; used by the concurrence spin flip
_YY = np.kron(SIGMA_Y, SIGMA_Y).real


@dataclass(frozen=True)
class XState:
    """Real X-form two-qubit density matrix (see module docstring)."""

    u_plus: float
    u_minus: float
    v_plus: float
    v_minus: float
    z: float

    @classmethod
    def from_correlators(cls, m_z: float, ds_z: float, q_zz: float, q_xx: float) -> "XState":
        return xstate_from_correlators(m_z, ds_z, q_zz, q_xx)

    @property
    def q_zz(self) -> float:
        return (self.u_plus + self.u_minus - self.v_plus - self.v_minus) / 4.0

    @property
    def q_xx(self) -> float:
        return self.z / 2.0

    @property
    def m_z(self) -> float:
        return (self.u_plus - self.u_minus) / 2.0

    @property
    def ds_z(self) -> float:
        return (self.v_plus - self.v_minus) / 2.0

    def to_matrix(self) -> np.ndarray:
        rho = np.zeros((4, 4))
        rho[0, 0] = self.u_plus
        rho[1, 1] = self.v_plus
        rho[2, 2] = self.v_minus
        rho[3, 3] = self.u_minus
        rho[1, 2] = rho[2, 1] = self.z
        return rho


class Violation(NamedTuple):
    constraint: str
    magnitude: float


class BellResult(NamedTuple):
    b: float
    n1: Union[float, None]
    n2: Union[float, None]
    violated: bool


def xstate_from_correlators(m_z: float, ds_z: float, q_zz: float, q_xx: float) -> XState:
    """Assemble the X state for given correlators.

    No positivity check is performed here; use validate_state for that.
    """
    vals = (m_z, ds_z, q_zz, q_xx)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"correlators must be finite, got {vals}")
    return XState(
        u_plus=0.25 + m_z + q_zz,
        u_minus=0.25 - m_z + q_zz,
        v_plus=0.25 + ds_z - q_zz,
        v_minus=0.25 - ds_z - q_zz,
        z=2.0 * q_xx,
    )


def validate_state(state: XState, tol: float = 1e-9) -> list:
    """Check trace, diagonal nonnegativity and positivity of the inner block.

    Returns a list of Violation records; an empty list means the state is a
    physical density matrix within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = []
    trace = state.u_plus + state.u_minus + state.v_plus + state.v_minus
    if abs(trace - 1.0) > tol:
        out.append(Violation("trace", abs(trace - 1.0)))
    for name in ("u_plus", "u_minus", "v_plus", "v_minus"):
        val = getattr(state, name)
        if val < -tol:
            out.append(Violation(f"diagonal:{name}", -val))
    block = state.v_plus * state.v_minus - state.z**2
    if block < -tol:
        out.append(Violation("block-positivity", -block))
    return out


def clamp_tiny_negatives(state: XState, tol: float = 1e-9) -> XState:
    """Zero out diagonal entries in [-tol, 0).

    Near-zero temperature the assembled diagonals can undershoot by rounding
    (~1e-13).  The trace is deliberately left untouched.
    """
    def clamp(v: float) -> float:
        return 0.0 if -tol <= v < 0.0 else v

    return XState(
        u_plus=clamp(state.u_plus),
        u_minus=clamp(state.u_minus),
        v_plus=clamp(state.v_plus),
        v_minus=clamp(state.v_minus),
        z=state.z,
    )


def _require_valid_xstate(state: XState, tol: float = 1e-9) -> None:
    bad = validate_state(state, tol)
    if bad:
        raise ValueError(f"invalid X state: {bad}")


def _require_valid_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")


def _as_matrix(state) -> np.ndarray:
    if isinstance(state, XState):
        _require_valid_xstate(state)
        return state.to_matrix().astype(complex)
    rho = np.asarray(state, dtype=complex)
    _require_valid_density_matrix(rho)
    return rho


def correlation_matrix(state) -> np.ndarray:
    """3x3 spin correlation matrix L_ij = Tr[rho sigma_i x sigma_j].

    Accepts an XState or any 4x4 Hermitian density matrix.  L is always built
    by explicit traces so sign conventions cannot drift with the sign of the
    off-diagonal coherence.
    """
    rho = _as_matrix(state)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = np.trace(rho @ _PAULI_KRON[i][j]).real
    return out


def _eigvalsh3_descending(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3 matrix, descending.

    Closed-form trigonometric solution; falls back to LAPACK when the shifted
    matrix is too close to degenerate for acos to be trustworthy.
    """
    p1 = m[0, 1] ** 2 + m[0, 2] ** 2 + m[1, 2] ** 2
    diag = np.array([m[0, 0], m[1, 1], m[2, 2]])
    scale = max(np.abs(diag).max(), math.sqrt(p1), 1e-300)
    if p1 <= (1e-15 * scale) ** 2:
        return np.sort(diag)[::-1]
    q = diag.sum() / 3.0
    p2 = ((diag - q) ** 2).sum() + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (m - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2.0
    if abs(r) > 1.0 + 1e-10:
        return np.sort(np.linalg.eigvalsh(m))[::-1]
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.array([e1, e2, e3])


def bell_closed_form(q_zz: float, q_xx: float) -> BellResult:
    """Bell function of the X state directly from its two correlators."""
    if not (math.isfinite(q_zz) and math.isfinite(q_xx)):
        raise ValueError("correlators must be finite")
    n1 = 8.0 * math.hypot(q_zz, q_xx)
    n2 = 8.0 * SQRT2 * abs(q_xx)
    b = max(n1, n2)
    return BellResult(b=b, n1=n1, n2=n2, violated=b > 2.0)


def bell_horodecki(state) -> BellResult:
    """Bell function B = 2*sqrt(l1 + l2) from the spectral construction.

    For X states the closed-form branch values are filled in as well and
    cross-checked against the spectral value to 1e-10.
    """
    lmat = correlation_matrix(state)
    lam = _eigvalsh3_descending(lmat.T @ lmat)
    b = 2.0 * math.sqrt(max(lam[0] + lam[1], 0.0))
    if isinstance(state, XState):
        closed = bell_closed_form(state.q_zz, state.q_xx)
        if abs(b - closed.b) > 1e-10:
            raise NumericalFailure(
                f"spectral Bell value {b!r} disagrees with closed form {closed.b!r}"
            )
        return BellResult(b=b, n1=closed.n1, n2=closed.n2, violated=b > 2.0)
    return BellResult(b=b, n1=None, n2=None, violated=b > 2.0)


def concurrence_wootters(state) -> float:
    """Wootters concurrence of an arbitrary two-qubit state.

    C = max{0, mu1 - mu2 - mu3 - mu4} with mu_i the decreasing square roots
    of the eigenvalues of rho * (Y rho^* Y), Y = sigma_y x sigma_y.  The mu_i
    are evaluated as singular values of sqrt(rho~) sqrt(rho), which keeps full
    absolute precision even when some mu_i are tiny.
    """
    rho = _as_matrix(state)
    w, v = np.linalg.eigh(rho)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    sqrt_rho_tilde = _YY @ sqrt_rho.conj() @ _YY
    mu = np.linalg.svd(sqrt_rho_tilde @ sqrt_rho, compute_uv=False)
    c = mu[0] - mu[1] - mu[2] - mu[3]
    return min(1.0, max(0.0, float(c)))


def concurrence_closed_form(q_zz: float, q_xx: float, m_z: float) -> float:
    """Concurrence of the X state from its correlators.

    C = 2 * max{0, 2|q_xx| - sqrt((1/4 + q_zz)^2 - m_z^2)}.  The argument of
    the square root is nonnegative for every physical state; a negative value
    signals unphysical input.
    """
    if not all(math.isfinite(v) for v in (q_zz, q_xx, m_z)):
        raise ValueError("correlators must be finite")
    rad = (0.25 + q_zz) ** 2 - m_z**2
    if rad < 0.0:
        # fully polarized states sit exactly on rad = 0; rounding may
        # undershoot by ~1e-16, which clamps to the physical value
        if rad < -1e-12:
            raise ValueError(
                f"(1/4 + q_zz)^2 = {(0.25 + q_zz) ** 2!r} < m_z^2 = {m_z ** 2!r}: "
                "no physical X state has these correlators"
            )
        rad = 0.0
    return 2.0 * max(0.0, 2.0 * abs(q_xx) - math.sqrt(rad))
