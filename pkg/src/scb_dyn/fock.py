"""Two-mode Fock sector with a fixed total number of Cooper pairs.

States live in the (N+1)-dimensional sector spanned by |1_(k) 2_(N-k)>,
k = 0..N, where k counts the pairs on the small island 1. States are plain
complex numpy vectors indexed by k and operators are (N+1)x(N+1) arrays.
Units are hbar = 1, so energies are angular frequencies.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

HERMITIAN_ATOL = 1e-12
CONDENSATE_NORM_SLACK = 1e-6
QUBIT_REGIME_RATIO = 10.0


@dataclass(frozen=True)
class TwoModeParams:
    """Bose-Hubbard couplings of the two-island model.

    ``E`` is the Coulomb repulsion on island 1, ``U1``/``U2`` the on-site
    potentials, ``K`` the tunneling amplitude and ``N`` the conserved total
    pair number.
    """

    E: float
    U1: float
    U2: float
    K: float
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("E", "U1", "U2", "K"):
            value = getattr(self, name)
            if not np.isfinite(value) or np.iscomplexobj(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))


@dataclass(frozen=True)
class ChargeParams:
    """Charging-energy description of the Cooper pair box."""

    E_C: float
    E_J: float
    n_g: float
    n_bar1: int = 0

    def __post_init__(self):
        if int(self.n_bar1) != self.n_bar1 or self.n_bar1 < 0:
            raise ValueError(f"n_bar1 must be a nonnegative integer, got {self.n_bar1!r}")
        object.__setattr__(self, "n_bar1", int(self.n_bar1))
        for name in ("E_C", "E_J", "n_g"):
            value = getattr(self, name)
            if not np.isfinite(value) or np.iscomplexobj(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def in_qubit_regime(self):
        return self.E_C > 0 and self.E_C >= QUBIT_REGIME_RATIO * abs(self.E_J)

    def check_qubit_regime(self):
        """Raise unless E_C >> E_J (taken as E_C >= 10 E_J)."""
        if not self.in_qubit_regime:
            raise ValueError(
                f"not in the charge-qubit regime: need E_C >= {QUBIT_REGIME_RATIO:g}*E_J, "
                f"got E_C={self.E_C!r}, E_J={self.E_J!r}"
            )
        return self


def sector_dimension(N):
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return int(N) + 1


def sector_size(vec_or_op):
    """Return N for a sector vector or operator."""
    n = np.shape(vec_or_op)[0]
    if n < 2:
        raise ValueError("sector objects have dimension N+1 >= 2")
    return n - 1


def number_state(n1, N):
    """Fock state with ``n1`` pairs on island 1 and ``N - n1`` on island 2."""
    dim = sector_dimension(N)
    if int(n1) != n1 or not 0 <= n1 <= N:
        raise ValueError(f"n1 must be an integer in [0, {N}], got {n1!r}")
    psi = np.zeros(dim, dtype=complex)
    psi[int(n1)] = 1.0
    return psi


def condensate_state(psi1, psi2, N):
    """Product state of N pairs all in the single-pair state (psi1, psi2).

    The amplitude on |1_(k) 2_(N-k)> is sqrt(C(N, k)) psi1**k psi2**(N-k).
    Amplitudes are formed in log space so large N neither overflows nor
    underflows. Inputs are renormalized if |psi1|^2 + |psi2|^2 is within
    1e-6 of one and rejected otherwise.
    """
    dim = sector_dimension(N)
    psi1, psi2 = complex(psi1), complex(psi2)
    norm2 = abs(psi1) ** 2 + abs(psi2) ** 2
    if norm2 == 0.0:
        raise ValueError("psi1 and psi2 cannot both vanish")
    if abs(norm2 - 1.0) > CONDENSATE_NORM_SLACK:
        raise ValueError(f"|psi1|^2 + |psi2|^2 = {norm2!r} is not 1")
    scale = np.sqrt(norm2)
    psi1, psi2 = psi1 / scale, psi2 / scale

    k = np.arange(dim)
    if psi2 == 0:
        return number_state(N, N) * (psi1 / abs(psi1)) ** N
    if psi1 == 0:
        return number_state(0, N) * (psi2 / abs(psi2)) ** N
    log_binom = gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)
    log_mod = 0.5 * log_binom + k * np.log(abs(psi1)) + (N - k) * np.log(abs(psi2))
    phase = k * np.angle(psi1) + (N - k) * np.angle(psi2)
    amps = np.exp(log_mod + 1j * phase)
    return amps / np.linalg.norm(amps)


def _b_weights(N):
    # <k-1| b |k> for k = 1..N
    k = np.arange(1, N + 1)
    return np.sqrt(k * (N - k + 1.0))


def op_b(N):
    """Matrix of the pair-transfer operator b = a1 a2^dagger.

    b moves one pair from island 1 to island 2, so it maps index k to k-1
    with weight sqrt(k (N - k + 1)).
    """
    dim = sector_dimension(N)
    b = np.zeros((dim, dim))
    idx = np.arange(1, dim)
    b[idx - 1, idx] = _b_weights(N)
    return b


def number_operator(N):
    """Diagonal matrix of a1^dagger a1 on the sector."""
    return np.diag(np.arange(sector_dimension(N), dtype=float))


def two_mode_hamiltonian(p):
    """Bose-Hubbard Hamiltonian E n1^2 + U1 n1 + U2 n2 - K (b + b^dagger)."""
    N = p.N
    k = np.arange(sector_dimension(N), dtype=float)
    H = np.diag(p.E * k**2 + p.U1 * k + p.U2 * (N - k))
    b = op_b(N)
    H -= p.K * (b + b.T)
    return H


def charge_hamiltonian(c, n_levels=10):
    """Number-basis charge Hamiltonian truncated to n = 0..n_levels.

    Diagonal 4 E_C (n - n_g)^2, nearest-neighbour coupling -E_J.
    """
    if int(n_levels) != n_levels or n_levels < 2:
        raise ValueError(f"n_levels must be an integer >= 2, got {n_levels!r}")
    n = np.arange(int(n_levels) + 1, dtype=float)
    H = np.diag(4.0 * c.E_C * (n - c.n_g) ** 2)
    off = np.full(int(n_levels), -c.E_J)
    H += np.diag(off, 1) + np.diag(off, -1)
    return H


SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def qubit_hamiltonian(c):
    """Two-level reduction -(4 E_C (1 - 2 n_g) / 2) sz - (E_J / 2) sx.

    Basis order is (|0>, |1>) with sz |0> = +|0>.
    """
    return -0.5 * 4.0 * c.E_C * (1.0 - 2.0 * c.n_g) * SIGMA_Z - 0.5 * c.E_J * SIGMA_X


def map_parameters(p, n_bar1):
    """Identify the charge-model parameters of a two-mode model.

    E = 4 E_C, n_g = (U2 - U1) / (2E) - n_bar1 and E_J = K n_bar1 (N - n_bar1).
    """
    if p.E == 0:
        raise ValueError("E must be nonzero to define the gate charge n_g")
    if int(n_bar1) != n_bar1 or not 0 < n_bar1 < p.N:
        raise ValueError(f"n_bar1 must be an integer in (0, {p.N}), got {n_bar1!r}")
    n_bar1 = int(n_bar1)
    return ChargeParams(
        E_C=p.E / 4.0,
        E_J=p.K * n_bar1 * (p.N - n_bar1),
        n_g=(p.U2 - p.U1) / (2.0 * p.E) - n_bar1,
        n_bar1=n_bar1,
    )


def expect(op, psi):
    """<psi| op |psi> for a normalized vector."""
    return np.vdot(psi, op @ psi)


def is_hermitian(M, atol=HERMITIAN_ATOL):
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.max(np.abs(M - M.conj().T)) <= atol
