"""Gross-Pitaevskii order-parameter dynamics and the phase-number pendulum.

Phase convention: theta = theta1 - theta2 throughout, so a state with
psi1 = sqrt(n1/N) e^{i theta}, psi2 = sqrt(1 - n1/N) has relative phase theta.
The pendulum equations are used with E = 4 E_C, so the small-oscillation
frequency sqrt(E_J E / 2) equals sqrt(2 E_J E_C).
"""

from dataclasses import dataclass

import numpy as np

from .fock import condensate_state, two_mode_hamiltonian
from .ode import check_tol, integrate
from .unitary import evolve_schrodinger

ORDER_PARAMETER_ATOL = 1e-9
EXACT_MAX_N = 500


@dataclass(frozen=True)
class OrderParameter:
    psi1: complex
    psi2: complex

    def __post_init__(self):
        object.__setattr__(self, "psi1", complex(self.psi1))
        object.__setattr__(self, "psi2", complex(self.psi2))

    @property
    def norm2(self):
        return abs(self.psi1) ** 2 + abs(self.psi2) ** 2

    def as_array(self):
        return np.array([self.psi1, self.psi2])


@dataclass(frozen=True)
class PhaseNumberState:
    n: float
    theta: float


@dataclass
class GPTrajectory:
    times: np.ndarray
    psi: np.ndarray  # (n_samples, 2)

    @property
    def fraction1(self):
        return np.abs(self.psi[:, 0]) ** 2

    @property
    def norm2(self):
        return np.sum(np.abs(self.psi) ** 2, axis=1)


@dataclass
class PhaseNumberTrajectory:
    times: np.ndarray
    n: np.ndarray
    theta: np.ndarray  # unwrapped

    @property
    def theta_wrapped(self):
        return np.angle(np.exp(1j * self.theta))

    def first_integral(self, E, E_J):
        """(E/4) n^2 - E_J cos(theta), conserved along exact trajectories."""
        return 0.25 * E * self.n**2 - E_J * np.cos(self.theta)


def gp_rhs(p):
    E, U1, U2, K = p.E, p.U1, p.U2, p.K

    def f(t, psi):
        p1, p2 = psi
        return np.array([
            -1j * (E * (p1.real**2 + p1.imag**2) * p1 + U1 * p1 - K * p2),
            -1j * (U2 * p2 - K * p1),
        ])

    return f


def integrate_gp(p, psi0, grid, tol=1e-10):
    """Integrate the two-component Gross-Pitaevskii equations.

    i psi1' = E |psi1|^2 psi1 + U1 psi1 - K psi2
    i psi2' = U2 psi2 - K psi1
    """
    check_tol(tol)
    if abs(psi0.norm2 - 1.0) > ORDER_PARAMETER_ATOL:
        raise ValueError(f"order parameter not normalized (|psi|^2 = {psi0.norm2!r})")
    psi = integrate(gp_rhs(p), psi0.as_array(), grid.times, tol)
    return GPTrajectory(times=grid.times, psi=psi)


def integrate_phase_number(E, E_J, s0, grid, tol=1e-10):
    """Integrate n' = -E_J sin(theta), theta' = (E/2) n."""
    check_tol(tol)

    def f(t, y):
        return np.array([-E_J * np.sin(y[1]), 0.5 * E * y[0]])

    y = integrate(f, np.array([s0.n, s0.theta], dtype=float), grid.times, tol)
    return PhaseNumberTrajectory(times=grid.times, n=y[:, 0], theta=y[:, 1])


def small_oscillation_frequency(E, E_J):
    """Linearized angular frequency sqrt(E_J E / 2) of the pendulum system."""
    if E * E_J < 0:
        raise ValueError(
            f"E*E_J = {E * E_J!r} < 0: the equilibrium is unstable, no oscillation frequency"
        )
    return float(np.sqrt(0.5 * E * E_J))


def small_oscillation_frequency_charge(E_C, E_J):
    """Same frequency in charging-energy units, sqrt(2 E_J E_C)."""
    return small_oscillation_frequency(4.0 * E_C, E_J)


def gp_to_phase_number(psi, N, n_bar1):
    """Excess pair number n = N|psi1|^2 - n_bar1 and phase theta1 - theta2."""
    if psi.psi1 == 0 or psi.psi2 == 0:
        raise ValueError("relative phase undefined when an amplitude vanishes")
    n = N * abs(psi.psi1) ** 2 / psi.norm2 - n_bar1
    theta = np.angle(psi.psi1 * np.conj(psi.psi2))
    return PhaseNumberState(n=float(n), theta=float(theta))


def phase_number_to_gp(s, N, n_bar1):
    """Inverse of :func:`gp_to_phase_number`, choosing psi2 real and positive."""
    frac = (s.n + n_bar1) / N
    if not 0 <= frac <= 1:
        raise ValueError(f"occupation fraction {frac!r} outside [0, 1]")
    return OrderParameter(np.sqrt(frac) * np.exp(1j * s.theta), np.sqrt(1 - frac))


@dataclass
class MeanFieldComparison:
    times: np.ndarray
    exact_fraction: np.ndarray
    gp_fraction: np.ndarray

    @property
    def deviation(self):
        return np.abs(self.exact_fraction - self.gp_fraction)

    @property
    def max_deviation(self):
        return float(self.deviation.max())

    @property
    def rms_deviation(self):
        return float(np.sqrt(np.mean(self.deviation**2)))


def compare_gp_to_exact(p, psi0, grid, tol=1e-10, method="rk"):
    """Exact sector dynamics of the condensate vs the GP trajectory.

    Compares <n1>/N from the Schrodinger evolution of the N-pair condensate
    built from ``psi0`` with |psi1(t)|^2 from the GP equations.
    """
    if p.N > EXACT_MAX_N:
        raise ValueError(f"exact evolution limited to N <= {EXACT_MAX_N}, got {p.N}")
    exact = evolve_schrodinger(
        two_mode_hamiltonian(p), condensate_state(psi0.psi1, psi0.psi2, p.N), grid, tol, method
    )
    gp = integrate_gp(p, psi0, grid, tol)
    return MeanFieldComparison(
        times=grid.times, exact_fraction=exact.occupation / p.N, gp_fraction=gp.fraction1
    )
