"""Closed-system propagation on the sector and the qubit oscillation signal."""

from dataclasses import dataclass

import numpy as np

from .fock import is_hermitian, qubit_hamiltonian
from .ode import check_tol, integrate

NORM_ATOL = 1e-10
EIG_MAX_N = 200


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample times with both endpoints included."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end!r}) must exceed t_start ({self.t_start!r})")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValueError(f"n_samples must be an integer >= 2, got {self.n_samples!r}")
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @property
    def times(self):
        return np.linspace(self.t_start, self.t_end, self.n_samples)


@dataclass
class StateTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, N+1)

    @property
    def occupation(self):
        k = np.arange(self.states.shape[1])
        return np.abs(self.states) ** 2 @ k

    @property
    def norm(self):
        return np.linalg.norm(self.states, axis=1)

    def energy(self, H):
        return np.einsum("ti,ij,tj->t", self.states.conj(), H, self.states).real


def _check_state(psi, dim=None):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state must be a 1-d vector")
    if dim is not None and psi.size != dim:
        raise ValueError(f"dimension mismatch: state has {psi.size}, operator has {dim}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_ATOL:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(psi)!r})")
    return psi


def _matvec(H):
    """Fast H @ v, exploiting tridiagonal structure when present."""
    n = H.shape[0]
    if n > 2 and not np.any(np.triu(H, 2)) and not np.any(np.tril(H, -2)):
        d = np.diag(H).copy()
        up = np.diag(H, 1).copy()
        lo = np.diag(H, -1).copy()

        def apply(v):
            out = d * v
            out[:-1] += up * v[1:]
            out[1:] += lo * v[:-1]
            return out

        return apply
    return lambda v: H @ v


def propagate_exact(H, psi0, times):
    """exp(-i H t) psi0 via the eigendecomposition of a dense Hermitian H."""
    w, V = np.linalg.eigh(H)
    c = V.conj().T @ psi0
    t = np.asarray(times, dtype=float) - times[0]
    return (np.exp(-1j * np.outer(t, w)) * c) @ V.T


def evolve_schrodinger(H, psi0, grid, tol=1e-10, method="rk"):
    """Solve i dpsi/dt = H psi on ``grid``.

    ``method="rk"`` uses the adaptive 8th-order integrator; ``method="eig"``
    propagates exactly through the eigendecomposition (N <= 200).
    """
    H = np.asarray(H)
    if not is_hermitian(H):
        raise ValueError("H must be a square Hermitian matrix")
    psi0 = _check_state(psi0, H.shape[0])
    times = grid.times
    if method == "eig":
        if H.shape[0] - 1 > EIG_MAX_N:
            raise ValueError(f"eigendecomposition propagation limited to N <= {EIG_MAX_N}")
        states = propagate_exact(H, psi0, times)
    elif method == "rk":
        check_tol(tol)
        apply = _matvec(H)
        states = integrate(lambda t, y: -1j * apply(y), psi0, times, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return StateTrajectory(times=times, states=states)


def qubit_probability(c, phi0, t):
    """Probability |<0| exp(-i t H_qubit) |phi0>|^2, exact for scalar or array t."""
    phi0 = _check_state(phi0, 2)
    w, V = np.linalg.eigh(qubit_hamiltonian(c))
    coeff = V[0] * (V.conj().T @ phi0)
    t = np.asarray(t, dtype=float)
    amp = np.exp(-1j * np.multiply.outer(t, w)) @ coeff
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


def occupation_expectation(psi):
    """Mean number of pairs on island 1, sum_k k |psi_k|^2."""
    psi = np.asarray(psi)
    return float(np.abs(psi) ** 2 @ np.arange(psi.size))


def _crossings(t, x, rising):
    s = np.signbit(x)
    # rising: negative -> nonnegative
    idx = np.nonzero(s[:-1] & ~s[1:])[0] if rising else np.nonzero(~s[:-1] & s[1:])[0]
    return t[idx] - x[idx] * (t[idx + 1] - t[idx]) / (x[idx + 1] - x[idx])


def extract_frequency(times, signal):
    """Dominant angular frequency from zero crossings of the centred signal.

    Crossings are located by linear interpolation. Rising and falling
    crossings are timed separately so a mean offset over a non-integer
    number of periods does not bias the estimate.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(signal, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("times and signal must be 1-d arrays of equal length")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("samples must be uniformly spaced")
    x = x - x.mean()
    if np.ptp(x) == 0 or np.max(np.abs(x)) <= 1e-14 * max(1.0, np.max(np.abs(signal))):
        raise ValueError("signal is constant")
    n_changes = np.count_nonzero(np.signbit(x[:-1]) != np.signbit(x[1:]))
    if n_changes < 4:
        raise ValueError(f"too few oscillations: {n_changes} sign changes, need >= 4")
    periods = []
    for rising in (True, False):
        c = _crossings(t, x, rising)
        if c.size >= 2:
            periods.append(((c[-1] - c[0]) / (c.size - 1), c.size - 1))
    total = sum(n for _, n in periods)
    period = sum(p * n for p, n in periods) / total
    return 2.0 * np.pi / period
