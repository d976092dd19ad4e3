"""Kossakowski-Lindblad dynamics with the pair-transfer channel b = a1 a2^dagger.

Decay constants compare how fast a Fock state (qubit picture) and a
condensate state (mean-field picture) initially lose fidelity to themselves.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fock import _b_weights, is_hermitian, op_b, sector_size
from .ode import check_tol, integrate
from .unitary import NORM_ATOL

DENSITY_ATOL = 1e-10
POSITIVITY_ATOL = 1e-8
DECAY_CROSSCHECK_RTOL = 1e-10
CROSSCHECK_MAX_N = 2000


class CompletePositivityError(ValueError):
    pass


class CPCheck(NamedTuple):
    ok: bool
    margin: float


@dataclass(frozen=True)
class NoiseParams:
    """Dissipator coefficients; ``unchecked=True`` skips the CP test."""

    gamma: float
    delta: float
    beta: complex = 0j
    unchecked: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.unchecked:
            return
        if self.gamma < 0 or self.delta < 0:
            raise ValueError(f"gamma and delta must be nonnegative, got {self.gamma!r}, {self.delta!r}")
        cp = check_complete_positivity(self)
        if not cp.ok:
            raise CompletePositivityError(f"complete positivity violated (margin {cp.margin:.6g})")

    def scaled(self, c):
        return NoiseParams(c * self.gamma, c * self.delta, c * self.beta, self.unchecked)


def check_complete_positivity(n):
    """gamma*delta >= |beta|^2, with the margin gamma*delta - |beta|^2."""
    margin = n.gamma * n.delta - abs(n.beta) ** 2
    return CPCheck(bool(margin >= 0), float(margin))


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if not is_hermitian(rho, DENSITY_ATOL):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > DENSITY_ATOL:
        raise ValueError(f"density matrix trace {np.trace(rho).real!r} != 1")
    if np.linalg.eigvalsh(rho)[0] < -POSITIVITY_ATOL:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def random_density(N, rng, rank=None):
    """Random full-rank (or given rank) density matrix on the sector."""
    dim = N + 1
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def dissipator(rho, n, b=None):
    """D[rho] for channel ``b`` (default b = a1 a2^dagger on the sector).

    gamma (b rho b+ - {b+ b, rho}/2) + delta (b+ rho b - {b b+, rho}/2)
    + beta (b rho b - {b^2, rho}/2) + conj(beta) (b+ rho b+ - {b+^2, rho}/2)
    """
    rho = np.asarray(rho)
    if b is None:
        b = op_b(sector_size(rho))
    b = np.asarray(b)
    if b.shape != rho.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, b {b.shape}")
    bd = b.conj().T

    def term(L, R, LR):
        return L @ rho @ R - 0.5 * (LR @ rho + rho @ LR)

    out = n.gamma * term(b, bd, bd @ b) + n.delta * term(bd, b, b @ bd)
    if n.beta != 0:
        out = out + n.beta * term(b, b, b @ b) + np.conj(n.beta) * term(bd, bd, bd @ bd)
    return out


class _Channel:
    """b = a1 a2^dagger applied by row/column shifts in O(N^2)."""

    def __init__(self, N):
        self.s = _b_weights(N)
        self.sc = self.s[:, None]

    def b_left(self, X):  # b @ X
        out = np.zeros_like(X)
        out[:-1] = self.sc * X[1:]
        return out

    def bd_left(self, X):  # b^dagger @ X
        out = np.zeros_like(X)
        out[1:] = self.sc * X[:-1]
        return out

    def b_right(self, X):  # X @ b
        out = np.zeros_like(X)
        out[:, 1:] = X[:, :-1] * self.s
        return out

    def bd_right(self, X):  # X @ b^dagger
        out = np.zeros_like(X)
        out[:, :-1] = X[:, 1:] * self.s
        return out


def _banded_left(H):
    """Return X -> H @ X, using diagonals when H is tridiagonal."""
    if H.shape[0] > 2 and not np.any(np.triu(H, 2)) and not np.any(np.tril(H, -2)):
        d = np.diag(H)[:, None]
        up = np.diag(H, 1)[:, None]
        lo = np.diag(H, -1)[:, None]

        def apply(X):
            out = d * X
            out[:-1] += up * X[1:]
            out[1:] += lo * X[:-1]
            return out

        return apply
    return lambda X: H @ X


DENSE_RHS_MAX_N = 96


def _dense_rhs(H, n):
    b = op_b(sector_size(H))
    bd = b.T
    G = n.gamma * bd @ b + n.delta * b @ bd
    if n.beta != 0:
        G = G + n.beta * b @ b + np.conj(n.beta) * bd @ bd
    K = -1j * H - 0.5 * G
    g, d, be = n.gamma, n.delta, n.beta
    bec = np.conj(be)

    def f(t, rho):
        M = K @ rho
        out = M + M.conj().T
        b_rho = b @ rho
        bd_rho = bd @ rho
        out += g * (b_rho @ bd) + d * (bd_rho @ b)
        if be != 0:
            out += be * (b_rho @ b) + bec * (bd_rho @ bd)
        return out

    return f


def master_rhs(H, n):
    """Right-hand side of the master equation, without materializing superoperators.

    Small sectors use dense products; larger ones use O(N^2) shifts.
    """
    N = sector_size(H)
    if N <= DENSE_RHS_MAX_N:
        return _dense_rhs(H, n)
    ch = _Channel(N)
    apply_H = _banded_left(H)
    g, d, be = n.gamma, n.delta, n.beta
    bec = np.conj(be)

    def G_left(X):
        # (g b+b + d bb+ + be b^2 + conj(be) b+^2) X; G is Hermitian
        bX = ch.b_left(X)
        bdX = ch.bd_left(X)
        out = g * ch.bd_left(bX) + d * ch.b_left(bdX)
        if be != 0:
            out += be * ch.b_left(bX) + bec * ch.bd_left(bdX)
        return out

    def f(t, rho):
        HR = apply_H(rho)
        GR = G_left(rho)
        # rho is Hermitian: rho @ A = (A @ rho)^dagger for Hermitian A
        out = -1j * (HR - HR.conj().T) - 0.5 * (GR + GR.conj().T)
        b_rho = ch.b_left(rho)
        bd_rho = ch.bd_left(rho)
        out += g * ch.bd_right(b_rho) + d * ch.b_right(bd_rho)
        if be != 0:
            out += be * ch.b_right(b_rho) + bec * ch.bd_right(bd_rho)
        return out

    return f


@dataclass
class MasterTrajectory:
    times: np.ndarray
    trace: np.ndarray
    occupation: np.ndarray
    fidelity: np.ndarray
    min_eigenvalue: np.ndarray
    hermiticity_error: np.ndarray
    states: np.ndarray = None  # (n_samples, N+1, N+1) when stored


def evolve_master(H, n, rho0, grid, tol=1e-10, h2=None, store_states=True):
    """Integrate d rho/dt = -i[H + H2, rho] + D[rho].

    ``h2`` is the bath-induced Hamiltonian correction, zero by default.
    Density matrices are re-Hermitized after every accepted step; the
    reported fidelity is Tr(rho0 rho(t)), which is <phi|rho(t)|phi> for a
    pure initial state.
    """
    check_tol(tol)
    H = np.asarray(H)
    if not is_hermitian(H):
        raise ValueError("H must be a square Hermitian matrix")
    if h2 is not None:
        h2 = np.asarray(h2)
        if h2.shape != H.shape or not is_hermitian(h2):
            raise ValueError("h2 must be a Hermitian matrix matching H")
        H = H + h2
    if not n.unchecked:
        cp = check_complete_positivity(n)
        if not cp.ok:
            raise CompletePositivityError(f"complete positivity violated (margin {cp.margin:.6g})")
    rho0 = check_density(rho0)
    rho0 = 0.5 * (rho0 + rho0.conj().T)
    if rho0.shape != H.shape:
        raise ValueError(f"dimension mismatch: rho0 {rho0.shape}, H {H.shape}")

    H_eff = H.real if not np.any(H.imag) else H
    f = master_rhs(H_eff, n)

    def hermitize(rho):
        return 0.5 * (rho + rho.conj().T)

    states = integrate(f, rho0, grid.times, tol, post_step=hermitize)
    k = np.arange(H.shape[0])
    diag = np.einsum("tii->ti", states)
    traj = MasterTrajectory(
        times=grid.times,
        trace=diag.sum(axis=1).real,
        occupation=(diag.real @ k),
        fidelity=np.einsum("ij,tji->t", rho0, states).real,
        min_eigenvalue=np.array([np.linalg.eigvalsh(r)[0] for r in states]),
        hermiticity_error=np.array([np.max(np.abs(r - r.conj().T)) for r in states]),
        states=states if store_states else None,
    )
    return traj


def _b_moments(phi, ch):
    """<b>, <b+b>, <bb+>, <b^2> on a normalized vector."""
    b_phi = ch.b_left(phi[:, None])[:, 0]
    bd_phi = ch.bd_left(phi[:, None])[:, 0]
    bb_phi = ch.b_left(b_phi[:, None])[:, 0]
    return (
        np.vdot(phi, b_phi),
        np.vdot(b_phi, b_phi).real,
        np.vdot(bd_phi, bd_phi).real,
        np.vdot(phi, bb_phi),
    )


def decay_constant_numeric(phi, n, b=None, crosscheck=True):
    """Initial fidelity decay rate -<phi| D[|phi><phi|] |phi> of a pure state.

    Evaluated from <b>, <b+b>, <bb+> and <b^2>:

        gamma (<b+b> - |<b>|^2) + delta (<bb+> - |<b>|^2)
        + 2 Re(beta (<b^2> - <b>^2))

    and, with ``crosscheck`` and N <= CROSSCHECK_MAX_N, compared against the
    dissipator itself.
    """
    phi = np.asarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1.0) > NORM_ATOL:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(phi)!r})")
    N = sector_size(phi)
    if b is None:
        mb, mbdb, mbbd, mb2 = _b_moments(phi, _Channel(N))
    else:
        b = np.asarray(b)
        if b.shape != (phi.size, phi.size):
            raise ValueError("dimension mismatch between phi and b")
        b_phi = b @ phi
        bd_phi = b.conj().T @ phi
        mb = np.vdot(phi, b_phi)
        mbdb = np.vdot(b_phi, b_phi).real
        mbbd = np.vdot(bd_phi, bd_phi).real
        mb2 = np.vdot(phi, b @ b_phi)
    var = abs(mb) ** 2
    rate = n.gamma * (mbdb - var) + n.delta * (mbbd - var) + 2.0 * (n.beta * (mb2 - mb**2)).real
    if crosscheck and N <= CROSSCHECK_MAX_N:
        D = dissipator(pure_density(phi), n, b)
        direct = -np.vdot(phi, D @ phi).real
        scale = max(1.0, abs(n.gamma) * mbdb + abs(n.delta) * mbbd + 2 * abs(n.beta) * (abs(mb2) + var))
        if abs(direct - rate) > DECAY_CROSSCHECK_RTOL * scale:
            raise RuntimeError(f"decay constant cross-check failed: {rate!r} vs {direct!r}")
    return float(rate)


def _check_range(n1, N):
    if not 0 <= n1 <= N:
        raise ValueError(f"n1 must lie in [0, {N}], got {n1!r}")


def decay_constant_qubit_analytic(n1, N, n):
    """gamma n1 (N - n1 + 1) + delta (n1 + 1)(N - n1) for a Fock state."""
    _check_range(n1, N)
    return float(n.gamma * n1 * (N - n1 + 1) + n.delta * (n1 + 1) * (N - n1))


def decay_constant_meanfield_analytic(n1, N, theta, n):
    """Decay constant of the condensate with mean occupation n1 and phase theta.

    (n1^2/N) gamma + delta (N - n1)(1 - n1/N) - 2 Re(beta e^{2i theta}) n1 (N - n1)/N,
    with theta = theta1 - theta2.
    """
    _check_range(n1, N)
    if not n.unchecked:
        cp = check_complete_positivity(n)
        if not cp.ok:
            raise CompletePositivityError(f"complete positivity violated (margin {cp.margin:.6g})")
    return float(
        n1**2 / N * n.gamma
        + n.delta * (N - n1) * (1 - n1 / N)
        - 2.0 * (n.beta * np.exp(2j * theta)).real * n1 * (N - n1) / N
    )


class DecayComparison(NamedTuple):
    gamma_qubit: float
    gamma_meanfield: float
    ratio: float
    agreement: float  # ratio / n_bar1


def decay_ratio(n_bar1, N, n, theta=0.0):
    """Ratio of the Fock-state to condensate decay constants at n1 = n_bar1."""
    if not 0 < n_bar1 < N:
        raise ValueError(f"n_bar1 must lie in (0, {N}), got {n_bar1!r}")
    gq = decay_constant_qubit_analytic(n_bar1, N, n)
    gm = decay_constant_meanfield_analytic(n_bar1, N, theta, n)
    if gm <= 0:
        raise ZeroDivisionError(f"mean-field decay constant is {gm!r}; ratio undefined")
    ratio = gq / gm
    return DecayComparison(gq, gm, ratio, ratio / n_bar1)
