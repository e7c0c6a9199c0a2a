"""Hilbert-space oracle for two-setting Bell scenarios.

Operators are numpy complex matrices wrapped in small immutable classes that
check their defining properties on construction. Observables are dichotomic
(A @ A = I), so measurement projectors are (I + A)/2 and (I - A)/2.

Photon polarization convention: the analyzer at angle theta measures
cos(2 theta) sigma_z + sin(2 theta) sigma_x.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    CrossCommutationViolated,
    DimensionMismatch,
    InvalidState,
    NotCommuting,
    NotDichotomic,
)
from .linalg import check_hermitian, jacobi_eigh
from .probability import CHSH_CONTEXTS, CyclicSystem, JointDistribution, moments_from_cells

COMMUTE_TOL = 1e-10
DICHOTOMIC_TOL = 1e-10
STATE_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


class HermitianOperator:
    def __init__(self, entries):
        m = check_hermitian(entries).copy()
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"

    def to_dict(self) -> dict:
        return {"dim": self.dim, "re": self._m.real.tolist(), "im": self._m.imag.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping):
        return cls(np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float))


class DichotomicObservable(HermitianOperator):
    def __init__(self, entries):
        super().__init__(entries)
        m = self._m
        if np.abs(m @ m - np.eye(self.dim)).max() > DICHOTOMIC_TOL:
            raise NotDichotomic("observable does not square to the identity")

    def projector(self, outcome: int) -> np.ndarray:
        return 0.5 * (np.eye(self.dim) + outcome * self._m)


class DensityOperator(HermitianOperator):
    def __init__(self, entries):
        super().__init__(entries)
        tr = np.trace(self._m).real
        if abs(tr - 1) > STATE_TOL:
            raise InvalidState(f"trace {tr} != 1")
        if jacobi_eigh(self._m)[0].min() < -STATE_TOL:
            raise InvalidState("state has a negative eigenvalue")

    @classmethod
    def pure(cls, psi) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, HermitianOperator) else np.asarray(x, dtype=complex)


def commutator(X, Y) -> np.ndarray:
    X, Y = _mat(X), _mat(Y)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"{X.shape} vs {Y.shape}")
    return X @ Y - Y @ X


def scaled_commutator(X, Y) -> HermitianOperator:
    """i[X, Y], Hermitian whenever X and Y are."""
    return HermitianOperator(1j * commutator(X, Y))


def operator_norm(H) -> float:
    """Spectral radius of a Hermitian operator."""
    w, _ = jacobi_eigh(_mat(H))
    return float(np.abs(w).max())


def spectral_norm(M) -> float:
    """Largest singular value of an arbitrary square matrix, via M^H M."""
    M = _mat(M)
    return math.sqrt(max(0.0, operator_norm(M.conj().T @ M)))


def local_embed(op, side: str, dims: tuple[int, int]) -> HermitianOperator:
    m = _mat(op)
    d_a, d_b = dims
    side = side.upper()
    if side == "A":
        if m.shape != (d_a, d_a):
            raise DimensionMismatch(f"side A operator must be {d_a}x{d_a}")
        out = np.kron(m, np.eye(d_b))
    elif side == "B":
        if m.shape != (d_b, d_b):
            raise DimensionMismatch(f"side B operator must be {d_b}x{d_b}")
        out = np.kron(np.eye(d_a), m)
    else:
        raise ValueError("side must be 'A' or 'B'")
    cls = type(op) if isinstance(op, HermitianOperator) else HermitianOperator
    return cls(out)


@dataclass(frozen=True)
class BellOperatorBundle:
    A1: DichotomicObservable
    A2: DichotomicObservable
    B1: DichotomicObservable
    B2: DichotomicObservable
    bell_op: HermitianOperator = field(repr=False)
    commutator_a: HermitianOperator = field(repr=False)
    commutator_b: HermitianOperator = field(repr=False)
    product: HermitianOperator = field(repr=False)

    @property
    def dim(self) -> int:
        return self.A1.dim

    def observables(self) -> tuple:
        return self.A1, self.A2, self.B1, self.B2

    def to_dict(self) -> dict:
        return {name: op.to_dict() for name, op in zip(("A1", "A2", "B1", "B2"), self.observables())}


def bell_operator(A1, A2, B1, B2) -> BellOperatorBundle:
    """Bundle the Bell operator (1/2)[A1(B1 + B2) + A2(B1 - B2)] with its commutator observables."""
    ops = [o if isinstance(o, DichotomicObservable) else DichotomicObservable(o) for o in (A1, A2, B1, B2)]
    A1, A2, B1, B2 = ops
    if len({o.dim for o in ops}) != 1:
        raise DimensionMismatch("all four observables must share one dimension")
    worst = max(np.abs(commutator(a, b)).max() for a in (A1, A2) for b in (B1, B2))
    if worst > COMMUTE_TOL:
        raise CrossCommutationViolated(f"max |[A_i, B_j]| = {worst:.3e}")
    a1, a2, b1, b2 = (o.matrix for o in ops)
    bell = HermitianOperator(0.5 * (a1 @ (b1 + b2) + a2 @ (b1 - b2)))
    m_a = scaled_commutator(A1, A2)
    m_b = scaled_commutator(B1, B2)
    # [M_A, M_B] = 0 follows from cross-commutation
    m_ab = m_a.matrix @ m_b.matrix
    return BellOperatorBundle(A1, A2, B1, B2, bell, m_a, m_b, HermitianOperator(0.5 * (m_ab + m_ab.conj().T)))


def landau_residual(bundle: BellOperatorBundle) -> float:
    """|| B^2 - (I - (1/4)[A1, A2][B1, B2]) ||."""
    b = bundle.bell_op.matrix
    rhs = np.eye(bundle.dim) - 0.25 * commutator(bundle.A1, bundle.A2) @ commutator(bundle.B1, bundle.B2)
    return spectral_norm(b @ b - rhs)


def chsh_expectation(rho: DensityOperator, bundle: BellOperatorBundle) -> float:
    """<B> = Tr(rho B); twice this is the CHSH combination of correlations."""
    if rho.dim != bundle.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs operators dim {bundle.dim}")
    return float(np.trace(rho.matrix @ bundle.bell_op.matrix).real)


@dataclass(frozen=True)
class IncompatibilityVerdict:
    violates: bool
    norm: float
    norm_m_a: float
    norm_m_b: float

    @property
    def consistent(self) -> bool:
        return self.violates == (self.norm > 1 + 1e-9)


def local_incompatibility_criterion(a1, a2, b1, b2) -> IncompatibilityVerdict:
    """Both local commutators nonzero, cross-checked against the embedded Bell operator norm."""
    a1, a2, b1, b2 = (o if isinstance(o, DichotomicObservable) else DichotomicObservable(o) for o in (a1, a2, b1, b2))
    norm_a = operator_norm(scaled_commutator(a1, a2))
    norm_b = operator_norm(scaled_commutator(b1, b2))
    dims = (a1.dim, b1.dim)
    bundle = bell_operator(
        local_embed(a1, "A", dims), local_embed(a2, "A", dims),
        local_embed(b1, "B", dims), local_embed(b2, "B", dims),
    )
    return IncompatibilityVerdict(
        norm_a > COMMUTE_TOL and norm_b > COMMUTE_TOL,
        operator_norm(bundle.bell_op),
        norm_a,
        norm_b,
    )


def quantum_context_distribution(rho: DensityOperator, A, B) -> JointDistribution:
    A = A if isinstance(A, DichotomicObservable) else DichotomicObservable(A)
    B = B if isinstance(B, DichotomicObservable) else DichotomicObservable(B)
    if rho.dim != A.dim or A.dim != B.dim:
        raise DimensionMismatch("state and observables must share one dimension")
    if np.abs(commutator(A, B)).max() > COMMUTE_TOL:
        raise NotCommuting("observables of one context must commute")
    probs = [
        np.trace(rho.matrix @ A.projector(x) @ B.projector(y)).real
        for x, y in itertools.product((-1, 1), repeat=2)
    ]
    return JointDistribution(2, np.asarray(probs))


# --- states and observables for the photon-pair experiment -------------------

def polarization_observable(theta: float) -> DichotomicObservable:
    return DichotomicObservable(math.cos(2 * theta) * SIGMA_Z + math.sin(2 * theta) * SIGMA_X)


def polarization_state(theta: float) -> np.ndarray:
    """Linear polarization at angle theta; +1 eigenvector of polarization_observable(theta)."""
    return np.array([math.cos(theta), math.sin(theta)], dtype=complex)


def singlet() -> DensityOperator:
    return DensityOperator.pure(np.array([0, 1, -1, 0]) / math.sqrt(2))


CANONICAL_ANGLES_A = (0.0, math.pi / 4)
CANONICAL_ANGLES_B = (math.pi / 8, 3 * math.pi / 8)


def chsh_optimal_bundle() -> BellOperatorBundle:
    """Singlet-optimal bundle for the Bell operator: A at 0, pi/4; B at pi/8, -pi/8."""
    dims = (2, 2)
    return bell_operator(
        local_embed(polarization_observable(0.0), "A", dims),
        local_embed(polarization_observable(math.pi / 4), "A", dims),
        local_embed(polarization_observable(math.pi / 8), "B", dims),
        local_embed(polarization_observable(-math.pi / 8), "B", dims),
    )


def quantum_system(rho: DensityOperator, bundle: BellOperatorBundle) -> CyclicSystem:
    """Fixed state, fixed observables: context (i, j) measures A_i with B_j."""
    a = {1: bundle.A1, 2: bundle.A2}
    b = {1: bundle.B1, 2: bundle.B2}
    return CyclicSystem(
        4,
        {(i, j): moments_from_cells(quantum_context_distribution(rho, a[i], b[j])) for i, j in CHSH_CONTEXTS},
    )


class Mode(str, enum.Enum):
    CLEAN = "clean"
    CROSSTALK = "crosstalk"
    DRIFT = "drift"


@dataclass(frozen=True)
class Scenario:
    """Setting-indexed family: the state and both observables may depend on (theta, phi)."""

    state: Callable[[float, float], DensityOperator]
    observable_a: Callable[[float, float], DichotomicObservable]
    observable_b: Callable[[float, float], DichotomicObservable]

    def context_distribution(self, theta: float, phi: float) -> JointDistribution:
        dims = (2, 2)
        return quantum_context_distribution(
            self.state(theta, phi),
            local_embed(self.observable_a(theta, phi), "A", dims),
            local_embed(self.observable_b(theta, phi), "B", dims),
        )

    def system(self, angles_a: Sequence[float], angles_b: Sequence[float]) -> CyclicSystem:
        return CyclicSystem(
            4,
            {
                (i, j): moments_from_cells(self.context_distribution(angles_a[i - 1], angles_b[j - 1]))
                for i, j in CHSH_CONTEXTS
            },
        )


def drift_state(theta: float, phi: float, epsilon: float) -> DensityOperator:
    """Singlet mixed with a product state whose A side is polarized along phi and B side along theta.

    Each party's reduced state then depends on the other party's setting.
    """
    tilt = np.kron(polarization_state(phi), polarization_state(theta))
    return DensityOperator((1 - epsilon) * singlet().matrix + epsilon * np.outer(tilt, tilt.conj()))


def scenario(mode: Mode | str = Mode.CLEAN, drift_epsilon: float = 0.0, crosstalk_strength: float = 0.0) -> Scenario:
    mode = Mode(mode)
    rho = singlet()
    if mode is Mode.CLEAN:
        return Scenario(lambda t, p: rho, lambda t, p: polarization_observable(t), lambda t, p: polarization_observable(p))
    if mode is Mode.CROSSTALK:
        s = crosstalk_strength
        return Scenario(
            lambda t, p: rho,
            lambda t, p: polarization_observable(t + s * p),
            lambda t, p: polarization_observable(p + s * t),
        )
    eps = drift_epsilon
    if eps == 0.0:
        return scenario(Mode.CLEAN)
    return Scenario(lambda t, p: drift_state(t, p, eps), lambda t, p: polarization_observable(t), lambda t, p: polarization_observable(p))


def trace_distance(rho, sigma) -> float:
    w, _ = jacobi_eigh(_mat(rho) - _mat(sigma))
    return 0.5 * float(np.abs(w).sum())


def state_setting_dependence(family: Mapping) -> float:
    """Largest trace distance between states prepared for any two settings."""
    states = list(family.values())
    if len(states) < 2:
        raise ValueError("need at least two settings")
    return max(trace_distance(r, s) for r, s in itertools.combinations(states, 2))


# --- random instances ------------------------------------------------------

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_dichotomic(dim: int, rng: np.random.Generator) -> DichotomicObservable:
    """U diag(+-1) U^H with both eigenvalues present when dim >= 2."""
    signs = rng.choice([-1.0, 1.0], size=dim)
    if dim >= 2 and abs(signs.sum()) == dim:
        signs[rng.integers(dim)] *= -1
    u = random_unitary(dim, rng)
    return DichotomicObservable((u * signs) @ u.conj().T)


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    rank = rank or int(rng.integers(1, dim + 1))
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real)


def random_local_bundle(dims: tuple[int, int], rng: np.random.Generator) -> BellOperatorBundle:
    a = [local_embed(random_dichotomic(dims[0], rng), "A", dims) for _ in range(2)]
    b = [local_embed(random_dichotomic(dims[1], rng), "B", dims) for _ in range(2)]
    return bell_operator(*a, *b)


def random_qubit_observable(rng: np.random.Generator) -> DichotomicObservable:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return DichotomicObservable(v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z)


def random_qubit_quadruple(rng: np.random.Generator, p_compatible: float = 1 / 3) -> tuple:
    """Local qubit observables (a1, a2, b1, b2).

    With probability ``p_compatible`` per side the second observable is made to
    commute with the first (it becomes +-first or +-I), so both branches of the
    incompatibility criterion are exercised.
    """
    ops = []
    for _ in range(2):
        first = random_qubit_observable(rng)
        if rng.random() < p_compatible:
            base = first.matrix if rng.random() < 0.5 else I2
            second = DichotomicObservable(rng.choice([-1.0, 1.0]) * base)
        else:
            second = random_qubit_observable(rng)
        ops += [first, second]
    return tuple(ops)


def random_nonlocal_bundle(rng: np.random.Generator) -> BellOperatorBundle:
    """Three qubits; A_i = a_i (x) c (x) I and B_j = I (x) c (x) b_j.

    Both parties' observables act nontrivially on the shared middle qubit, so
    neither is a local embedding, yet every A_i commutes with every B_j.
    """
    c = random_qubit_observable(rng).matrix
    a = [np.kron(np.kron(random_qubit_observable(rng).matrix, c), I2) for _ in range(2)]
    b = [np.kron(np.kron(I2, c), random_qubit_observable(rng).matrix) for _ in range(2)]
    return bell_operator(*a, *b)
