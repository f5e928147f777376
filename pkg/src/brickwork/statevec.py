"""Dense state-vector engine for the Ising sampling model.

States are length-2^N complex vectors; qubit ``i`` is bit ``i`` of the basis
index (site 0 least significant).  Evolution under the commuting Hamiltonian
is applied as a diagonal phase program whose terms carry the Hamiltonian
coefficients: a term ``Z(i, b)`` multiplies amplitude ``z`` by
``exp(-i b s_i)`` and ``ZZ(i, j, c)`` by ``exp(-i c s_i s_j)``, where
``s_k = +1/-1`` is the Z eigenvalue of bit ``k``.  Evolution time is fixed
to 1, so compiling a lattice plus angle field emits ``Z(i, theta_i / 2)``
and ``ZZ(i, j, -J)``.

X-basis outcome convention: |+> reads 0 and |-> reads 1, so the outcome
basis states are |+_x> = Z^x |+>.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .lattice import AngleField, Lattice

DEFAULT_QUBIT_CAP = 26
NORM_TOL = 1e-10
DIST_SUM_TOL = 1e-9

SQRT_HALF = 1.0 / np.sqrt(2.0)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * SQRT_HALF
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def qubit_cap() -> int:
    """Statevector size cap; override with env BRICKWORK_MAX_QUBITS."""
    value = os.environ.get("BRICKWORK_MAX_QUBITS")
    return int(value) if value else DEFAULT_QUBIT_CAP


def rz(theta: float) -> np.ndarray:
    """R_z(theta) = exp(-i theta Z / 2)."""
    half = 0.5 * theta
    return np.diag([np.exp(-1j * half), np.exp(1j * half)])


def bits_to_int(x) -> int:
    """Bitstring 'b0b1...' (site-0-first), bit sequence, or int -> basis index."""
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        bits = [int(ch) for ch in x]
    else:
        bits = [int(b) for b in x]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"not a bitstring: {x!r}")
    return sum(b << i for i, b in enumerate(bits))


def int_to_bits(z: int, n: int) -> str:
    """Basis index -> bitstring with site 0 printed first."""
    return "".join("1" if (z >> i) & 1 else "0" for i in range(n))


@dataclass
class PureState:
    num_qubits: int
    amps: np.ndarray

    def norm_error(self) -> float:
        return abs(float(np.vdot(self.amps, self.amps).real) - 1.0)

    def check(self) -> "PureState":
        if self.amps.shape != (1 << self.num_qubits,):
            raise ValueError("amplitude vector has the wrong length")
        if self.norm_error() > NORM_TOL:
            raise ValueError(f"state norm drifted by {self.norm_error():.3e}")
        return self

    def copy(self) -> "PureState":
        return PureState(self.num_qubits, self.amps.copy())


def overlap(a: PureState, b: PureState) -> complex:
    return complex(np.vdot(a.amps, b.amps))


def state_fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|, the global-phase-insensitive comparison used throughout."""
    return abs(overlap(a, b))


def init_plus(num_qubits: int) -> PureState:
    """|+>^N: every amplitude equal to 2^{-N/2}."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    if num_qubits > qubit_cap():
        raise ValueError(f"{num_qubits} qubits exceeds the cap of {qubit_cap()}")
    amps = np.full(1 << num_qubits, 2.0 ** (-num_qubits / 2.0), dtype=complex)
    return PureState(num_qubits, amps).check()


@dataclass(frozen=True)
class PhaseProgram:
    """Ordered diagonal terms; application order never changes the result."""

    num_sites: int
    z_terms: tuple[tuple[int, float], ...]
    zz_terms: tuple[tuple[int, int, float], ...]

    def validate_against(self, num_qubits: int):
        for i, _ in self.z_terms:
            if not 0 <= i < num_qubits:
                raise ValueError(f"Z term site {i} out of range")
        for i, j, _ in self.zz_terms:
            if not (0 <= i < num_qubits and 0 <= j < num_qubits) or i == j:
                raise ValueError(f"ZZ term sites ({i},{j}) invalid")


def compile_phase_program(lattice: Lattice, field: AngleField) -> PhaseProgram:
    """Eq.-4 evolution for time 1: Z(i, theta_i/2) plus ZZ(i, j, -J) per edge."""
    field.require_matching(lattice)
    z_terms = tuple((i, field.angles[i] / 2.0) for i in range(lattice.num_sites))
    zz_terms = tuple((i, j, -field.coupling) for (i, j) in sorted(lattice.edges))
    return PhaseProgram(lattice.num_sites, z_terms, zz_terms)


def _sign_column(num_qubits: int, site: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    return 1.0 - 2.0 * ((idx >> site) & 1)


def apply_phase_program(state: PureState, program: PhaseProgram) -> PureState:
    program.validate_against(state.num_qubits)
    phase = np.zeros(state.amps.shape, dtype=float)
    for i, b in program.z_terms:
        phase += b * _sign_column(state.num_qubits, i)
    for i, j, c in program.zz_terms:
        phase += c * _sign_column(state.num_qubits, i) * _sign_column(state.num_qubits, j)
    return PureState(state.num_qubits, state.amps * np.exp(-1j * phase)).check()


def _apply_local_operator(amps: np.ndarray, num_qubits: int, sites, matrix: np.ndarray) -> np.ndarray:
    """Apply a 2^k x 2^k operator to the listed sites (bit t of the operator
    index is sites[t]); no unitarity assumption."""
    k = len(sites)
    view = amps.reshape((2,) * num_qubits)
    # C-order axis for qubit q is num_qubits - 1 - q; put sites last-to-first
    # so the grouped index has sites[0] as its least significant bit.
    source = [num_qubits - 1 - q for q in sites]
    destination = list(range(k - 1, -1, -1))
    moved = np.moveaxis(view, source, destination)
    shape = moved.shape
    flat = moved.reshape(1 << k, -1)
    flat = matrix @ flat
    moved = flat.reshape(shape)
    return np.moveaxis(moved, destination, source).reshape(-1).copy()


def apply_local_unitary(state: PureState, sites, unitary: np.ndarray) -> PureState:
    """Apply a one- or two-site unitary.  For two sites the 4x4 acts on the
    index (bit 1 = sites[1], bit 0 = sites[0])."""
    sites = [int(s) for s in (sites if hasattr(sites, "__len__") else [sites])]
    if len(sites) not in (1, 2):
        raise ValueError("only 1- or 2-site unitaries are supported")
    if len(set(sites)) != len(sites):
        raise ValueError("site collision")
    for s in sites:
        if not 0 <= s < state.num_qubits:
            raise ValueError(f"site {s} out of range")
    unitary = np.asarray(unitary, dtype=complex)
    dim = 1 << len(sites)
    if unitary.shape != (dim, dim):
        raise ValueError(f"operator shape {unitary.shape} does not match {len(sites)} sites")
    if np.max(np.abs(unitary.conj().T @ unitary - np.eye(dim))) > NORM_TOL:
        raise ValueError("operator is not unitary")
    amps = _apply_local_operator(state.amps, state.num_qubits, sites, unitary)
    return PureState(state.num_qubits, amps).check()


def expectation_local(state: PureState, sites, matrix: np.ndarray) -> float:
    """<psi| M |psi> for a Hermitian operator on the listed sites."""
    transformed = _apply_local_operator(state.amps, state.num_qubits, list(sites), matrix)
    return float(np.vdot(state.amps, transformed).real)


def walsh_hadamard(vector: np.ndarray, normalized: bool = True) -> np.ndarray:
    """In-place-free fast Walsh-Hadamard transform over all qubit axes."""
    v = np.array(vector, dtype=complex)
    n = v.size.bit_length() - 1
    if (1 << n) != v.size:
        raise ValueError("length must be a power of two")
    for i in range(n):
        v = v.reshape(-1, 2, 1 << i)
        v = np.concatenate((v[:, :1, :] + v[:, 1:, :], v[:, :1, :] - v[:, 1:, :]), axis=1)
    v = v.reshape(-1)
    if normalized:
        v = v * 2.0 ** (-n / 2.0)
    return v


def x_basis_amplitude(state: PureState, x) -> complex:
    """<+_x|psi> = 2^{-N/2} sum_z (-1)^{x.z} amp_z."""
    if isinstance(x, str) and len(x) != state.num_qubits:
        raise ValueError("bitstring length mismatch")
    mask = bits_to_int(x)
    if mask >> state.num_qubits:
        raise ValueError("outcome has more bits than the state")
    idx = np.arange(1 << state.num_qubits)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & mask) & 1)
    return complex(np.dot(signs, state.amps) * 2.0 ** (-state.num_qubits / 2.0))


@dataclass
class Distribution:
    """Exact outcome distribution; ``probs[z]`` indexed by basis integer."""

    num_sites: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (1 << self.num_sites,):
            raise ValueError("probability vector has the wrong length")
        if self.probs.min() < -1e-12:
            raise ValueError("negative probability")
        self.probs = np.clip(self.probs, 0.0, None)
        if abs(self.probs.sum() - 1.0) > DIST_SUM_TOL:
            raise ValueError(f"probabilities sum to {self.probs.sum():.12f}")

    def __getitem__(self, x) -> float:
        return float(self.probs[bits_to_int(x)])

    def items(self):
        for z in range(self.probs.size):
            yield int_to_bits(z, self.num_sites), float(self.probs[z])

    def as_dict(self) -> dict[str, float]:
        return dict(self.items())

    def to_csv(self, stream=None) -> str:
        """CSV lines "bitstring,probability" with site 0 printed first."""
        text = "".join(f"{bits},{p:.17g}\n" for bits, p in self.items())
        if stream is not None:
            stream.write(text)
        return text


def full_distribution(state: PureState) -> Distribution:
    """All-X measurement: q_x = |<+_x|psi>|^2 for every outcome x."""
    if state.num_qubits > qubit_cap():
        raise ValueError("state exceeds the qubit cap")
    table = walsh_hadamard(state.amps)
    return Distribution(state.num_qubits, np.abs(table) ** 2)


def distribution_in_bases(state: PureState, bases) -> Distribution:
    """Joint outcome distribution with per-site bases ('X' or 'Z').

    X-measured sites are Hadamard-rotated (|+> -> 0); Z-measured sites read
    the computational bit directly.
    """
    bases = list(bases)
    if len(bases) != state.num_qubits:
        raise ValueError("need one basis tag per site")
    rotated = state
    for site, basis in enumerate(bases):
        if basis == "X":
            rotated = apply_local_unitary(rotated, [site], HADAMARD)
        elif basis != "Z":
            raise ValueError(f"unknown basis {basis!r}")
    return Distribution(state.num_qubits, np.abs(rotated.amps) ** 2)


@dataclass(frozen=True)
class MeasurementRecord:
    outcomes: tuple[str, ...]
    bases: tuple[str, ...]
    seed: int | None

    def __post_init__(self):
        n = len(self.bases)
        for bits in self.outcomes:
            if len(bits) != n:
                raise ValueError("outcome length does not match basis tags")

    def export_text(self) -> str:
        header = json.dumps({"seed": self.seed, "bases": "".join(self.bases)}, sort_keys=True)
        return "\n".join([header, *self.outcomes]) + "\n"


def sample(state: PureState, count: int, seed: int) -> MeasurementRecord:
    """``count`` i.i.d. all-X outcomes via inverse CDF; deterministic per seed."""
    if count < 1:
        raise ValueError("count must be positive")
    dist = full_distribution(state)
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(count), side="right")
    outcomes = tuple(int_to_bits(int(z), state.num_qubits) for z in draws)
    return MeasurementRecord(outcomes, ("X",) * state.num_qubits, seed)


def postselect(state: PureState, site: int, basis: str, outcome: int):
    """Project one site and drop it; returns (reduced state, branch probability)."""
    if not 0 <= site < state.num_qubits:
        raise ValueError(f"site {site} out of range")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    n = state.num_qubits
    view = state.amps.reshape((2,) * n)
    axis = n - 1 - site
    zero = np.take(view, 0, axis=axis)
    one = np.take(view, 1, axis=axis)
    if basis == "Z":
        branch = (zero if outcome == 0 else one).reshape(-1)
    elif basis == "X":
        sign = 1.0 if outcome == 0 else -1.0
        branch = ((zero + sign * one) * SQRT_HALF).reshape(-1)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    probability = float(np.vdot(branch, branch).real)
    if probability <= 1e-14:
        raise ValueError("postselecting a zero-probability branch")
    reduced = PureState(n - 1, (branch / np.sqrt(probability)).copy()).check()
    return reduced, probability
