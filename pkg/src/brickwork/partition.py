"""Brute-force oracle for the imaginary-temperature Ising partition function.

For outcome x the shifted Hamiltonian is H_x = H + (pi/2) sum_i x_i Z_i, and

    Z_x = tr exp(-i H_x)
        = sum over spins z in {+1,-1}^N of exp(i [sum_<ij> J z_i z_j
                                                 + sum_i B'_i z_i])

with B'_i = theta_i/2 + x_i pi/2.  (The sign of the field term inside the
sum is immaterial: relabelling z -> -z flips it while leaving the coupling
term fixed.)  The Born rule identity q_x = |Z_x|^2 / 2^{2N} ties this sum to
the all-X outcome probability of the evolved state; :func:`verify_born_partition_identity`
checks it against the state-vector engine, which this module never uses for
its own sums.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .lattice import AngleField, Lattice
from . import statevec

ENUMERATION_CAP = 24


@dataclass(frozen=True)
class PartitionValue:
    value: complex
    num_spins: int
    x: str

    @property
    def abs_squared(self) -> float:
        return abs(self.value) ** 2

    @property
    def born_probability(self) -> float:
        """q_x = |Z_x|^2 / 2^{2N}."""
        return self.abs_squared / 4.0 ** self.num_spins


@dataclass(frozen=True)
class ErrorBudget:
    """gamma for multiplicative checks, (epsilon, delta, c) for mixed ones."""

    gamma: float = 0.0
    epsilon: float = 0.0
    delta: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if not 0.0 <= self.c < 0.5:
            raise ValueError("c must lie in [0, 1/2)")


def _shifted_fields(lattice: Lattice, field: AngleField, x_mask: int) -> list[float]:
    return [
        field.angles[i] / 2.0 + ((x_mask >> i) & 1) * (np.pi / 2.0)
        for i in range(lattice.num_sites)
    ]


def partition_function(lattice: Lattice, field: AngleField, x) -> PartitionValue:
    """Z_x by direct Gray-code enumeration over all 2^N spin configurations.

    Pure enumeration with Kahan-compensated summation; flipping one spin per
    step keeps the phase update O(degree).
    """
    field.require_matching(lattice)
    n = lattice.num_sites
    if n > ENUMERATION_CAP:
        raise ValueError(f"{n} spins exceeds the enumeration cap of {ENUMERATION_CAP}")
    x_mask = statevec.bits_to_int(x)
    if x_mask >> n:
        raise ValueError("x has more bits than the lattice has sites")
    coupling = field.coupling
    local = _shifted_fields(lattice, field, x_mask)
    adjacency = [lattice.neighbors(i) for i in range(n)]

    spins = [1.0] * n
    phase = sum(local) + coupling * len(lattice.edges)
    total = cmath.exp(1j * phase)
    compensation = 0.0j
    for step in range(1, 1 << n):
        k = (step & -step).bit_length() - 1
        delta = -2.0 * spins[k] * (coupling * sum(spins[j] for j in adjacency[k]) + local[k])
        spins[k] = -spins[k]
        phase += delta
        term = cmath.exp(1j * phase) - compensation
        candidate = total + term
        compensation = (candidate - total) - term
        total = candidate
    return PartitionValue(total, n, statevec.int_to_bits(x_mask, n))


def _wht_unnormalized(vector: np.ndarray) -> np.ndarray:
    v = np.array(vector, dtype=complex)
    n = v.size.bit_length() - 1
    for i in range(n):
        v = v.reshape(-1, 2, 1 << i)
        v = np.concatenate((v[:, :1, :] + v[:, 1:, :], v[:, :1, :] - v[:, 1:, :]), axis=1)
    return v.reshape(-1)


def partition_table(lattice: Lattice, field: AngleField) -> np.ndarray:
    """Z_x for every outcome x at once.

    Writing exp(i x_i (pi/2) z_i) = (i z_i)^{x_i} term by term turns the
    x-dependence into a sign transform of the x=0 summand:

        Z_x = i^{|x|} * sum_z exp(i phi_0(z)) * (-1)^{popcount(x & z)}

    which is a single unnormalized Walsh-Hadamard transform of the phase
    vector.  Built from the spin energies directly, independent of the
    state-vector path; spot-check against :func:`partition_function`.
    """
    field.require_matching(lattice)
    n = lattice.num_sites
    if n > ENUMERATION_CAP:
        raise ValueError(f"{n} spins exceeds the enumeration cap of {ENUMERATION_CAP}")
    idx = np.arange(1 << n)
    signs = [1.0 - 2.0 * ((idx >> i) & 1) for i in range(n)]
    phase = np.zeros(1 << n, dtype=float)
    for i in range(n):
        phase += (field.angles[i] / 2.0) * signs[i]
    for i, j in lattice.edges:
        phase += field.coupling * signs[i] * signs[j]
    transformed = _wht_unnormalized(np.exp(1j * phase))
    weights = 1j ** np.bitwise_count(idx)
    return weights * transformed


def verify_born_partition_identity(lattice: Lattice, field: AngleField, x) -> float:
    """| q_x(statevec) - |Z_x|^2 / 2^{2N} |; the two sides never share code."""
    if lattice.num_sites > 20:
        raise ValueError("identity check capped at 20 sites")
    z_x = partition_function(lattice, field, x)
    state = statevec.apply_phase_program(
        statevec.init_plus(lattice.num_sites),
        statevec.compile_phase_program(lattice, field),
    )
    q_x = abs(statevec.x_basis_amplitude(state, x)) ** 2
    return abs(q_x - z_x.born_probability)


def _require_same_support(p, q):
    if p.num_sites != q.num_sites:
        raise ValueError("distributions live on different outcome universes")


def multiplicative_error_check(p, q, gamma: float) -> bool:
    """True iff |p_x - q_x| <= gamma q_x for every outcome x."""
    _require_same_support(p, q)
    return bool(np.all(np.abs(p.probs - q.probs) <= gamma * q.probs + 1e-15))


def variation_distance(p, q) -> float:
    """The un-halved sum  sum_x |p_x - q_x|."""
    _require_same_support(p, q)
    return float(np.abs(p.probs - q.probs).sum())


def mixed_error_check(
    z2_approx: float,
    z2_true: float,
    num_spins: int,
    poly_factor: float,
    epsilon: float,
    delta: float,
) -> bool:
    """Mixture of multiplicative and additive errors on |Z_x|^2 / 2^N:

        |approx - true| / 2^N <= (1/poly) * true / 2^N + epsilon/delta

    Only meaningful in the regime epsilon/delta < 1/2; outside it, reject.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if epsilon / delta >= 0.5:
        raise ValueError("epsilon/delta >= 1/2 is outside the checkable regime")
    if poly_factor <= 0.0:
        raise ValueError("poly_factor must be positive")
    scale = 2.0 ** num_spins
    lhs = abs(z2_approx - z2_true) / scale
    rhs = (1.0 / poly_factor) * z2_true / scale + epsilon / delta
    return lhs <= rhs + 1e-15
