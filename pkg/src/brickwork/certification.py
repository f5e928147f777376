"""Certification of the sampler by local parent-Hamiltonian measurements.

The rotated brickwork state is the unique, gap-1 ground state of

    H' = (1/2) sum_i ( I - R_z(theta_i) X_i R_z(theta_i)^dag
                           prod_{j in neighbors(i)} Z_j ).

Measuring every local term M times yields an energy estimate E_hat; the
Markov-type bound F >= 1 - E_hat/Delta converts it to a fidelity floor and
D(rho, rho') <= sqrt(1 - F^2) to a trace-distance ceiling, which also caps
the total variation distance of the sampled distribution.  M follows the
Hoeffding sample count

    M >= (J m^2 n^2 / (2 Delta^2 eps'^2)) * ln[-(mn+1) / ln(1-alpha)].

Desk-scale mixed states are explicit density matrices (<= 12 qubits), so the
trace-distance and fidelity oracles here are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .lattice import AngleField, Lattice
from .mbqc import cz_network_state
from .statevec import PAULI_X, PAULI_Z, PureState, expectation_local, rz

GAP = 1.0          # spectral gap of H'
TERM_NORM = 1.0    # J = max_lambda ||h_lambda||; every term is a projector
DENSITY_CAP = 12


# ---------------------------------------------------------------------------
# Parent Hamiltonian
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalTerm:
    """One projector (I - R_z X R_z^dag . prod Z)/2 on a site and its neighbors.

    ``support`` is sorted ascending and bit t of the dense matrix index is
    ``support[t]``.
    """

    center: int
    support: tuple[int, ...]
    matrix: np.ndarray = dataclass_field(repr=False)

    def __post_init__(self):
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-12:
            raise ValueError("local term is not Hermitian")
        gram = self.matrix @ self.matrix
        if np.max(np.abs(gram - self.matrix)) > 1e-12:
            raise ValueError("local term is not a projector")


def _kron_lsb(ops) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(op, out)
    return out


def parent_hamiltonian(lattice: Lattice, field: AngleField) -> list[LocalTerm]:
    """One term per site; the rotated graph state has energy 0 on every term
    and any orthogonal state costs at least the gap Delta = 1."""
    field.require_matching(lattice)
    terms = []
    for i in range(lattice.num_sites):
        support = tuple(sorted((i, *lattice.neighbors(i))))
        rotation = rz(field.angles[i])
        dressed_x = rotation @ PAULI_X @ rotation.conj().T
        ops = [dressed_x if s == i else PAULI_Z for s in support]
        stabilizer = _kron_lsb(ops)
        matrix = 0.5 * (np.eye(stabilizer.shape[0]) - stabilizer)
        terms.append(LocalTerm(i, support, matrix))
    return terms


def embed_term(term: LocalTerm, num_qubits: int) -> np.ndarray:
    """Dense 2^N x 2^N embedding of a local term (small N only)."""
    if num_qubits > DENSITY_CAP:
        raise ValueError("dense embedding capped at 12 qubits")
    dim = 1 << num_qubits
    k = len(term.support)
    out = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(num_qubits) if q not in term.support]
    for row_local in range(1 << k):
        for col_local in range(1 << k):
            value = term.matrix[row_local, col_local]
            if value == 0:
                continue
            base_row = sum(((row_local >> t) & 1) << term.support[t] for t in range(k))
            base_col = sum(((col_local >> t) & 1) << term.support[t] for t in range(k))
            for fill in range(1 << len(rest)):
                offset = sum(((fill >> u) & 1) << rest[u] for u in range(len(rest)))
                out[base_row | offset, base_col | offset] += value
    return out


def hamiltonian_matrix(terms, num_qubits: int) -> np.ndarray:
    total = np.zeros((1 << num_qubits, 1 << num_qubits), dtype=complex)
    for term in terms:
        total += embed_term(term, num_qubits)
    return total


def term_expectation(state, term: LocalTerm, num_qubits: int | None = None) -> float:
    """tr(h_lambda rho) for a PureState or a dense density matrix."""
    if isinstance(state, PureState):
        return expectation_local(state, term.support, term.matrix)
    rho = np.asarray(state)
    n = num_qubits if num_qubits is not None else rho.shape[0].bit_length() - 1
    return float(np.trace(embed_term(term, n) @ rho).real)


def exact_energy(state, terms, num_qubits: int | None = None) -> float:
    return sum(term_expectation(state, term, num_qubits) for term in terms)


def ideal_state(lattice: Lattice, field: AngleField) -> PureState:
    """The rotated brickwork (graph) state the sampler is supposed to prepare."""
    return cz_network_state(lattice, field)


# ---------------------------------------------------------------------------
# Density-matrix helpers (exact oracles at desk scale)
# ---------------------------------------------------------------------------

def to_density(state: PureState) -> np.ndarray:
    if state.num_qubits > DENSITY_CAP:
        raise ValueError("density matrices capped at 12 qubits")
    return np.outer(state.amps, state.amps.conj())


def _swap_site_to_lsb(num_qubits: int, site: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    b0 = idx & 1
    bs = (idx >> site) & 1
    return idx ^ ((b0 ^ bs) | ((b0 ^ bs) << site))


def depolarize_site(rho: np.ndarray, num_qubits: int, site: int, p: float) -> np.ndarray:
    """(1-p) rho + p (I/2 tensor tr_site rho): full depolarization of one site."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing weight must lie in [0, 1]")
    perm = _swap_site_to_lsb(num_qubits, site)
    moved = rho[np.ix_(perm, perm)]
    half = 1 << (num_qubits - 1)
    blocks = moved.reshape(half, 2, half, 2)
    traced = blocks[:, 0, :, 0] + blocks[:, 1, :, 1]
    mixed = np.zeros_like(moved).reshape(half, 2, half, 2)
    mixed[:, 0, :, 0] = traced / 2.0
    mixed[:, 1, :, 1] = traced / 2.0
    mixed = mixed.reshape(moved.shape)
    out = (1.0 - p) * moved + p * mixed
    return out[np.ix_(perm, perm)]


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """D(rho, sigma) = tr|rho - sigma| / 2."""
    eigenvalues = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.abs(eigenvalues).sum())


def fidelity_with_pure(state: PureState, rho: np.ndarray) -> float:
    """F(rho, rho') = tr(rho rho') = <psi|rho'|psi> for pure rho."""
    return float(np.vdot(state.amps, rho @ state.amps).real)


# ---------------------------------------------------------------------------
# Estimation, budgets, noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyEstimate:
    total: float
    per_term_mean: tuple[float, ...]
    per_term_stderr: tuple[float, ...]
    counts: tuple[int, ...]


def energy_estimate(records, terms) -> EnergyEstimate:
    """E_hat = sum over terms of the empirical mean eigenvalue (0/1 outcomes).

    ``records`` holds one array of sampled eigenvalues per term; unbiased for
    tr(H' rho') when each record is drawn in that term's eigenbasis.
    """
    if len(records) != len(terms):
        raise ValueError("need exactly one record per term")
    means, errors, counts = [], [], []
    for bits in records:
        bits = np.asarray(bits, dtype=float)
        if bits.size == 0:
            raise ValueError("empty record")
        mean = float(bits.mean())
        means.append(mean)
        errors.append(math.sqrt(max(mean * (1.0 - mean), 0.0) / bits.size))
        counts.append(int(bits.size))
    return EnergyEstimate(float(sum(means)), tuple(means), tuple(errors), tuple(counts))


def sample_term_eigenvalues(state, term: LocalTerm, count: int, rng) -> np.ndarray:
    """i.i.d. 0/1 eigenvalue outcomes of one projector term; the term is a
    projector, so measuring in its eigenbasis is a Bernoulli(tr(h rho)) draw."""
    if count < 1:
        raise ValueError("count must be positive")
    p = min(max(term_expectation(state, term), 0.0), 1.0)
    return (rng.random(count) < p).astype(np.int8)


def fidelity_and_trace_bounds(energy: float, gap: float, eps_prime: float) -> tuple[float, float]:
    """F* = clamp(1 - E_hat/Delta, 0, 1) and the trace-distance ceiling
    sqrt(1 - max(F* - eps', 0)^2)."""
    if gap <= 0.0:
        raise ValueError("gap must be positive")
    f_star = min(max(1.0 - energy / gap, 0.0), 1.0)
    guarded = max(f_star - eps_prime, 0.0)
    d_bound = math.sqrt(max(1.0 - guarded * guarded, 0.0))
    return f_star, d_bound


def sample_budget(m: int, n: int, gap: float, term_norm: float, eps_prime: float, alpha: float) -> int:
    """Smallest M with M >= (J m^2 n^2 / (2 Delta^2 eps'^2)) ln[-(mn+1)/ln(1-alpha)]."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if eps_prime <= 0.0:
        raise ValueError("eps_prime must be positive")
    if gap <= 0.0 or term_norm <= 0.0:
        raise ValueError("gap and term norm must be positive")
    spins = m * n
    log_arg = -(spins + 1) / math.log1p(-alpha)
    bound = (term_norm * m * m * n * n) / (2.0 * gap * gap * eps_prime * eps_prime) * math.log(log_arg)
    return max(1, math.ceil(bound - 1e-12))


@dataclass(frozen=True)
class NoiseBudget:
    epsilon: float
    eps_d: float
    eps_m: float
    eps_prime: float
    per_site_cap: float


def noise_budget_split(epsilon: float, m: int, n: int) -> NoiseBudget:
    """Fixed-constant instantiation of the O(.) split: eps_d = eps_m = eps/2,
    eps' = eps^2/8, per-site measurement cap eps_m/(mn)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    eps_d = epsilon / 2.0
    eps_m = epsilon / 2.0
    eps_prime = epsilon * epsilon / 8.0
    return NoiseBudget(epsilon, eps_d, eps_m, eps_prime, eps_m / (m * n))


@dataclass(frozen=True)
class NoiseModel:
    """Per-site classical outcome bit flip, plus an optional single-site
    depolarizing perturbation of the prepared state."""

    flip_probability: float = 0.0
    depolarize_site: int | None = None
    depolarize_weight: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.flip_probability <= 0.5:
            raise ValueError("flip probability must lie in [0, 1/2]")
        if not 0.0 <= self.depolarize_weight <= 1.0:
            raise ValueError("depolarizing weight must lie in [0, 1]")


def binary_symmetric_channel(dist, flip_probability: float):
    """Exact product bit-flip channel on an outcome distribution.

    Each site flips independently, so per site the halved total variation
    moved is at most the flip probability; over mn sites the sampled classical
    state moves by at most mn * eps in trace distance.
    """
    from .statevec import Distribution

    eps = flip_probability
    probs = dist.probs.copy()
    idx = np.arange(probs.size)
    for site in range(dist.num_sites):
        probs = (1.0 - eps) * probs + eps * probs[idx ^ (1 << site)]
    return Distribution(dist.num_sites, probs)


def apply_measurement_noise(target, noise: NoiseModel, seed: int | None = None):
    """Flip outcome bits of a record, or push a distribution through the exact
    bit-flip channel."""
    from .statevec import Distribution, MeasurementRecord

    if isinstance(target, Distribution):
        return binary_symmetric_channel(target, noise.flip_probability)
    if isinstance(target, MeasurementRecord):
        rng = np.random.default_rng(seed)
        flipped = []
        for bits in target.outcomes:
            flips = rng.random(len(bits)) < noise.flip_probability
            flipped.append(
                "".join(str(int(b) ^ 1) if f else b for b, f in zip(bits, flips))
            )
        return MeasurementRecord(tuple(flipped), target.bases, seed)
    raise TypeError("expected a Distribution or MeasurementRecord")


# ---------------------------------------------------------------------------
# End-to-end protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificationReport:
    per_term_means: tuple[float, ...]
    energy: float
    fidelity_bound: float
    trace_bound: float
    samples_per_term: int
    alpha: float
    epsilon: float
    eps_d: float
    eps_m: float
    eps_prime: float
    per_site_cap: float
    seed: int | None
    verdict: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "per_term_means": list(self.per_term_means),
                "energy": self.energy,
                "fidelity_bound": self.fidelity_bound,
                "trace_bound": self.trace_bound,
                "samples_per_term": self.samples_per_term,
                "alpha": self.alpha,
                "epsilon": self.epsilon,
                "eps_d": self.eps_d,
                "eps_m": self.eps_m,
                "eps_prime": self.eps_prime,
                "per_site_cap": self.per_site_cap,
                "seed": self.seed,
                "verdict": self.verdict,
            },
            sort_keys=True,
        )


def certify(
    state,
    lattice: Lattice,
    field: AngleField,
    epsilon: float,
    alpha: float,
    seed: int | None = 0,
    noise: NoiseModel | None = None,
    records=None,
) -> CertificationReport:
    """Full pipeline: budget split -> M -> per-term measurement -> E_hat ->
    bounds -> verdict.

    Accepts when F* >= sqrt(1 - eps_d^2) + eps'; prepared records shorter
    than M per term are flagged as insufficient, never silently accepted.
    """
    budget = noise_budget_split(epsilon, lattice.rows, lattice.cols)
    samples = sample_budget(lattice.rows, lattice.cols, GAP, TERM_NORM, budget.eps_prime, alpha)
    terms = parent_hamiltonian(lattice, field)

    if records is not None:
        estimate = energy_estimate(records, terms)
        means = estimate.per_term_mean
        if min(estimate.counts) < samples:
            f_star, d_bound = fidelity_and_trace_bounds(estimate.total, GAP, budget.eps_prime)
            return CertificationReport(
                means, estimate.total, f_star, d_bound, samples, alpha,
                epsilon, budget.eps_d, budget.eps_m, budget.eps_prime,
                budget.per_site_cap, seed, "insufficient-samples",
            )
        total = estimate.total
    else:
        prepared = state
        if noise is not None and noise.depolarize_weight > 0.0:
            if isinstance(prepared, PureState):
                prepared = to_density(prepared)
            prepared = depolarize_site(
                prepared, lattice.num_sites, noise.depolarize_site or 0, noise.depolarize_weight
            )
        rng = np.random.default_rng(seed)
        means = []
        for term in terms:
            p = min(max(term_expectation(prepared, term, lattice.num_sites), 0.0), 1.0)
            if noise is not None and noise.flip_probability > 0.0:
                eps = noise.flip_probability
                p = (1.0 - eps) * p + eps * (1.0 - p)
            means.append(rng.binomial(samples, p) / samples)
        means = tuple(means)
        total = float(sum(means))

    f_star, d_bound = fidelity_and_trace_bounds(total, GAP, budget.eps_prime)
    threshold = math.sqrt(max(1.0 - budget.eps_d**2, 0.0)) + budget.eps_prime
    verdict = "accept" if f_star >= threshold else "reject"
    return CertificationReport(
        tuple(means), total, f_star, d_bound, samples, alpha,
        epsilon, budget.eps_d, budget.eps_m, budget.eps_prime,
        budget.per_site_cap, seed, verdict,
    )
