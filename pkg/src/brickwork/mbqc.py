"""Gadget algebra of the measurement-based construction.

Single X measurements propagate gates along a chain (measuring a qubit
carrying rotation angle theta with outcome s applies H Z^s R_z(theta) to the
logical flow), four-site chains realize the conditional rotation R_z^s(theta),
and seven-site cells realize Z^{s3} H R_z(k pi/4) Z^{s3'}.  The module also
houses the CZ <-> Ising-coupling phase decomposition, the boundary-field
absorption rules that reconcile the Hamiltonian evolution with the plain
CZ network, and the break/bridge reduction from a square cluster to the
brickwork graph with its outcome relabelling.

All operator comparisons are up to global phase (normalized Hilbert-Schmidt
overlap); byproducts are explicit data, never silently absorbed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .lattice import AngleField, Lattice, build_brickwork, cell_angles, CELL_SIZE
from . import statevec
from .statevec import (
    CZ,
    Distribution,
    HADAMARD,
    IDENTITY_2,
    PAULI_Z,
    PureState,
    apply_local_unitary,
    distribution_in_bases,
    init_plus,
    postselect,
    rz,
)

HALF_PI = math.pi / 2.0


def zpow(s: int) -> np.ndarray:
    return PAULI_Z if s else IDENTITY_2


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized Hilbert-Schmidt overlap |tr(A^dag B)| / (|A| |B|); 1 iff A ~ B
    up to a phase (and scale)."""
    num = abs(np.trace(a.conj().T @ b))
    den = math.sqrt(
        float(np.trace(a.conj().T @ a).real) * float(np.trace(b.conj().T @ b).real)
    )
    return num / den


def propagate_single_measurement(theta: float, s: int) -> np.ndarray:
    """The gate H Z^s R_z(theta) realized by one X measurement with outcome s."""
    if s not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    return HADAMARD @ zpow(s) @ rz(theta)


def chain_state(angles, input_amps=None) -> PureState:
    """Chain of len(angles)+1 qubits: the input rides qubit 0, every other
    qubit starts in |+>, consecutive qubits are CZ-entangled, and qubit k
    carries rotation angle angles[k]."""
    length = len(angles)
    n = length + 1
    if input_amps is None:
        state = init_plus(n)
    else:
        input_amps = np.asarray(input_amps, dtype=complex)
        idx = np.arange(1 << n)
        amps = input_amps[idx & 1] * 2.0 ** (-length / 2.0)
        state = PureState(n, amps).check()
    for k, theta in enumerate(angles):
        if theta:
            state = apply_local_unitary(state, [k], rz(theta))
    for k in range(n - 1):
        state = apply_local_unitary(state, [k, k + 1], CZ)
    return state


def measure_chain(state: PureState, outcomes) -> tuple[PureState, float]:
    """X-measure the first len(outcomes) qubits of a chain, postselecting the
    given outcomes; returns the residual state and the branch probability."""
    probability = 1.0
    for t in outcomes:
        state, p = postselect(state, 0, "X", int(t))
        probability *= p
    return state, probability


@dataclass(frozen=True)
class Gadget:
    """A measured chain with declared postselection string and target gate.

    ``byproducts`` records how outcome flips act: positions listed under
    ``right_z`` pick up a right Pauli-Z byproduct when flipped alone, and the
    ``paired`` positions must flip together (they re-select the conditional
    branch rather than dressing the target).
    """

    name: str
    angles: tuple[float, ...]
    postselection: tuple[int, ...]
    target: np.ndarray
    byproducts: dict

    def __post_init__(self):
        if len(self.angles) != len(self.postselection):
            raise ValueError("angles and postselection string differ in length")
        gram = self.target.conj().T @ self.target
        if np.max(np.abs(gram - np.eye(self.target.shape[0]))) > 1e-10:
            raise ValueError("target is not unitary")

    def realized_operator(self, outcomes=None) -> np.ndarray:
        """The 2x2 operator the chain applies for the given outcome string
        (default: the declared postselection), reconstructed by simulation."""
        outcomes = self.postselection if outcomes is None else tuple(outcomes)
        columns = []
        for basis in ((1.0, 0.0), (0.0, 1.0)):
            out, p = measure_chain(chain_state(self.angles, basis), outcomes)
            columns.append(out.amps * math.sqrt(p))
        return np.stack(columns, axis=1)

    def fidelity(self) -> float:
        return similarity(self.realized_operator(), self.target)


def conditional_rotation_gadget(theta: float, s: int) -> Gadget:
    """Four X measurements with angles (theta/2, 0, -theta/2, 0) postselected
    on (0, s, 0, s) realize R_z^s(theta)."""
    if s not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    target = rz(theta) if s else IDENTITY_2
    return Gadget(
        name=f"conditional-rotation(theta={theta:.6g}, s={s})",
        angles=(theta / 2.0, 0.0, -theta / 2.0, 0.0),
        postselection=(0, s, 0, s),
        target=target,
        byproducts={"right_z": (0, 2), "paired": (1, 3)},
    )


def hrz_k_gadget(k: int, s3_prime: int) -> Gadget:
    """Seven-site cell realizing Z^{s3} H R_z(k pi/4) Z^{s3'}, k = s1 s2 s3 in
    binary, via postselection (s1^s3', s2, 0, s2, 0, s3, 0) on the fixed
    angles (pi/8, 0, -pi/4, 0, pi/4, 0, -pi/8)."""
    if not 0 <= k <= 7:
        raise ValueError("k must lie in 0..7")
    if s3_prime not in (0, 1):
        raise ValueError("s3_prime must be 0 or 1")
    s1, s2, s3 = (k >> 2) & 1, (k >> 1) & 1, k & 1
    target = zpow(s3) @ HADAMARD @ rz(k * math.pi / 4.0) @ zpow(s3_prime)
    return Gadget(
        name=f"hrz(k={k}, s3'={s3_prime})",
        angles=cell_angles(),
        postselection=(s1 ^ s3_prime, s2, 0, s2, 0, s3, 0),
        target=target,
        byproducts={"right_z": (0, 2, 4, 6), "paired": (1, 3), "k_lsb": 5},
    )


def cz_phase_decomposition() -> tuple[np.ndarray, float]:
    """CZ = e^{i pi/4} e^{-i pi/4 I.Z} e^{-i pi/4 Z.I} e^{i pi/4 Z.Z} as
    diagonal 4x4 factors; returns (product, max-norm residual vs CZ)."""
    s0 = np.array([1.0, -1.0, 1.0, -1.0])
    s1 = np.array([1.0, 1.0, -1.0, -1.0])
    quarter = math.pi / 4.0
    product = (
        np.exp(1j * quarter)
        * np.exp(-1j * quarter * s1)
        * np.exp(-1j * quarter * s0)
        * np.exp(1j * quarter * s0 * s1)
    )
    matrix = np.diag(product)
    residual = float(np.max(np.abs(matrix - CZ)))
    return matrix, residual


def cz_network_state(lattice: Lattice, field: AngleField) -> PureState:
    """The ideal circuit picture: R_z(theta_i) on every site of |+>^N followed
    by a CZ on every edge, applied as dense gates (independent of the phase
    program path)."""
    field.require_matching(lattice)
    state = init_plus(lattice.num_sites)
    for i, theta in enumerate(field.angles):
        if theta:
            state = apply_local_unitary(state, [i], rz(theta))
    for i, j in sorted(lattice.edges):
        state = apply_local_unitary(state, [i, j], CZ)
    return state


# ---------------------------------------------------------------------------
# Field absorption: Eq.-4 evolution vs the plain CZ network
# ---------------------------------------------------------------------------

def _wrap_angle(theta: float) -> float:
    """Reduce to (-pi, pi]; a 2 pi shift on one site is a global phase."""
    reduced = math.remainder(theta, 2.0 * math.pi)
    return reduced


@dataclass(frozen=True)
class FlipRules:
    """Classical corrections accompanying an absorbed field.

    ``outcome_flips`` lists degree-2 sites whose X result must be negated
    (their leftover field is a Pauli Z).  ``input_compensations`` records the
    pi/2 added to each degree-1 boundary site, cancelling the R_z(-pi/2)
    byproduct the coupling rewrite leaves on the circuit input.
    ``relabeled_cells`` lists degree-3 rung sites whose angle shift re-encodes
    the cell's logical bits as s2 -> s2^1, s3 -> s3^s2; this renames gadget
    labels only and leaves the sampled distribution untouched.
    """

    outcome_flips: frozenset[int]
    input_compensations: tuple[tuple[int, float], ...]
    relabeled_cells: tuple[int, ...]

    @property
    def xor_mask(self) -> int:
        return sum(1 << i for i in self.outcome_flips)

    def apply_to_distribution(self, dist: Distribution) -> Distribution:
        mask = self.xor_mask
        if mask == 0:
            return dist
        idx = np.arange(dist.probs.size)
        return Distribution(dist.num_sites, dist.probs[idx ^ mask])

    def apply_to_bits(self, bits: str) -> str:
        return "".join(
            str(int(b) ^ 1) if i in self.outcome_flips else b
            for i, b in enumerate(bits)
        )


def absorb_fields(lattice: Lattice, raw_field: AngleField) -> tuple[AngleField, FlipRules]:
    """Fold the per-edge R_z(-pi/2) endpoint factors of the coupling rewrite
    into the site fields, by degree:

      degree 1: add pi/2 to the site angle (boundary input compensation);
      degree 2: keep the angle, flip that site's measurement result;
      degree 3: shift the angle by -pi/2 mod 2 pi (pi/8 becomes pi/8 - pi/2)
                and record the logical relabel s2 -> s2^1, s3 -> s3^s2.

    Evolving Eq. 4 with the returned field and applying the outcome flips
    reproduces the CZ-network distribution with the raw angles exactly.
    """
    raw_field.require_matching(lattice)
    adjusted = list(raw_field.angles)
    flips: set[int] = set()
    compensations: list[tuple[int, float]] = []
    relabeled: list[int] = []
    for i in range(lattice.num_sites):
        degree = lattice.degree(i)
        if degree == 0:
            continue
        if degree == 1:
            adjusted[i] = _wrap_angle(adjusted[i] + HALF_PI)
            compensations.append((i, HALF_PI))
        elif degree == 2:
            flips.add(i)
        elif degree == 3:
            adjusted[i] = _wrap_angle(adjusted[i] - HALF_PI)
            relabeled.append(i)
        else:
            raise ValueError(f"site {i} has degree {degree} > 3; not a brickwork graph")
    rules = FlipRules(frozenset(flips), tuple(compensations), tuple(relabeled))
    return AngleField(tuple(adjusted), raw_field.coupling), rules


# ---------------------------------------------------------------------------
# Break and bridge
# ---------------------------------------------------------------------------

BRIDGE_COUPLING = np.diag(np.exp(1j * math.pi / 4.0 * np.array([1.0, -1.0, -1.0, 1.0])))
ZZ_4 = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)

_RED_OPERATORS = {
    ("Z", 0): np.eye(4, dtype=complex),
    ("Z", 1): ZZ_4,
    ("X", 0): BRIDGE_COUPLING,
    ("X", 1): BRIDGE_COUPLING @ ZZ_4,
}


def red_site_measurement(basis: str, outcome: int) -> tuple[np.ndarray, float]:
    """Effect of measuring the R_z(pi/2)-rotated center of a three-qubit
    cluster; returns (effective operator on the two neighbors, branch
    probability).

    Z with outcome 0 breaks the edges (identity); Z with 1 leaves Z.Z.  X
    with outcome 0 bridges the neighbors with e^{i pi/4 Z.Z}; X with 1
    bridges and flips both neighbor results.  The operator is reconstructed
    from the simulated Kraus map and checked against the declared form.
    """
    if basis not in ("Z", "X"):
        raise ValueError("basis must be 'Z' or 'X'")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    columns = []
    for b in range(4):
        amps = np.zeros(8, dtype=complex)
        amps[(b << 1) | 0] = statevec.SQRT_HALF
        amps[(b << 1) | 1] = statevec.SQRT_HALF
        state = PureState(3, amps).check()
        state = apply_local_unitary(state, [0], rz(HALF_PI))
        state = apply_local_unitary(state, [0, 1], CZ)
        state = apply_local_unitary(state, [0, 2], CZ)
        projected, p = postselect(state, 0, basis, outcome)
        columns.append(projected.amps * math.sqrt(p))
    kraus = np.stack(columns, axis=1)
    expected = _RED_OPERATORS[(basis, outcome)]
    if similarity(kraus, expected) < 1.0 - 1e-12:
        raise ArithmeticError("simulated red-site Kraus deviates from the declared operator")
    probability = float(np.trace(kraus.conj().T @ kraus).real) / 4.0
    return expected.copy(), probability


# ---------------------------------------------------------------------------
# Cluster -> brickwork reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RedSite:
    cluster_index: int
    basis: str
    kind: str  # bridge | break-edge | break-center
    retained_neighbors: tuple[int, ...]
    cascade_sources: tuple[int, ...]


@dataclass(frozen=True)
class ReductionPlan:
    """Which cluster sites get measured out and how outcomes relabel.

    ``retained[t]`` is the cluster index carrying target site ``t``.  A red
    site with effective outcome 1 XORs its ``retained_neighbors`` into the
    outcome mask; X-measured reds first fold in the Z outcomes of the
    adjacent plaquette-center reds (``cascade_sources``).
    """

    cluster: Lattice
    target: Lattice
    retained: tuple[int, ...]
    red_sites: tuple[RedSite, ...]

    @property
    def num_red(self) -> int:
        return len(self.red_sites)

    def bases(self) -> list[str]:
        tags = ["X"] * self.cluster.num_sites
        for red in self.red_sites:
            tags[red.cluster_index] = red.basis
        return tags

    def to_json(self) -> str:
        payload = {
            "cluster": {"rows": self.cluster.rows, "cols": self.cluster.cols},
            "target": {
                "kind": self.target.kind,
                "rows": self.target.rows,
                "cols": self.target.cols,
            },
            "retained": list(self.retained),
            "red_sites": [
                {
                    "site": red.cluster_index,
                    "basis": red.basis,
                    "kind": red.kind,
                    "retained_neighbors": list(red.retained_neighbors),
                    "cascade_sources": list(red.cascade_sources),
                }
                for red in self.red_sites
            ],
            "num_red": self.num_red,
        }
        return json.dumps(payload, sort_keys=True)


def plan_reduction(cluster: Lattice, target: Lattice) -> ReductionPlan:
    """Plan break/bridge measurements turning a (2a-1) x (2b-1) cluster into
    the given graph on the a x b grid of odd-position sites.

    Grid-neighbor pairs of the target get a bridge (X); the other in-between
    sites and every plaquette center get a break (Z).
    """
    if cluster.rows % 2 == 0 or cluster.cols % 2 == 0:
        raise ValueError("cluster dimensions must be odd to host a reduction")
    a, b = (cluster.rows + 1) // 2, (cluster.cols + 1) // 2
    if (target.rows, target.cols) != (a, b):
        raise ValueError(
            f"target grid {target.rows}x{target.cols} does not match cluster {a}x{b}"
        )
    for i, j in target.edges:
        (ri, ci, _), (rj, cj, _) = target.site_at(i), target.site_at(j)
        if abs(ri - rj) + abs(ci - cj) != 1:
            raise ValueError("target edges must connect grid neighbors")

    retained = tuple(
        cluster.site_index(2 * tr, 2 * tc) for tr in range(a) for tc in range(b)
    )
    reds = []
    for r in range(cluster.rows):
        for c in range(cluster.cols):
            if r % 2 == 0 and c % 2 == 0:
                continue
            index = cluster.site_index(r, c)
            if r % 2 == 1 and c % 2 == 1:
                reds.append(RedSite(index, "Z", "break-center", (), ()))
                continue
            if r % 2 == 0:  # between horizontal neighbors
                t1 = target.site_index(r // 2, (c - 1) // 2)
                t2 = target.site_index(r // 2, (c + 1) // 2)
                centers = [
                    cluster.site_index(rr, c)
                    for rr in (r - 1, r + 1)
                    if 0 <= rr < cluster.rows
                ]
            else:  # between vertical neighbors
                t1 = target.site_index((r - 1) // 2, c // 2)
                t2 = target.site_index((r + 1) // 2, c // 2)
                centers = [
                    cluster.site_index(r, cc)
                    for cc in (c - 1, c + 1)
                    if 0 <= cc < cluster.cols
                ]
            pair = tuple(sorted((t1, t2)))
            if pair in target.edges:
                reds.append(RedSite(index, "X", "bridge", pair, tuple(centers)))
            else:
                reds.append(RedSite(index, "Z", "break-edge", pair, ()))
    return ReductionPlan(cluster, target, retained, tuple(reds))


def reduce_cluster_to_brickwork(cluster: Lattice) -> ReductionPlan:
    """Reduction onto the brickwork graph; the cluster must be
    (2m-1) x (14n-1) so the retained grid holds whole seven-site cells."""
    if cluster.rows % 2 == 0 or cluster.cols % 2 == 0:
        raise ValueError("cluster dimensions must be odd")
    a, b = (cluster.rows + 1) // 2, (cluster.cols + 1) // 2
    if b % CELL_SIZE != 0:
        raise ValueError(
            f"retained width {b} is not a whole number of {CELL_SIZE}-site cells"
        )
    target = build_brickwork(a, b // CELL_SIZE)
    return plan_reduction(cluster, target)


def applied_retained_field(plan: ReductionPlan, target_field: AngleField) -> AngleField:
    """Rotation angles the square protocol applies on retained sites: the raw
    target angle plus pi/2 per bridged edge, so the bridge couplings compose
    to plain CZs of the target graph."""
    target_field.require_matching(plan.target)
    angles = tuple(
        _wrap_angle(target_field.angles[t] + plan.target.degree(t) * HALF_PI)
        for t in range(plan.target.num_sites)
    )
    return AngleField(angles, target_field.coupling)


def square_model_state(plan: ReductionPlan, target_field: AngleField) -> PureState:
    """Cluster state with R_z(pi/2) on every red site and the absorbed target
    rotations on retained sites, before any measurement."""
    applied = applied_retained_field(plan, target_field)
    state = init_plus(plan.cluster.num_sites)
    for red in plan.red_sites:
        state = apply_local_unitary(state, [red.cluster_index], rz(HALF_PI))
    for t, cluster_index in enumerate(plan.retained):
        theta = applied.angles[t]
        if theta:
            state = apply_local_unitary(state, [cluster_index], rz(theta))
    for i, j in sorted(plan.cluster.edges):
        state = apply_local_unitary(state, [i, j], CZ)
    return state


def square_model_distribution(plan: ReductionPlan, target_field: AngleField) -> Distribution:
    """Joint distribution over all cluster sites, reds measured in their
    designated bases and retained sites in X."""
    state = square_model_state(plan, target_field)
    return distribution_in_bases(state, plan.bases())


def marginalize_square_to_brickwork(d_square: Distribution, plan: ReductionPlan) -> Distribution:
    """Relabel (x', y) -> x and sum out the red outcomes y.

    Each red with effective outcome 1 contributes a Z.Z byproduct on its two
    retained neighbors; bridge outcomes are first XORed with the adjacent
    plaquette-center results.  Also verifies q_y = 1/2^r for every y.
    """
    cluster_n = plan.cluster.num_sites
    if d_square.num_sites != cluster_n:
        raise ValueError("distribution does not match the plan's cluster")
    outcomes = np.arange(1 << cluster_n)
    probs = d_square.probs

    def bit(site: int) -> np.ndarray:
        return (outcomes >> site) & 1

    mask = np.zeros(outcomes.shape, dtype=np.int64)
    for red in plan.red_sites:
        if not red.retained_neighbors:
            continue
        flag = bit(red.cluster_index)
        if red.basis == "X":
            for center in red.cascade_sources:
                flag = flag ^ bit(center)
        neighbor_mask = sum(1 << t for t in red.retained_neighbors)
        mask = mask ^ np.where(flag == 1, neighbor_mask, 0)

    x_prime = np.zeros(outcomes.shape, dtype=np.int64)
    for t, cluster_index in enumerate(plan.retained):
        x_prime |= bit(cluster_index) << t
    x_final = x_prime ^ mask

    target_probs = np.zeros(1 << plan.target.num_sites)
    np.add.at(target_probs, x_final, probs)

    if plan.num_red:
        y_index = np.zeros(outcomes.shape, dtype=np.int64)
        for pos, red in enumerate(plan.red_sites):
            y_index |= bit(red.cluster_index) << pos
        y_probs = np.zeros(1 << plan.num_red)
        np.add.at(y_probs, y_index, probs)
        expected = 0.5 ** plan.num_red
        worst = float(np.max(np.abs(y_probs - expected)))
        if worst > 1e-9:
            raise ValueError(f"red-site marginal deviates from 1/2^r by {worst:.3e}")
    return Distribution(plan.target.num_sites, target_probs)


def reduced_state_nominal(plan: ReductionPlan, target_field: AngleField) -> tuple[PureState, float]:
    """Postselect every red site on its nominal outcome (0 in its basis);
    returns the retained-site state (target row-major order) and the branch
    probability, which is 1/2^r."""
    state = square_model_state(plan, target_field)
    probability = 1.0
    for red in sorted(plan.red_sites, key=lambda red: -red.cluster_index):
        state, p = postselect(state, red.cluster_index, red.basis, 0)
        probability *= p
    return state, probability
