"""Random two-qubit brick gates and output-distribution statistics.

Random X outcomes on the outcome-encoding sites of a brick make each cell
apply H R_z(k pi/4) with k uniform on 0..7, so one brick realizes a random
two-qubit gate with eight angles drawn i.i.d. from the pi/4 grid.  The fixed
wiring used here (rungs entering every other cell column) is

    U = CZ . (H R_z(delta) x H R_z(delta')) . (H R_z(gamma) x H R_z(gamma'))
           . CZ . (H R_z(beta) x H R_z(beta')) . (H R_z(alpha) x H R_z(alpha'))

reading right to left, with unprimed angles on the first wire (qubit 0).  Any
fixed slot assignment generates the same gate ensemble up to relabelling; this
one puts delta, delta' between the rungs, where they decide entanglement:
the gate entangles some product state iff delta or delta' lies outside
{0, pi}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import AngleField, build_custom, cell_angles, CELL_SIZE
from .mbqc import cz_network_state
from .statevec import (
    CZ,
    Distribution,
    HADAMARD,
    qubit_cap,
    rz,
    walsh_hadamard,
)

ANGLE_GRID = tuple(k * math.pi / 4.0 for k in range(8))
ANGLE_NAMES = ("alpha", "beta", "gamma", "delta", "alpha'", "beta'", "gamma'", "delta'")


def _pair(op_wire0: np.ndarray, op_wire1: np.ndarray) -> np.ndarray:
    # qubit 0 is the low bit of the 4x4 index
    return np.kron(op_wire1, op_wire0)


def brick_unitary(angles) -> np.ndarray:
    a, b, g, d, ap, bp, gp, dp = angles
    column = lambda t0, t1: _pair(HADAMARD @ rz(t0), HADAMARD @ rz(t1))
    return (
        CZ
        @ column(d, dp)
        @ column(g, gp)
        @ CZ
        @ column(b, bp)
        @ column(a, ap)
    )


@dataclass(frozen=True)
class BrickGate:
    angles: tuple[float, ...]
    matrix: np.ndarray

    def __post_init__(self):
        if len(self.angles) != 8:
            raise ValueError("a brick gate has eight angles")
        gram = self.matrix.conj().T @ self.matrix
        if np.max(np.abs(gram - np.eye(4))) > 1e-10:
            raise ValueError("brick gate is not unitary")


def brick_gate(angles) -> BrickGate:
    angles = tuple(float(t) for t in angles)
    return BrickGate(angles, brick_unitary(angles))


def random_brick_gate(seed) -> BrickGate:
    """Eight angles drawn uniformly i.i.d. from {0, pi/4, ..., 7 pi/4}."""
    rng = np.random.default_rng(seed)
    steps = rng.integers(0, 8, size=8)
    return brick_gate(tuple(ANGLE_GRID[int(s)] for s in steps))


def operator_schmidt_values(unitary: np.ndarray) -> np.ndarray:
    """Singular values of the operator across the two-wire cut; a product
    gate has exactly one nonzero value."""
    reshuffled = unitary.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    return np.linalg.svd(reshuffled, compute_uv=False)


def operator_schmidt_rank(unitary: np.ndarray, tol: float = 1e-8) -> int:
    values = operator_schmidt_values(unitary)
    return int(np.sum(values > tol * values[0]))


def entangles_some_product_state(unitary: np.ndarray, resolution: int = 8, tol: float = 1e-6) -> bool:
    """Grid search over product inputs: apply the gate and look for an output
    whose 2x2 Schmidt decomposition has a second singular value above tol."""
    thetas = np.linspace(0.0, math.pi, resolution)
    phis = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
    states = np.array(
        [
            [math.cos(t / 2.0), math.sin(t / 2.0) * np.exp(1j * p)]
            for t in thetas
            for p in phis
        ]
    )
    # all product pairs  |a>_0 |b>_1 : amplitude at (b1 b0) is b[b1] * a[b0]
    products = np.einsum("ai,bj->abji", states, states).reshape(-1, 4)
    outputs = products @ unitary.T
    matrices = outputs.reshape(-1, 2, 2)  # rows index qubit 1, columns qubit 0
    singulars = np.linalg.svd(matrices, compute_uv=False)
    return bool(np.max(singulars[:, 1]) > tol)


def is_entangling(gate: BrickGate) -> bool:
    """True iff some product state leaves with Schmidt rank 2."""
    return entangles_some_product_state(gate.matrix)


def _ks_against_exp1(values: np.ndarray) -> float:
    values = np.sort(np.asarray(values, dtype=float))
    size = values.size
    cdf = 1.0 - np.exp(-values)
    ranks = np.arange(size, dtype=float)
    return float(np.max(np.maximum(cdf - ranks / size, (ranks + 1.0) / size - cdf)))


def porter_thomas_stat(dist: Distribution) -> float:
    """Kolmogorov-Smirnov distance between the rescaled output probabilities
    {2^N q_x} and the Exp(1) law they would follow for a chaotic circuit."""
    size = dist.probs.size
    if size < 16:
        raise ValueError("Porter-Thomas statistics need support of at least 16 outcomes")
    return _ks_against_exp1(dist.probs * size)


def _instance_lattice(m_cells: int, layers: int):
    cols = CELL_SIZE * layers + 1
    edges = []
    for r in range(m_cells):
        base = r * cols
        for c in range(cols - 1):
            edges.append((base + c, base + c + 1))
    for r in range(m_cells - 1):
        for c in range(layers):
            if (r + c) % 2 == 0:
                top = r * cols + c * CELL_SIZE
                edges.append((top, top + cols))
    lattice = build_custom(m_cells, cols, edges)
    pattern = cell_angles()
    angles = tuple(
        pattern[col % CELL_SIZE] if col < cols - 1 else 0.0
        for (_, col, _) in lattice.sites
    )
    return lattice, AngleField(angles)


def _instance_table(m_cells: int, layers: int):
    lattice, field = _instance_lattice(m_cells, layers)
    n = lattice.num_sites
    if n > qubit_cap():
        raise ValueError(f"{n} qubits exceeds the cap of {qubit_cap()}")
    table = walsh_hadamard(cz_network_state(lattice, field).amps)
    out_sites = [r * lattice.cols + (lattice.cols - 1) for r in range(m_cells)]
    rest_sites = [s for s in range(n) if s not in out_sites]
    out_offsets = np.array(
        [sum(((v >> t) & 1) << out_sites[t] for t in range(m_cells)) for v in range(1 << m_cells)]
    )
    return table, out_offsets, rest_sites


def _conditional_slice(table, out_offsets, rest_sites, rng):
    """One uniformly drawn outcome on the measured sites and the resulting
    conditional probabilities on the output column; zero-probability draws
    are skipped deterministically."""
    for _ in range(1000):
        base = 0
        for u in rest_sites:
            if rng.integers(0, 2):
                base |= 1 << u
        slice_probs = np.abs(table[out_offsets | base]) ** 2
        norm = slice_probs.sum()
        if norm > 1e-12:
            return slice_probs / norm
    raise RuntimeError("could not find a nonzero-probability outcome slice")


def random_instance_distribution(m_cells: int, layers: int, seed) -> Distribution:
    """Condition the brickwork state on uniformly random X outcomes everywhere
    except the final column; the conditional law on that column is one
    instance of the induced random circuit."""
    if m_cells < 1 or layers < 0:
        raise ValueError("need at least one row and a nonnegative layer count")
    table, out_offsets, rest_sites = _instance_table(m_cells, layers)
    rng = np.random.default_rng(seed)
    return Distribution(m_cells, _conditional_slice(table, out_offsets, rest_sites, rng))


def instance_probability_sample(m_cells: int, layers: int, instances: int, seed) -> np.ndarray:
    """Rescaled conditional probabilities 2^m q pooled over seeded random
    instances, sharing one simulated state; feeds the Porter-Thomas trend
    comparison when a single final column is too small for a KS statistic."""
    if instances < 1:
        raise ValueError("need at least one instance")
    table, out_offsets, rest_sites = _instance_table(m_cells, layers)
    rng = np.random.default_rng(seed)
    pooled = [
        _conditional_slice(table, out_offsets, rest_sites, rng) * (1 << m_cells)
        for _ in range(instances)
    ]
    return np.concatenate(pooled)


def pooled_porter_thomas_stat(values: np.ndarray) -> float:
    """KS distance of pooled rescaled probabilities against Exp(1)."""
    values = np.asarray(values, dtype=float)
    if values.size < 16:
        raise ValueError("need at least 16 pooled values")
    return _ks_against_exp1(values)
