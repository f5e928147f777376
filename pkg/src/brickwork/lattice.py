"""Brickwork and square (cluster) lattices with the fixed seven-angle cell pattern.

A lattice is a finite graph of qubit sites on a row/column grid.  Brickwork
lattices expand every logical circle into a horizontal chain of seven physical
sites carrying the fixed rotation angles (pi/8, 0, -pi/4, 0, pi/4, 0, -pi/8),
repeated identically in every cell.  Vertical "rung" edges between row pairs
realize the brick pattern; the rule lives in :func:`rung_columns` so it can be
swapped out via a custom JSON lattice if a different attachment is wanted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

PI = math.pi
PI_8 = math.pi / 8.0
DEFAULT_COUPLING = math.pi / 4.0

CELL_SIZE = 7
# Per-slot rotation angles of one seven-site cell, as multiples of PI_8.
CELL_ANGLE_STEPS = (1, 0, -2, 0, 2, 0, -1)
# Slots whose X outcomes encode the realized gate (s1^s3', s2, ., s2, ., s3, .).
BLUE_SLOTS = frozenset({0, 1, 3, 5})

ROLES = ("white", "blue", "red", "plain")


def cell_angles() -> tuple[float, ...]:
    """The seven-angle pattern (pi/8, 0, -pi/4, 0, pi/4, 0, -pi/8) in radians."""
    return tuple(step * PI_8 for step in CELL_ANGLE_STEPS)


@dataclass(frozen=True)
class Lattice:
    """Immutable site graph.

    Sites live on a ``rows x cols`` grid and are indexed row-major, so site
    ``(r, c)`` has index ``r * cols + c``; index 0 is the least significant
    bit in amplitude indices.  ``edges`` holds sorted index pairs.
    """

    kind: str
    rows: int
    cols: int
    sites: tuple[tuple[int, int, str], ...]
    edges: frozenset[tuple[int, int]]
    _adjacency: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("lattice dimensions must be positive")
        n = len(self.sites)
        seen = set()
        for idx, (r, c, role) in enumerate(self.sites):
            if role not in ROLES:
                raise ValueError(f"unknown site role {role!r}")
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"site {(r, c)} outside the {self.rows}x{self.cols} grid")
            if self.site_index(r, c) != idx:
                raise ValueError("sites must be listed row-major")
            seen.add((r, c))
        if len(seen) != n:
            raise ValueError("duplicate sites")
        adj: dict[int, list[int]] = {i: [] for i in range(n)}
        for i, j in self.edges:
            if i == j:
                raise ValueError("self-loop edge")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) references a missing site")
            if i > j:
                raise ValueError("edges must be stored as sorted pairs")
            adj[i].append(j)
            adj[j].append(i)
        max_degree = {"brickwork": 3, "cluster": 4}.get(self.kind)
        if max_degree is not None:
            for i, nbrs in adj.items():
                if len(nbrs) > max_degree:
                    raise ValueError(
                        f"site {i} has degree {len(nbrs)} > {max_degree} for kind={self.kind}"
                    )
        object.__setattr__(
            self, "_adjacency", {i: tuple(sorted(v)) for i, v in adj.items()}
        )

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    def site_index(self, row: int, col: int) -> int:
        return row * self.cols + col

    def site_at(self, index: int) -> tuple[int, int, str]:
        return self.sites[index]

    def neighbors(self, index: int) -> tuple[int, ...]:
        return self._adjacency[index]

    def degree(self, index: int) -> int:
        return len(self._adjacency[index])

    @property
    def num_cells_per_row(self) -> int:
        if self.kind != "brickwork":
            raise ValueError("cells are only defined for brickwork lattices")
        return self.cols // CELL_SIZE


@dataclass(frozen=True)
class AngleField:
    """Per-site rotation angles theta_i (radians) plus the Ising coupling J.

    The Hamiltonian field strength on site i is B_i = theta_i / 2, so that
    exp(-i B_i Z_i) = R_z(theta_i).
    """

    angles: tuple[float, ...]
    coupling: float = DEFAULT_COUPLING

    def angle(self, site: int) -> float:
        return self.angles[site]

    def with_angle(self, site: int, theta: float) -> "AngleField":
        updated = list(self.angles)
        updated[site] = theta
        return AngleField(tuple(updated), self.coupling)

    def require_matching(self, lattice: Lattice):
        if len(self.angles) != lattice.num_sites:
            raise ValueError(
                f"field covers {len(self.angles)} sites, lattice has {lattice.num_sites}"
            )


def rung_columns(row: int, n_cells: int) -> tuple[int, ...]:
    """Cell columns whose first site is joined vertically to the next row.

    The brick rule: row pair (r, r+1) is rung-joined at cell column c exactly
    when r + c is even (0-indexed), i.e. odd cell columns for the (1,2) row
    pair in 1-indexed terms and even cell columns for the (2,3) pair.  The
    rung attaches at slot 0 of the cell, the pi/8 site.
    """
    return tuple(c for c in range(n_cells) if (row + c) % 2 == 0)


def build_brickwork(m_cells: int, n_cells: int) -> Lattice:
    """Brickwork lattice of ``m_cells`` rows by ``n_cells`` seven-site cells.

    Each row is a horizontal chain of ``7 * n_cells`` sites; rows are joined
    by the rung pattern of :func:`rung_columns`.  Within a cell, slots
    {0, 1, 3, 5} are blue (outcome-encoding) and {2, 4, 6} are white.
    """
    if m_cells < 1 or n_cells < 1:
        raise ValueError("brickwork dimensions must be positive")
    cols = CELL_SIZE * n_cells
    sites = []
    for r in range(m_cells):
        for c in range(cols):
            role = "blue" if (c % CELL_SIZE) in BLUE_SLOTS else "white"
            sites.append((r, c, role))
    edges = set()
    for r in range(m_cells):
        base = r * cols
        for c in range(cols - 1):
            edges.add((base + c, base + c + 1))
    for r in range(m_cells - 1):
        for c in rung_columns(r, n_cells):
            top = r * cols + c * CELL_SIZE
            edges.add((top, top + cols))
    return Lattice("brickwork", m_cells, cols, tuple(sites), frozenset(edges))


def build_cluster(rows: int, cols: int) -> Lattice:
    """Square-grid cluster lattice: every grid neighbor pair is an edge."""
    if rows < 1 or cols < 1:
        raise ValueError("cluster dimensions must be positive")
    sites = tuple((r, c, "plain") for r in range(rows) for c in range(cols))
    edges = set()
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.add((i, i + 1))
            if r + 1 < rows:
                edges.add((i, i + cols))
    return Lattice("cluster", rows, cols, sites, frozenset(edges))


def build_custom(rows: int, cols: int, edges) -> Lattice:
    """Custom lattice over the full ``rows x cols`` grid with explicit edges."""
    sites = tuple((r, c, "plain") for r in range(rows) for c in range(cols))
    normalized = frozenset(tuple(sorted(map(int, e))) for e in edges)
    return Lattice("custom", rows, cols, sites, normalized)


def canonical_angle_field(lattice: Lattice) -> AngleField:
    """Translation-invariant seven-angle field with J = pi/4 on a brickwork lattice."""
    if lattice.kind != "brickwork":
        raise ValueError("the canonical angle field is defined on brickwork lattices")
    pattern = cell_angles()
    angles = tuple(
        pattern[c % CELL_SIZE] for (_, c, _) in lattice.sites
    )
    return AngleField(angles, DEFAULT_COUPLING)


def zero_angle_field(lattice: Lattice, coupling: float = DEFAULT_COUPLING) -> AngleField:
    return AngleField((0.0,) * lattice.num_sites, coupling)


def lattice_to_json(lattice: Lattice, field: AngleField | None = None) -> str:
    spec: dict = {"kind": lattice.kind, "m": lattice.rows, "n": lattice.cols}
    if lattice.kind == "brickwork":
        spec["m"] = lattice.rows
        spec["n"] = lattice.num_cells_per_row
    elif lattice.kind == "custom":
        spec["edges"] = sorted(list(e) for e in lattice.edges)
    if field is not None:
        spec["angles"] = {str(i): field.angles[i] for i in range(len(field.angles))}
    return json.dumps(spec, sort_keys=True)


def lattice_from_json(text: str) -> tuple[Lattice, AngleField | None]:
    """Parse the JSON lattice spec: {"kind", "m", "n", "edges"?, "angles"?}."""
    spec = json.loads(text)
    kind = spec["kind"]
    m, n = int(spec["m"]), int(spec["n"])
    if kind == "brickwork":
        lattice = build_brickwork(m, n)
    elif kind == "cluster":
        lattice = build_cluster(m, n)
    elif kind == "custom":
        lattice = build_custom(m, n, spec.get("edges", []))
    else:
        raise ValueError(f"unknown lattice kind {kind!r}")
    angles_spec = spec.get("angles")
    if angles_spec is None:
        field = None
    else:
        angles = [0.0] * lattice.num_sites
        for key, theta in angles_spec.items():
            angles[int(key)] = float(theta)
        field = AngleField(tuple(angles))
    return lattice, field
