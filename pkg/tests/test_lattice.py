import math

import pytest

from brickwork.lattice import (
    AngleField,
    CELL_SIZE,
    build_brickwork,
    build_cluster,
    build_custom,
    canonical_angle_field,
    cell_angles,
    lattice_from_json,
    lattice_to_json,
    rung_columns,
)

PI = math.pi


def brickwork_edge_count(m, n):
    horizontal = m * (CELL_SIZE * n - 1)
    vertical = sum(len(rung_columns(r, n)) for r in range(m - 1))
    return horizontal, vertical


def test_single_cell_has_no_vertical_edges():
    lat = build_brickwork(1, 1)
    assert lat.num_sites == 7
    assert len(lat.edges) == 6
    assert all(r1 == r2 for (i, j) in lat.edges for (r1, _, _), (r2, _, _) in [(lat.site_at(i), lat.site_at(j))])


def test_two_rows_one_cell_has_exactly_one_rung():
    lat = build_brickwork(2, 1)
    vertical = [
        (i, j)
        for (i, j) in lat.edges
        if lat.site_at(i)[0] != lat.site_at(j)[0]
    ]
    assert vertical == [(0, 7)]  # slot 0 of each row's first cell


@pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 4)])
def test_site_and_edge_counts_match_closed_forms(m, n):
    lat = build_brickwork(m, n)
    horizontal, vertical = brickwork_edge_count(m, n)
    assert lat.num_sites == 7 * m * n
    assert len(lat.edges) == horizontal + vertical


@pytest.mark.parametrize("m,n", [(1, 1), (2, 2), (3, 3), (4, 4)])
def test_brickwork_degrees_bounded_by_three(m, n):
    lat = build_brickwork(m, n)
    degrees = {lat.degree(i) for i in range(lat.num_sites)}
    assert degrees <= {1, 2, 3}


def test_rebuild_is_deterministic():
    assert build_brickwork(3, 2) == build_brickwork(3, 2)
    assert build_cluster(4, 5) == build_cluster(4, 5)


def test_site_indexing_is_row_major_bijection():
    lat = build_brickwork(2, 2)
    seen = set()
    for idx in range(lat.num_sites):
        r, c, _ = lat.site_at(idx)
        assert lat.site_index(r, c) == idx
        seen.add(idx)
    assert seen == set(range(lat.num_sites))


@pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (-2, 3)])
def test_nonpositive_dimensions_rejected(m, n):
    with pytest.raises(ValueError):
        build_brickwork(m, n)
    with pytest.raises(ValueError):
        build_cluster(m, n)


@pytest.mark.parametrize(
    "rows,cols,sites,edges",
    [(1, 1, 1, 0), (2, 2, 4, 4), (3, 3, 9, 12)],
)
def test_cluster_counts(rows, cols, sites, edges):
    lat = build_cluster(rows, cols)
    assert lat.num_sites == sites
    assert len(lat.edges) == edges
    assert len(lat.edges) == 2 * rows * cols - rows - cols


def test_cluster_degrees():
    lat = build_cluster(3, 3)
    corner = lat.site_index(0, 0)
    center = lat.site_index(1, 1)
    assert lat.degree(corner) == 2
    assert lat.degree(center) == 4


def test_canonical_angles_follow_the_seven_slot_pattern():
    lat = build_brickwork(2, 3)
    field = canonical_angle_field(lat)
    expected = (PI / 8, 0.0, -PI / 4, 0.0, PI / 4, 0.0, -PI / 8)
    assert cell_angles() == pytest.approx(expected)
    for idx, (_, c, _) in enumerate(lat.sites):
        assert field.angles[idx] == expected[c % CELL_SIZE]


def test_canonical_field_is_translation_invariant():
    lat = build_brickwork(3, 4)
    field = canonical_angle_field(lat)
    cells = {}
    for idx, (r, c, _) in enumerate(lat.sites):
        cells.setdefault((r, c // CELL_SIZE), []).append(field.angles[idx])
    patterns = {tuple(v) for v in cells.values()}
    assert len(patterns) == 1


def test_single_cell_field_has_exactly_seven_angles():
    field = canonical_angle_field(build_brickwork(1, 1))
    assert len(field.angles) == 7
    assert field.coupling == PI / 4


def test_canonical_field_rejects_non_brickwork():
    with pytest.raises(ValueError):
        canonical_angle_field(build_cluster(2, 2))


def test_roles_partition_each_cell():
    lat = build_brickwork(1, 2)
    roles = [role for (_, _, role) in lat.sites]
    assert roles[:7] == ["blue", "blue", "white", "blue", "white", "blue", "white"]
    assert roles[:7] == roles[7:]


def test_custom_lattice_rejects_bad_edges():
    with pytest.raises(ValueError):
        build_custom(1, 3, [(0, 0)])
    with pytest.raises(ValueError):
        build_custom(1, 3, [(0, 9)])


def test_field_site_count_must_match():
    lat = build_brickwork(1, 1)
    with pytest.raises(ValueError):
        AngleField((0.0,) * 6).require_matching(lat)


def test_json_roundtrip_brickwork_and_custom():
    lat = build_brickwork(2, 2)
    field = canonical_angle_field(lat)
    again, field_again = lattice_from_json(lattice_to_json(lat, field))
    assert again == lat
    assert field_again.angles == pytest.approx(field.angles)

    custom = build_custom(1, 3, [(0, 1), (1, 2)])
    again, none_field = lattice_from_json(lattice_to_json(custom))
    assert again == custom
    assert none_field is None


def test_json_rejects_unknown_kind():
    with pytest.raises(ValueError):
        lattice_from_json('{"kind": "triangular", "m": 2, "n": 2}')
