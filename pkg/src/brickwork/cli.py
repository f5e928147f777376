"""Command-line surface for batch experiments and report generation.

All randomness flows from the --seed flag; identical invocations produce
byte-identical output.  JSON is the default format (sorted keys, no
timestamps); distributions can be exported as CSV and sample records as
newline-separated bitstrings.  Exit codes: 0 success, 1 domain error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import certification as certify_mod
from . import ensemble as ensemble_mod
from . import mbqc, partition, statevec
from .lattice import build_brickwork, build_cluster, canonical_angle_field, lattice_from_json
from .statevec import int_to_bits


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _resolve_lattice(args):
    if getattr(args, "lattice", None):
        lattice, field = lattice_from_json(Path(args.lattice).read_text())
        if field is None:
            if lattice.kind != "brickwork":
                raise ValueError("lattice spec without angles requires kind=brickwork")
            field = canonical_angle_field(lattice)
        return lattice, field
    lattice = build_brickwork(args.m, args.n)
    return lattice, canonical_angle_field(lattice)


def _evolved_state(lattice, field):
    program = statevec.compile_phase_program(lattice, field)
    return statevec.apply_phase_program(statevec.init_plus(lattice.num_sites), program)


def _add_lattice_flags(parser):
    parser.add_argument("--m", type=int, default=1, help="brickwork cell rows")
    parser.add_argument("--n", type=int, default=1, help="brickwork cell columns")
    parser.add_argument("--lattice", help="JSON lattice spec path (overrides --m/--n)")


def _cmd_sample(args) -> str:
    lattice, field = _resolve_lattice(args)
    record = statevec.sample(_evolved_state(lattice, field), args.count, args.seed)
    if args.format == "bits":
        return record.export_text()
    return json.dumps(
        {"bases": "".join(record.bases), "outcomes": list(record.outcomes), "seed": record.seed},
        sort_keys=True,
    )


def _cmd_distribution(args) -> str:
    lattice, field = _resolve_lattice(args)
    dist = statevec.full_distribution(_evolved_state(lattice, field))
    if args.format == "csv":
        return dist.to_csv()
    return json.dumps({"num_sites": dist.num_sites, "probabilities": dist.as_dict()}, sort_keys=True)


def _cmd_amplitude(args) -> str:
    lattice, field = _resolve_lattice(args)
    amp = statevec.x_basis_amplitude(_evolved_state(lattice, field), args.x)
    return json.dumps(
        {"x": args.x, "re": amp.real, "im": amp.imag, "prob": abs(amp) ** 2},
        sort_keys=True,
    )


def _cmd_partition(args) -> str:
    lattice, field = _resolve_lattice(args)
    x = args.x if args.x is not None else "0" * lattice.num_sites
    value = partition.partition_function(lattice, field, x)
    residual = partition.verify_born_partition_identity(lattice, field, x)
    state = _evolved_state(lattice, field)
    q = abs(statevec.x_basis_amplitude(state, x)) ** 2
    return json.dumps(
        {
            "x": value.x,
            "re": value.value.real,
            "im": value.value.imag,
            "abs2": value.abs_squared,
            "q_from_statevec": q,
            "residual": residual,
        },
        sort_keys=True,
    )


def _cmd_verify_gadgets(args) -> str:
    checks: list[tuple[str, bool, float]] = []

    for s in (0, 1):
        for k in range(16):
            theta = k * np.pi / 8.0
            gadget = mbqc.conditional_rotation_gadget(theta, s)
            fid = gadget.fidelity()
            checks.append((gadget.name, fid >= 1.0 - 1e-10, fid))
    for k in range(8):
        for s3p in (0, 1):
            gadget = mbqc.hrz_k_gadget(k, s3p)
            fid = gadget.fidelity()
            checks.append((gadget.name, fid >= 1.0 - 1e-10, fid))
    _, residual = mbqc.cz_phase_decomposition()
    checks.append(("cz-phase-decomposition", residual <= 1e-12, 1.0 - residual))

    width = max(len(name) for name, _, _ in checks)
    lines = [
        f"{name:<{width}}  {'pass' if ok else 'FAIL'}  {fid:.12f}"
        for name, ok, fid in checks
    ]
    failures = sum(0 if ok else 1 for _, ok, _ in checks)
    lines.append(f"{failures} failures out of {len(checks)} checks")
    if failures:
        raise ValueError("\n".join(lines))
    return "\n".join(lines) + "\n"


def _cmd_reduce(args) -> str:
    cluster = build_cluster(2 * args.m - 1, 14 * args.n - 1)
    plan = mbqc.reduce_cluster_to_brickwork(cluster)
    return plan.to_json()


def _cmd_certify(args) -> str:
    lattice, field = _resolve_lattice(args)
    noise = certify_mod.NoiseModel(
        flip_probability=args.noise_flip,
        depolarize_site=args.depolarize_site,
        depolarize_weight=args.depolarize_weight,
    )
    records = None
    state = None
    if args.records:
        payload = json.loads(Path(args.records).read_text())
        records = [np.asarray(bits, dtype=np.int8) for bits in payload]
    else:
        state = mbqc.cz_network_state(lattice, field)
    report = certify_mod.certify(
        state,
        lattice,
        field,
        epsilon=args.epsilon,
        alpha=args.alpha,
        seed=args.seed,
        noise=noise,
        records=records,
    )
    return report.to_json()


def _cmd_ensemble_stats(args) -> str:
    entangling = 0
    rng = np.random.default_rng(args.seed)
    for _ in range(args.trials):
        gate = ensemble_mod.random_brick_gate(rng.integers(0, 2**63))
        if ensemble_mod.is_entangling(gate):
            entangling += 1
    pooled = ensemble_mod.instance_probability_sample(
        args.cells, args.layers, max(args.trials, 16), args.seed
    )
    payload = {
        "trials": args.trials,
        "entangling_fraction": entangling / args.trials,
        "ks": ensemble_mod.pooled_porter_thomas_stat(pooled),
    }
    return json.dumps(payload, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brickwork",
        description="Simulate and verify the translation-invariant Ising sampling model.",
    )
    parser.add_argument("--output", help="write the result to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="seeded X-basis samples of the evolved state")
    _add_lattice_flags(p)
    p.add_argument("--count", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "bits"), default="json")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("distribution", help="exact all-X outcome distribution")
    _add_lattice_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(handler=_cmd_distribution)

    p = sub.add_parser("amplitude", help="single X-basis amplitude <+_x|psi>")
    _add_lattice_flags(p)
    p.add_argument("--x", required=True, help="outcome bitstring, site 0 first")
    p.set_defaults(handler=_cmd_amplitude)

    p = sub.add_parser("partition", help="partition-function oracle and Born residual")
    _add_lattice_flags(p)
    p.add_argument("--x", help="outcome bitstring (default all zeros)")
    p.set_defaults(handler=_cmd_partition)

    p = sub.add_parser("verify-gadgets", help="exhaustive gadget identity suite")
    p.set_defaults(handler=_cmd_verify_gadgets)

    p = sub.add_parser("reduce", help="break/bridge plan for a cluster of whole cells")
    p.add_argument("--m", type=int, default=1, help="brickwork cell rows")
    p.add_argument("--n", type=int, default=1, help="brickwork cell columns")
    p.set_defaults(handler=_cmd_reduce)

    p = sub.add_parser("certify", help="parent-Hamiltonian certification report")
    _add_lattice_flags(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-flip", type=float, default=0.0, dest="noise_flip")
    p.add_argument("--depolarize-site", type=int, default=None, dest="depolarize_site")
    p.add_argument("--depolarize-weight", type=float, default=0.0, dest="depolarize_weight")
    p.add_argument("--records", help="JSON path: list of per-term 0/1 eigenvalue lists")
    p.set_defaults(handler=_cmd_certify)

    p = sub.add_parser("ensemble-stats", help="random brick-gate ensemble statistics")
    p.add_argument("--cells", type=int, default=2, help="brickwork rows of the instance")
    p.add_argument("--layers", type=int, default=1, help="cell columns before the output column")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_ensemble_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.handler(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
