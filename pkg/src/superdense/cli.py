"""Command-line harness for reproducible experiments.

Subcommands: ``basis build|check|certify``, ``protocol
scramble|verify|canonicalize``, ``random run|mp``.  Data goes to files or
stdout, diagnostics to stderr.  Exit codes: 0 success, 1 verification
failure, 2 usage or parse error.  A fixed seed makes outputs byte-identical
across runs of the same build.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bases, randlab, rigidity, serialize
from . import protocol as protocol_mod


def _emit(doc, out_path: str | None) -> None:
    text = json.dumps(doc, indent=1)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _build_basis(args) -> bases.UnitaryBasis:
    if args.kind == "clock-shift":
        return bases.clock_shift_basis(args.d)
    if args.kind == "pauli-tensor":
        return bases.pauli_tensor_basis(args.d)
    if args.kind == "matching":
        return bases.matching_basis(args.d)
    if args.kind == "werner3":
        return bases.werner3_basis(complex(math.cos(args.beta_angle), math.sin(args.beta_angle)))
    raise ValueError(f"unknown basis kind {args.kind!r}")


def _cmd_basis_build(args) -> int:
    basis = _build_basis(args)
    if args.output:
        serialize.save_basis(basis, args.output)
    else:
        _emit(
            {
                "d": basis.d,
                "elements": [serialize.matrix_to_json(e) for e in basis.elements],
                **({"labels": list(basis.labels)} if basis.labels else {}),
            },
            None,
        )
    return 0


def _cmd_basis_check(args) -> int:
    basis = serialize.load_basis(args.input)
    report = bases.verify_orthogonal_unitary_basis(basis, args.tol)
    _emit(
        {
            "passed": report.passed,
            "element_count_ok": report.element_count_ok,
            "max_unitarity_violation": report.max_unitarity_violation,
            "max_orthogonality_violation": report.max_orthogonality_violation,
            "tol": report.tol,
        },
        args.output,
    )
    return 0 if report.passed else 1


def _cmd_basis_certify(args) -> int:
    basis = serialize.load_basis(args.input)
    try:
        certs = bases.certify_not_clock_shift(basis, args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    doc = {
        "certificates": [
            {
                "kind": c.kind,
                "witness": list(c.witness),
                "witness_value": (
                    [c.witness_value.real, c.witness_value.imag]
                    if isinstance(c.witness_value, complex)
                    else c.witness_value
                ),
            }
            for c in certs
        ]
    }
    _emit(doc, args.output)
    return 0


def _cmd_protocol_scramble(args) -> int:
    rng = np.random.default_rng(args.seed)
    proto, planted = protocol_mod.random_scrambled_bw(
        rng, args.dim_a_prime, args.dim_b_prime, args.blocks
    )
    serialize.save_protocol(proto, args.output)
    if args.planted:
        serialize.save_decomposition(planted, args.planted)
    return 0


def _cmd_protocol_verify(args) -> int:
    proto = serialize.load_protocol(args.input)
    report = protocol_mod.verify_errorless(proto, args.tol)
    _emit(
        {
            "passed": report.passed,
            "max_state_overlap": report.max_state_overlap,
            "worst_pair": list(report.worst_pair),
            "max_operator_violation": report.max_operator_violation,
            "tol": report.tol,
        },
        args.output,
    )
    return 0 if report.passed else 1


def _cmd_protocol_canonicalize(args) -> int:
    proto = serialize.load_protocol(args.input)
    try:
        dec = rigidity.canonicalize(proto, args.tol)
    except (rigidity.NiceFormError, RuntimeError, ValueError) as exc:
        print(f"error: canonicalization failed: {exc}", file=sys.stderr)
        return 1
    report = rigidity.verify_decomposition(proto, dec, args.tol)
    if args.output:
        serialize.save_decomposition(dec, args.output)
    print(
        json.dumps(
            {
                "passed": report.passed,
                "state_residual": report.state_residual,
                "encoder_residuals": list(report.encoder_residuals),
            },
            indent=1,
        )
    )
    return 0 if report.passed else 1


def _cmd_random_run(args) -> int:
    stats = randlab.distinguishability_experiment(
        args.d, args.trials, args.seed, pgm_limit=args.pgm_limit
    )
    if args.esd_csv:
        rng = np.random.default_rng([args.seed, 0])
        sample = randlab.esd(randlab.random_protocol_ensemble(args.d, rng), seed=args.seed)
        serialize.save_eigenvalues_csv(sample.eigenvalues, args.esd_csv)
    _emit(
        {
            "d": stats.d,
            "trials": stats.trials,
            "seed": stats.seed,
            "hc": list(stats.hc),
            "pgm": list(stats.pgm),
            "mean_sqrt_eig": list(stats.mean_sqrt_eig),
            "max_eig": list(stats.max_eig),
            "hc_mean": stats.hc_mean,
            "hc_std": stats.hc_std,
            "max_eig_mean": stats.max_eig_mean,
            "ks_distance": stats.ks_distance,
            "limit_8_over_3pi": randlab.EIGHT_OVER_3PI,
        },
        args.output,
    )
    return 0


def _cmd_random_mp(args) -> int:
    params = randlab.MPParams(r=args.r)
    if args.esd_csv:
        eigenvalues = serialize.load_eigenvalues_csv(args.esd_csv)
        sample = randlab.ESDSample(d=0, n=len(eigenvalues), eigenvalues=tuple(eigenvalues))
        _emit(
            {
                "r": args.r,
                "n": len(eigenvalues),
                "ks_distance": randlab.kolmogorov_distance(sample, params),
            },
            args.output,
        )
        return 0
    xs = np.linspace(0.0, params.b, args.points)
    lines = ["x,density,cdf"]
    for x in xs:
        lines.append(
            f"{float(x)!r},{randlab.mp_density(params, float(x))!r},"
            f"{randlab.mp_cdf(params, float(x))!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superdense",
        description="Workbench for superdense coding protocols and random-encoder experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    basis_p = sub.add_parser("basis", help="orthogonal unitary bases")
    basis_sub = basis_p.add_subparsers(dest="subcommand", required=True)

    build = basis_sub.add_parser("build", help="construct a basis and write it as JSON")
    build.add_argument(
        "--kind",
        required=True,
        choices=["clock-shift", "pauli-tensor", "matching", "werner3"],
    )
    build.add_argument("--d", type=int, default=3, help="dimension (ignored for werner3)")
    build.add_argument(
        "--beta-angle",
        type=float,
        default=math.pi / 3,
        help="werner3 phase angle in radians (default pi/3)",
    )
    build.add_argument("-o", "--output", default=None)
    build.set_defaults(func=_cmd_basis_build)

    check = basis_sub.add_parser("check", help="verify orthogonality and unitarity")
    check.add_argument("input")
    check.add_argument("--tol", type=float, default=1e-9)
    check.add_argument("-o", "--output", default=None)
    check.set_defaults(func=_cmd_basis_check)

    certify = basis_sub.add_parser("certify", help="non-equivalence certificates")
    certify.add_argument("input")
    certify.add_argument("--tol", type=float, default=1e-9)
    certify.add_argument("-o", "--output", default=None)
    certify.set_defaults(func=_cmd_basis_certify)

    proto_p = sub.add_parser("protocol", help="superdense coding protocols")
    proto_sub = proto_p.add_subparsers(dest="subcommand", required=True)

    scramble = proto_sub.add_parser("scramble", help="sample a scrambled qubit protocol")
    scramble.add_argument("--seed", type=int, default=0)
    scramble.add_argument("--dim-a-prime", type=int, default=2)
    scramble.add_argument("--dim-b-prime", type=int, default=2)
    scramble.add_argument("--blocks", type=int, default=1)
    scramble.add_argument("-o", "--output", required=True)
    scramble.add_argument("--planted", default=None, help="also write the planted decomposition")
    scramble.set_defaults(func=_cmd_protocol_scramble)

    verify = proto_sub.add_parser("verify", help="check errorless-ness")
    verify.add_argument("input")
    verify.add_argument("--tol", type=float, default=1e-9)
    verify.add_argument("-o", "--output", default=None)
    verify.set_defaults(func=_cmd_protocol_verify)

    canon = proto_sub.add_parser("canonicalize", help="recover the canonical decomposition")
    canon.add_argument("input")
    canon.add_argument("--tol", type=float, default=rigidity.DEFAULT_STAGE_TOL)
    canon.add_argument("-o", "--output", default=None)
    canon.set_defaults(func=_cmd_protocol_canonicalize)

    random_p = sub.add_parser("random", help="Haar-random encoder experiments")
    random_sub = random_p.add_subparsers(dest="subcommand", required=True)

    run = random_sub.add_parser("run", help="distinguishability statistics")
    run.add_argument("--d", type=int, default=8)
    run.add_argument("--trials", type=int, default=5)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--pgm-limit", type=int, default=16)
    run.add_argument("--esd-csv", default=None, help="write first-trial eigenvalues as CSV")
    run.add_argument("-o", "--output", default=None)
    run.set_defaults(func=_cmd_random_run)

    mp = random_sub.add_parser("mp", help="Marchenko-Pastur reference curve or KS distance")
    mp.add_argument("--r", type=float, default=1.0)
    mp.add_argument("--points", type=int, default=201)
    mp.add_argument("--esd-csv", default=None, help="compare stored eigenvalues instead")
    mp.add_argument("-o", "--output", default=None)
    mp.set_defaults(func=_cmd_random_mp)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except serialize.SerializationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
