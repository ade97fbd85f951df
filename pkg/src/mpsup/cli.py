"""Command-line front end.

Exit codes: 0 ok, 1 input error, 2 structural failure, 3 certification failed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from ._config import config_context
from .exceptions import STRUCTURAL_ERRORS, InvalidInput, MPSUpError, TooLarge
from .io import canonical_form_to_dict, dumps, load_mps, load_state, rows_csv, schmidt_csv
from .mps import TIMPS
from .permlab import Bipartition, certify_mps_up, schmidt_spectrum
from .structure import (
    ProductDecomposition,
    block_injectivity_length,
    block_projectors,
    canonical_form,
    eta,
    injectivity_length,
    is_normal,
    product_decompose,
)

EXIT_OK, EXIT_INPUT, EXIT_STRUCTURAL, EXIT_CERT = 0, 1, 2, 3


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol-rank", type=float, default=1e-10)
    parser.add_argument("--amp-cap", type=int, default=2**24)
    parser.add_argument("--perm-samples", type=int, default=50)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--normalized", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpsup", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structure of a TI MPS tensor")
    p.add_argument("mps_file", type=Path)
    p.add_argument("--N", type=int, default=None, help="system size (default 4p)")
    _common(p)

    p = sub.add_parser("certify", help="MPS-up certificate of a state")
    p.add_argument("state_file", type=Path, help=".msv file or MPS JSON")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--N", type=int, default=None, help="system size for a TI MPS file")
    _common(p)

    p = sub.add_parser("reproduce", help="run a named experiment")
    p.add_argument("experiment")
    p.add_argument("--N", type=int, default=None)
    _common(p)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------


def analyze_report(A, N: int | None, seed: int = 0, normalized: bool = False) -> dict:
    nrm = is_normal(A)
    cf = canonical_form(A, N, seed=seed)
    N = 4 * cf.p if N is None else N
    report: dict = {
        "normal": nrm.normal,
        "peripheral": nrm.peripheral,
        "commutant_dim": nrm.commutant_dim,
        "period": cf.p,
        "N": N,
        "b": cf.b,
        "blocks": [
            {"D": blk.D, "r": blk.r, "mu": blk.mu, "eta": eta(blk.tensor).eta} for blk in cf.blocks
        ],
        "weights": cf.weights(N),
        "normalization": cf.normalization(N),
        "inactive": [j for j, on in enumerate(cf.active(N)) if not on],
        "exact_gauge": cf.exact_gauge,
        "canonical_form": canonical_form_to_dict(cf),
    }
    if cf.b == 1:
        report["injectivity_length"] = injectivity_length(cf.blocks[0].tensor)
    else:
        L = block_injectivity_length(cf)
        report["block_injectivity_length"] = L
        try:
            ang = block_projectors(cf, L)
            report["angles"] = [
                {"cos_theta": a.cos_theta, "csc_theta": a.csc_theta, "opnorm": a.opnorm} for a in ang.blocks
            ]
        except TooLarge as exc:
            report["angles"] = f"skipped: {exc}"
    dec = product_decompose(A, N, seed=seed)
    if isinstance(dec, ProductDecomposition):
        scale = dec.normalization if normalized and dec.normalization > 0 else 1.0
        report["decomposition"] = {
            "cluster_size": dec.cluster_size,
            "terms": [{"beta": b / scale, "phi": phi} for b, phi in dec.terms],
            "inactive": dec.inactive,
        }
    else:
        report["obstruction"] = [f"block {j} D={D}" for j, D in dec.blocks]
    return report


def cmd_analyze(args) -> int:
    mps, N_file = load_mps(args.mps_file)
    if not isinstance(mps, TIMPS):
        raise InvalidInput("analyze needs a 'ti' MPS file")
    N = args.N if args.N is not None else N_file
    report = analyze_report(mps.A, N, args.seed, args.normalized)
    if args.format == "csv":
        rows = [
            {"block": j, "D": blk["D"], "r": blk["r"], "eta": blk["eta"]} for j, blk in enumerate(report["blocks"])
        ]
        _emit(rows_csv(rows), args.out)
    else:
        _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    psi = load_state_arg(args)
    if args.normalized:
        psi = psi.normalized()
    rep = certify_mps_up(psi, args.D, samples=args.perm_samples, seed=args.seed)
    ok = rep.passes(args.eps)
    if args.format == "csv":
        worst = rep.worst_permutation
        reports = []
        for m in range(1, psi.N):
            reports.append(schmidt_spectrum(psi, Bipartition(worst.order[:m], psi.N)))
        _emit(schmidt_csv(reports), args.out)
    else:
        out = {
            "D": rep.D,
            "eps": args.eps,
            "eps_star": rep.eps_star,
            "pass": ok,
            "permutations_tested": len(rep.permutations),
            "worst_permutation": rep.worst_permutation.labels(),
            "worst_cut": rep.worst_cut,
        }
        _emit(dumps(out), args.out)
    print(f"eps* = {rep.eps_star:.6g} ({'pass' if ok else 'fail'} at eps = {args.eps:g})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CERT


def load_state_arg(args):
    if args.N is not None and not str(args.state_file).endswith(".msv"):
        from .mps import materialize

        mps, _ = load_mps(args.state_file)
        return materialize(mps, args.N) if isinstance(mps, TIMPS) else materialize(mps)
    return load_state(args.state_file)


def cmd_reproduce(args) -> int:
    params = {"seed": args.seed}
    if args.N is not None:
        params["N"] = args.N
    result = experiments.run(args.experiment, **params)
    if args.format == "csv":
        _emit(rows_csv(result["rows"]), args.out)
    else:
        _emit(dumps(result), args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "certify": cmd_certify, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol_rank <= 0 or args.amp_cap < 1 or args.perm_samples < 0:
            raise InvalidInput("--tol-rank must be > 0, --amp-cap >= 1 and --perm-samples >= 0")
        with config_context(tol_rank=args.tol_rank, amp_cap=args.amp_cap):
            return COMMANDS[args.command](args)
    except STRUCTURAL_ERRORS as exc:
        print(f"structural failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except (MPSUpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["analyze_report", "build_parser", "main"]
