"""Command line front end.

Every subcommand emits a single run record carrying the command name, the
parameters it actually used, the seed, the package version, and the wall
time, so a result file is reproducible on its own.  Records serialize to
JSON (default) or CSV; CSV keeps the provenance in a leading comment line.

Exit codes: 0 success, 2 usage, 3 I/O, 4 numeric or consistency failure,
5 compute-budget refusal.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .spectra import EigenSolverError, QuadratureError, mp_law
from .ratefn import ConsistencyError, RateContext, rate_zero
from .limits import asymptotic_limits, throughput
from .montecarlo import (
    BudgetError,
    Codebook,
    ReliabilityError,
    SimConfig,
    design_codebook,
    ldp_rate_estimate,
    min_chordal_distance,
    random_codebook,
    simulate_c_cdf,
    simulate_c_direct,
    simulate_c_spectral,
)

_CODEBOOK_MAGIC = "# fblimits codebook v1"


@dataclasses.dataclass(frozen=True)
class RunRecord:
    """Self-describing result of one CLI invocation."""

    command: str
    params: dict
    seed: int | None
    version: str
    duration_s: float
    payload: dict

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "RunRecord":
        data = json.loads(text)
        return RunRecord(**data)

    def to_csv(self) -> str:
        head = {
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "duration_s": self.duration_s,
        }
        buf = io.StringIO()
        buf.write("# fblimits-record " + json.dumps(head, sort_keys=True) + "\n")
        rows = self.payload.get("rows")
        if rows is not None:
            cols = list(rows[0].keys()) if rows else []
            buf.write(",".join(cols) + "\n")
            for row in rows:
                buf.write(",".join(_cell(row[c]) for c in cols) + "\n")
        else:
            buf.write("key,value\n")
            for key, val in self.payload.items():
                buf.write(f"{key},{_cell(val)}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "RunRecord":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# fblimits-record "):
            raise ValueError("not a run-record CSV: missing provenance line")
        head = json.loads(lines[0][len("# fblimits-record "):])
        header = lines[1].split(",")
        payload: dict
        if header == ["key", "value"]:
            payload = {}
            for ln in lines[2:]:
                key, _, val = ln.partition(",")
                payload[key] = _uncell(val)
        else:
            rows = []
            for ln in lines[2:]:
                cells = ln.split(",")
                rows.append({c: _uncell(v) for c, v in zip(header, cells)})
            payload = {"rows": rows}
        return RunRecord(payload=payload, **head)


def _cell(val) -> str:
    if val is None:
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    return str(val)


def _uncell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


# ---------------------------------------------------------------------------
# codebook files


def save_codebook(codebook: Codebook, path: str) -> None:
    """Text format: two comment lines, then one row of 2n floats per word."""
    mc = "none" if codebook.min_chordal is None else f"{codebook.min_chordal:.17g}"
    lines = [
        _CODEBOOK_MAGIC,
        f"# n={codebook.n} size={codebook.size} kind={codebook.kind} "
        f"seed={codebook.seed} min_chordal={mc}",
    ]
    for row in codebook.vectors:
        parts: list[str] = []
        for z in row:
            parts.append(f"{z.real:.17g}")
            parts.append(f"{z.imag:.17g}")
        lines.append(" ".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_codebook(path: str) -> Codebook:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0] != _CODEBOOK_MAGIC:
        raise ValueError(f"{path}: not a codebook file")
    try:
        meta = dict(tok.split("=", 1) for tok in raw[1].lstrip("# ").split())
        n = int(meta["n"])
        size = int(meta["size"])
        seed = int(meta["seed"])
        kind = meta["kind"]
        mc = None if meta["min_chordal"] == "none" else float(meta["min_chordal"])
    except (IndexError, KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed codebook header") from exc
    data = [ln.split() for ln in raw[2:] if ln.strip()]
    if len(data) != size:
        raise ValueError(f"{path}: expected {size} codewords, found {len(data)}")
    flat = np.array([[float(t) for t in row] for row in data], dtype=float)
    if flat.shape[1] != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} floats per row")
    vectors = flat[:, 0::2] + 1j * flat[:, 1::2]
    norms = np.linalg.norm(vectors, axis=1)
    if np.abs(norms - 1.0).max() > 1e-9:
        raise ValueError(f"{path}: codewords are not unit norm")
    return Codebook(n=n, vectors=vectors, kind=kind, seed=seed, min_chordal=mc)


# ---------------------------------------------------------------------------
# subcommands


def _limit_fields(beta: float, rate: float, sigma2: float | None) -> dict:
    res = asymptotic_limits(beta, rate)
    out = {
        "beta": beta,
        "r": rate,
        "x_minus": res.x_minus,
        "x_plus": res.x_plus,
        "c_min": res.c_min_limit,
        "c_max": res.c_max_limit,
        "r_min": res.r_min,
        "r_max": res.r_max,
        "branch_minus": res.branch_minus,
        "branch_plus": res.branch_plus,
    }
    if sigma2 is not None:
        out["throughput_cdma_min"] = throughput(res.c_min_limit, sigma2, "cdma_min")
        out["throughput_mimo_max"] = throughput(res.c_max_limit, sigma2, "mimo_max")
    return out


_MINUS_COLS = ("x_minus", "c_min", "branch_minus", "throughput_cdma_min")
_PLUS_COLS = ("x_plus", "c_max", "branch_plus", "throughput_mimo_max")


def _cmd_asymptotic(args, parser: argparse.ArgumentParser) -> dict:
    if args.beta <= 0.0:
        parser.error(f"--beta must be positive, got {args.beta}")
    if args.rate <= 0.0:
        parser.error(f"--rate must be positive, got {args.rate}")
    if args.sigma2 is not None and args.sigma2 <= 0.0:
        parser.error(f"--sigma2 must be positive, got {args.sigma2}")
    return _limit_fields(args.beta, args.rate, args.sigma2)


def _cmd_sweep(args, parser: argparse.ArgumentParser) -> dict:
    if args.beta <= 0.0:
        parser.error(f"--beta must be positive, got {args.beta}")
    if args.rates is not None:
        rates = [float(tok) for tok in args.rates.split(",") if tok.strip()]
    elif args.rate_min is not None and args.rate_max is not None:
        if args.points < 2:
            parser.error(f"--points must be >= 2, got {args.points}")
        if not args.rate_min < args.rate_max:
            parser.error("--rate-min must be below --rate-max")
        rates = [float(r) for r in np.linspace(args.rate_min, args.rate_max, args.points)]
    else:
        parser.error("give either --rates or both --rate-min and --rate-max")
    if not rates:
        parser.error("the rate list is empty")
    if min(rates) <= 0.0:
        parser.error("sweep rates must all be positive")
    drop: tuple[str, ...] = ()
    if args.mode == "min":
        drop = _PLUS_COLS
    elif args.mode == "max":
        drop = _MINUS_COLS
    rows = []
    for r in rates:
        fields = _limit_fields(args.beta, r, args.sigma2)
        rows.append({k: v for k, v in fields.items() if k not in drop})
    return {"rows": rows}


def _cmd_simulate(args, parser: argparse.ArgumentParser) -> dict:
    if args.codebook != "random" and args.method != "direct":
        parser.error("--codebook designed applies only to --method direct")
    cfg = SimConfig(
        n=args.n,
        m=args.m,
        r_fb=args.r_fb,
        trials=args.trials,
        seed=args.seed,
        mode=args.mode,
    )
    codebook = None
    if args.codebook == "designed":
        codebook = design_codebook(cfg.n, 1 << cfg.r_fb, cfg.seed)
    if args.method == "direct":
        est = simulate_c_direct(cfg, codebook=codebook, threads=args.threads)
    elif args.method == "spectral":
        est = simulate_c_spectral(cfg, threads=args.threads)
    else:
        est = simulate_c_cdf(cfg, samples=args.samples, threads=args.threads)

    beta = cfg.n / cfg.m
    rate = cfg.r_fb / cfg.n
    res = asymptotic_limits(beta, rate)
    limit = res.c_min_limit if cfg.mode == "min" else res.c_max_limit
    payload = {
        "mean": est.mean,
        "stderr": est.stderr,
        "trials": est.samples,
        "beta": beta,
        "r": rate,
        "limit": limit,
        "gap": est.mean - limit,
        "rel_gap": (est.mean - limit) / limit if limit != 0.0 else None,
    }
    if codebook is not None:
        payload["codebook_min_chordal"] = codebook.min_chordal
    return payload


def _cmd_design(args, parser: argparse.ArgumentParser) -> dict:
    if args.n < 1 or args.size < 1 or args.iterations < 1:
        parser.error("--n, --size and --iterations must all be >= 1")
    codebook = design_codebook(args.n, args.size, args.seed, iterations=args.iterations)
    baseline = random_codebook(args.n, args.size, args.seed)
    baseline_mc = min_chordal_distance(baseline) if args.size >= 2 else None
    save_codebook(codebook, args.codebook_out)
    return {
        "n": args.n,
        "size": args.size,
        "iterations": args.iterations,
        "min_chordal": codebook.min_chordal,
        "min_chordal_random": baseline_mc,
        "codebook_path": args.codebook_out,
    }


def _cmd_ldp(args, parser: argparse.ArgumentParser) -> dict:
    if args.beta <= 0.0:
        parser.error(f"--beta must be positive, got {args.beta}")
    law = mp_law(args.beta)
    if not (law.lambda_t_minus < args.x < law.lambda_plus) or args.x == 1.0:
        parser.error(
            f"--x must lie in ({law.lambda_t_minus:.6g}, {law.lambda_plus:.6g}) "
            "and away from the mean at 1"
        )
    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    if not sizes:
        parser.error("--sizes must list at least one size")
    limit = rate_zero(RateContext(law=law, x=args.x)).value
    pairs = ldp_rate_estimate(args.beta, args.x, sizes, args.samples, args.seed)
    rows = []
    for n, rate in pairs:
        rel = abs(rate - limit) / limit if limit > 0.0 else None
        rows.append({"n": n, "rate_estimate": rate, "rate_limit": limit, "rel_err": rel})
    return {"rows": rows}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fblimits",
        description="Asymptotic limits of finite-rate-feedback codebook selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", help="write the run record here instead of stdout")

    sp = sub.add_parser("asymptotic", help="limits of c_min and c_max at one (beta, rate)")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--sigma2", type=float, help="noise power for throughput columns")
    common(sp)

    sp = sub.add_parser("sweep", help="limits over a list of normalized feedback rates")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--rates", help="comma-separated rate values")
    sp.add_argument("--rate-min", type=float, help="sweep start (with --rate-max)")
    sp.add_argument("--rate-max", type=float, help="sweep end")
    sp.add_argument("--points", type=int, default=21)
    sp.add_argument("--mode", choices=("min", "max", "both"), default="both")
    sp.add_argument("--sigma2", type=float)
    common(sp)

    sp = sub.add_parser("simulate", help="finite-size Monte Carlo vs the limit")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--r-fb", type=int, required=True, help="feedback bits per channel use")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.add_argument("--method", choices=("direct", "spectral", "cdf"), default="direct")
    sp.add_argument(
        "--codebook",
        choices=("random", "designed"),
        default="random",
        help="designed packs a codebook first (direct method only)",
    )
    sp.add_argument("--samples", type=int, default=20000, help="CDF-route sample panel size")
    common(sp)

    sp = sub.add_parser("design", help="pack a codebook and write it to a file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--iterations", type=int, default=800)
    sp.add_argument("--codebook-out", required=True)
    common(sp)

    sp = sub.add_parser("ldp", help="empirical tail decay rates against the rate function")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--sizes", default="50,100,200", help="comma-separated spectrum sizes")
    sp.add_argument("--samples", type=int, default=20000)
    common(sp)

    return parser


_HANDLERS = {
    "asymptotic": _cmd_asymptotic,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "design": _cmd_design,
    "ldp": _cmd_ldp,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    start = time.perf_counter()
    try:
        payload = _HANDLERS[args.command](args, parser)
    except SystemExit as exc:  # parser.error inside a handler
        return int(exc.code or 0)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except (ConsistencyError, ReliabilityError, QuadratureError, EigenSolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    duration = time.perf_counter() - start
    record = RunRecord(
        command=args.command,
        params=_record_params(args),
        seed=getattr(args, "seed", None),
        version=__version__,
        duration_s=duration,
        payload=payload,
    )
    text = record.to_json() if args.format == "json" else record.to_csv()
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0


def _record_params(args: argparse.Namespace) -> dict:
    skip = {"command", "format", "out"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
