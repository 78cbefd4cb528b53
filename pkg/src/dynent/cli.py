"""Command-line front end.

Subcommands:

* ``entropy``  -- rate quantities (closed form, finite-length reference
  rate, chain bound, regression bound) per grid point;
* ``scan``     -- entropy plus divisibility classification per grid point;
* ``revivals`` -- trace-norm trajectory of a Pauli observable;
* ``verify``   -- the named cross-check suite, one pass/fail line each.

Exit codes: 0 success, 1 usage error, 2 verification failure,
3 numerical-invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import verify as verify_mod
from .alf import alf_closed_form, entropy_sequence, qr_lower_bound, rate_estimate
from .collision import CollisionModel, reduced_dynamics
from .config import ScanConfig, load_config, parse_ratio_spec
from .divisibility import classify
from .envchain import build_env, entropy_rate, mutual_information
from .linalg import InvariantViolation, trace_norm
from .pauli import SIGMA

USAGE_ERROR = 1
VERIFICATION_FAILURE = 2
INVARIANT_VIOLATION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _emit(cfg: ScanConfig, schema: str, header: list[str], rows: list[dict]) -> None:
    if cfg.fmt == "json":
        payload = {"schema": schema, "rows": rows}
        text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    else:
        lines = [f"# schema={schema}", ",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(row[col]) for col in header))
        text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def cmd_entropy(cfg: ScanConfig) -> int:
    base = cfg.log_base_arg
    rows = []
    for ratio in cfg.delta_ratios():
        delta = float(ratio) * cfg.p
        env = build_env(cfg.p, cfg.r, delta)
        closed = alf_closed_form(cfg.p, cfg.r, delta, base)
        seq = entropy_sequence(CollisionModel(env=env), n_max=cfg.n_max, log_base=base)
        f_rate = rate_estimate(seq, "difference")
        chain = entropy_rate(env, base)
        qr = qr_lower_bound(env, base)
        rows.append({
            "delta_ratio": float(ratio), "delta": delta,
            "alf_entropy": closed, "f_rate": f_rate,
            "chain_rate": chain, "qr_bound": qr,
            "gap_f_minus_alf": f_rate - closed,
            "gap_chain_minus_alf": chain - closed,
            "gap_qr_minus_alf": qr - closed,
            "gap_chain_minus_f": chain - f_rate,
            "gap_qr_minus_f": qr - f_rate,
            "gap_qr_minus_chain": qr - chain,
        })
    header = ["delta_ratio", "delta", "alf_entropy", "f_rate", "chain_rate",
              "qr_bound", "gap_f_minus_alf", "gap_chain_minus_alf",
              "gap_qr_minus_alf", "gap_chain_minus_f", "gap_qr_minus_f",
              "gap_qr_minus_chain"]
    _emit(cfg, "dynent.entropy.v1", header, rows)
    return 0


def _scan_point(args: tuple) -> dict:
    p, r, ratio, horizon, log_base, seed, restarts = args
    delta = ratio * p
    env = build_env(p, r, delta)
    report = classify(env, horizon=horizon, restarts=restarts, seed=seed)
    failures = [s for s in report.first_failure_step.values() if s is not None]
    return {
        "delta_ratio": ratio,
        "alf_entropy": alf_closed_form(p, r, delta, log_base),
        "chain_rate": entropy_rate(env, log_base),
        "mutual_info": mutual_information(env, log_base),
        "region": report.region,
        "cp_div": report.cp_divisible,
        "tensor_p_div": report.tensor_p_divisible,
        "p_div": report.p_divisible,
        "gns_p_div": report.gns_p_divisible,
        "first_failure_step": min(failures) if failures else None,
    }


def cmd_scan(cfg: ScanConfig, plot_path: str | None = None) -> int:
    base = cfg.log_base_arg
    points = [(cfg.p, cfg.r, float(ratio), cfg.horizon, base, cfg.seed, cfg.restarts)
              for ratio in cfg.delta_ratios()]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_scan_point, points, chunksize=8))
    else:
        rows = [_scan_point(pt) for pt in points]
    regions = [row["region"] for row in rows]
    for i, row in enumerate(rows):
        neighbors = [regions[j] for j in (i - 1, i + 1) if 0 <= j < len(rows)]
        row["boundary"] = any(reg != regions[i] for reg in neighbors)
    header = ["delta_ratio", "alf_entropy", "chain_rate", "mutual_info",
              "region", "cp_div", "tensor_p_div", "p_div", "gns_p_div",
              "first_failure_step", "boundary"]
    _emit(cfg, "dynent.scan.v1", header, rows)
    if plot_path is not None:
        _render_scan_plot(rows, plot_path)
    return 0


def _render_scan_plot(rows: list[dict], path: str) -> None:
    """Entropy curve with the divisibility regions shaded underneath."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ratios = [row["delta_ratio"] for row in rows]
    entropies = [row["alf_entropy"] for row in rows]
    colors = {"CP-div": "#7f1d1d", "P⊗P-div": "#dc2626",
              "P-div": "#f9a8d4", "non-P-div": "#f5f5f4"}
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    start = 0
    for i in range(1, len(rows) + 1):
        if i == len(rows) or rows[i]["region"] != rows[start]["region"]:
            hi = ratios[i] if i < len(rows) else ratios[-1]
            ax.axvspan(ratios[start], hi, color=colors[rows[start]["region"]],
                       alpha=0.45, lw=0)
            start = i
    ax.plot(ratios, entropies, color="black", lw=1.8)
    ax.set_xlabel("delta / p")
    ax.set_ylabel("dynamical entropy")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c, alpha=0.45)
               for c in colors.values()]
    ax.legend(handles, list(colors), loc="upper right", fontsize=8)
    ax.set_xlim(ratios[0], ratios[-1])
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_revivals(cfg: ScanConfig, x: tuple[float, float, float],
                 at_ratio: float, n_max: int) -> int:
    xv = np.asarray(x, dtype=float)
    if xv.shape != (3,) or np.any(xv == 0.0):
        raise ValueError("revivals needs a 3-vector with all components nonzero")
    env = build_env(cfg.p, cfg.r, at_ratio * cfg.p)
    X = sum(xv[k - 1] * SIGMA[k] for k in (1, 2, 3))
    values = [trace_norm(X)]
    for n in range(1, n_max + 1):
        values.append(trace_norm(reduced_dynamics(env, n).apply(X)))
    rows = []
    for n, val in enumerate(values):
        revived = n >= 1 and val > values[n - 1] + cfg.tolerances.revival
        rows.append({"step": n, "trace_norm": val, "revival": revived})
    _emit(cfg, "dynent.revivals.v1", ["step", "trace_norm", "revival"], rows)
    return 0


def cmd_verify(cfg: ScanConfig) -> int:
    results = verify_mod.run_all(seed=cfg.seed, grid_steps=cfg.ratio_steps,
                                 horizon=cfg.horizon, restarts=cfg.restarts)
    if cfg.fmt == "json":
        payload = [{"name": res.name, "passed": res.passed, "detail": res.detail}
                   for res in results]
        text = json.dumps({"schema": "dynent.verify.v1", "checks": payload},
                          indent=2) + "\n"
        (open(cfg.out, "w", encoding="utf-8").write(text) if cfg.out
         else sys.stdout.write(text))
    else:
        for res in results:
            print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    return 0 if all(res.passed for res in results) else VERIFICATION_FAILURE


def build_parser() -> _Parser:
    parser = _Parser(prog="dynent", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--p", type=float, help="chain parameter p")
        sp.add_argument("--r", type=float, help="chain parameter r")
        sp.add_argument("--delta-ratio", metavar="MIN:MAX:STEPS",
                        help="grid of delta/p ratios")
        sp.add_argument("--nmax", type=int, help="entropy sequence length")
        sp.add_argument("--horizon", type=int, help="divisibility horizon")
        sp.add_argument("--log-base", choices=["e", "2"], help="entropy units")
        sp.add_argument("--seed", type=int, help="seed for randomized pieces")
        sp.add_argument("--jobs", type=int, help="parallel workers for scans")
        sp.add_argument("--restarts", type=int, help="optimizer restarts")
        sp.add_argument("--format", choices=["csv", "json"], dest="fmt")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")

    for name, helptext in (("entropy", "rate quantities per grid point"),
                           ("scan", "entropy plus divisibility classification"),
                           ("verify", "run the named cross-check suite"),
                           ("revivals", "trace-norm trajectory of an observable")):
        sp = sub.add_parser(name, help=helptext)
        add_common(sp)
        if name == "scan":
            sp.add_argument("--plot", metavar="PATH",
                            help="also render the regions to a vector graphic")
        if name == "revivals":
            sp.add_argument("--x", default="1,1,1", metavar="X1,X2,X3",
                            help="Pauli components of the observable")
            sp.add_argument("--at-ratio", type=float, default=1.0,
                            help="delta/p at which to evolve")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    over = {key: getattr(args, key) for key in
            ("p", "r", "horizon", "seed", "jobs", "fmt", "out", "restarts")}
    over["n_max"] = args.nmax
    over["log_base"] = args.log_base
    if args.delta_ratio is not None:
        lo, hi, steps = parse_ratio_spec(args.delta_ratio)
        over.update(ratio_min=lo, ratio_max=hi, ratio_steps=steps)
    return over


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except (ValueError, OSError) as exc:
        print(f"dynent: config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        if args.command == "entropy":
            return cmd_entropy(cfg)
        if args.command == "scan":
            return cmd_scan(cfg, plot_path=args.plot)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "revivals":
            try:
                x = tuple(float(v) for v in args.x.split(","))
            except ValueError:
                print(f"dynent: bad --x value {args.x!r}", file=sys.stderr)
                return USAGE_ERROR
            try:
                return cmd_revivals(cfg, x, args.at_ratio, cfg.n_max)
            except ValueError as exc:
                print(f"dynent: {exc}", file=sys.stderr)
                return USAGE_ERROR
    except InvariantViolation as exc:
        print(f"dynent: numerical invariant violated: {exc}", file=sys.stderr)
        return INVARIANT_VIOLATION
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
