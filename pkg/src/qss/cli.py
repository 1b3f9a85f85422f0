"""Command-line surface.

Subcommands: pmf, estimate, sweep, pattern, disk, hdr, verify.  Every output
file carries the full effective configuration (CSV/report header comments,
JSON sidecars next to binary outputs), so a run can be reproduced
byte-for-byte from its own header.  Exit codes: 0 success, 1 runtime or
tolerance failure, 2 usage error.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, bench, imaging, oracle, phasedist, schemes
from .kernels import BACKEND

_SWEEP_LADDER_KNOB = {
    "mc": "n_shot",
    "pea": "T",
    "bpea": "T",
    "abpea": "T",
    "mlae": "t",
    "qcoin": "t",
}


class UsageError(Exception):
    """Bad flag combination or value; maps to exit code 2."""


class ToleranceError(Exception):
    """A verification suite exceeded its tolerance; maps to exit code 1."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _header_lines(command: str, config: dict) -> list:
    pairs = " ".join(f"{k}={_fmt(v)}" for k, v in config.items())
    return [f"# qss {command}", f"# {pairs}"]


def _write_csv(path, header_lines, columns, rows) -> None:
    lines = list(header_lines)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as f:
            f.write(text)


def _write_sidecar(path, command: str, config: dict) -> None:
    doc = {"command": f"qss {command}", "version": __version__, "config": config}
    with open(str(path) + ".json", "w", encoding="ascii") as f:
        json.dump(doc, f, sort_keys=True, indent=2, default=_fmt)
        f.write("\n")


def _write_diff_report(path, command, config, counts, total) -> None:
    lines = _header_lines(command, config)
    lines.append("threshold,count,fraction")
    for thr, count in counts:
        lines.append(f"{_fmt(thr)},{count},{_fmt(count / total)}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _write_svg(path, series, log_x, log_y, xlabel, ylabel, header) -> None:
    """Minimal polyline chart: an inspection aid, not a plotting framework."""
    width, height = 640, 480
    ml, mr, mt, mb = 70, 20, 20, 45
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if (not log_x or x > 0) and (not log_y or y > 0):
                pts.append((x, y))
    if not pts:
        raise ValueError("nothing to plot")

    def tx(v, lo, hi, log):
        if log:
            v, lo, hi = np.log10(v), np.log10(lo), np.log10(hi)
        return (v - lo) / (hi - lo) if hi > lo else 0.5

    xs_all = [p[0] for p in pts]
    ys_all = [p[1] for p in pts]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f"<!-- {' | '.join(h.lstrip('# ') for h in header)} -->",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
    ]
    for i, (name, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        coords = []
        for x, y in zip(xs, ys):
            if (log_x and x <= 0) or (log_y and y <= 0):
                continue
            px = ml + tx(x, x_lo, x_hi, log_x) * (width - ml - mr)
            py = height - mb - tx(y, y_lo, y_hi, log_y) * (height - mt - mb)
            coords.append(f"{px:.1f},{py:.1f}")
        out.append(
            f'<polyline points="{" ".join(coords)}" fill="none" stroke="{color}"/>'
        )
        out.append(
            f'<text x="{width - mr - 5}" y="{mt + 16 * (i + 1)}" text-anchor="end" '
            f'fill="{color}" font-size="12">{name}</text>'
        )
    scale = "log" if log_x else "linear"
    out.append(
        f'<text x="{(ml + width - mr) / 2:.0f}" y="{height - 8}" text-anchor="middle" '
        f'font-size="12">{xlabel} ({scale})</text>'
    )
    scale = "log" if log_y else "linear"
    out.append(
        f'<text x="14" y="{(mt + height - mb) / 2:.0f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {(mt + height - mb) / 2:.0f})">{ylabel} ({scale})</text>'
    )
    for v, anchor, px, py in (
        (x_lo, "start", ml, height - mb + 14),
        (x_hi, "end", width - mr, height - mb + 14),
    ):
        out.append(
            f'<text x="{px}" y="{py}" text-anchor="{anchor}" font-size="11">{_fmt(float(v))}</text>'
        )
    for v, py in ((y_lo, height - mb), (y_hi, mt + 10)):
        out.append(
            f'<text x="{ml - 4}" y="{py}" text-anchor="end" font-size="11">{_fmt(float(v))}</text>'
        )
    out.append("</svg>")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(out) + "\n")


def _add_scheme_args(p: argparse.ArgumentParser, with_scheme: bool = True) -> None:
    if with_scheme:
        p.add_argument(
            "--scheme",
            required=True,
            choices=sorted(_SWEEP_LADDER_KNOB),
            help="estimation scheme",
        )
    p.add_argument("--T", type=int, help="grid size 2^t (pea/bpea/abpea)")
    p.add_argument("--nshot", type=int, help="shots per estimate (mc/bpea/mlae/qcoin)")
    p.add_argument("--alpha", type=float, help="abpea window fraction in (0, 1]")
    p.add_argument("--nmin", type=int, help="abpea minimum samples")
    p.add_argument("--nmax", type=int, help="abpea maximum samples")
    p.add_argument("--t", type=int, help="stage count (mlae/qcoin)")
    p.add_argument("--mass", type=float, help="qcoin posterior mass (default 0.999)")


def _build_scheme(args) -> schemes.SchemeConfig:
    def need(flag, value):
        if value is None:
            raise UsageError(f"--scheme {args.scheme} requires --{flag}")
        return value

    try:
        if args.scheme == "mc":
            return schemes.McConfig(n_shot=need("nshot", args.nshot))
        if args.scheme == "pea":
            return schemes.PeaConfig(T=need("T", args.T))
        if args.scheme == "bpea":
            return schemes.BpeaConfig(T=need("T", args.T), n_shot=need("nshot", args.nshot))
        if args.scheme == "abpea":
            return schemes.AbpeaConfig(
                T=need("T", args.T),
                alpha=need("alpha", args.alpha),
                n_min=need("nmin", args.nmin),
                n_max=need("nmax", args.nmax),
            )
        if args.scheme == "mlae":
            return schemes.MlaeConfig(t=need("t", args.t), n_shot=need("nshot", args.nshot))
        if args.scheme == "qcoin":
            kwargs = {} if args.mass is None else {"mass": args.mass}
            return schemes.QcoinConfig(
                t=need("t", args.t), n_shot=need("nshot", args.nshot), **kwargs
            )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown scheme {args.scheme!r}")


def _scheme_config_dict(cfg: schemes.SchemeConfig) -> dict:
    out = {"scheme": cfg.name}
    for token in cfg.params().split():
        k, v = token.split("=")
        out[k] = v
    return out


def _make_config(name: str, params: dict) -> schemes.SchemeConfig:
    classes = {
        "mc": schemes.McConfig,
        "pea": schemes.PeaConfig,
        "bpea": schemes.BpeaConfig,
        "abpea": schemes.AbpeaConfig,
        "mlae": schemes.MlaeConfig,
        "qcoin": schemes.QcoinConfig,
    }
    if name not in classes:
        raise UsageError(f"unknown scheme {name!r}")
    try:
        return classes[name](**params)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad parameters for scheme {name}: {exc}") from exc


def _coerce_param(key: str, value):
    if key in ("alpha", "mass"):
        return float(value)
    return int(value)


# ----------------------------------------------------------------- commands


def _cmd_pmf(args) -> int:
    try:
        T = phasedist.check_grid_size(args.T)
        if args.dist == "pea":
            table = phasedist.pea_pmf(args.phi, T)
        else:
            table = phasedist.qc_pmf(args.phi, T)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    config = {
        "dist": args.dist,
        "phi": args.phi,
        "T": T,
        "seed": args.seed,
        "backend": BACKEND,
    }
    rows = list(zip(table.support.tolist(), table.mass.tolist()))
    _write_csv(args.csv, _header_lines("pmf", config), ["phitilde", "probability"], rows)
    return 0


def _cmd_estimate(args) -> int:
    cfg = _build_scheme(args)
    try:
        phi = phasedist.check_phase(args.phi)
        if args.trials < 1:
            raise ValueError("--trials must be >= 1")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = schemes.run_batch(
        np.full(args.trials, phi), cfg, seed=args.seed, threads=args.threads
    )
    config = {
        **_scheme_config_dict(cfg),
        "phi": phi,
        "trials": args.trials,
        "seed": args.seed,
        "backend": BACKEND,
    }
    rows = [
        (i, float(res.phase[i]), float(res.fraction[i]), int(res.queries[i]), int(res.shots[i]))
        for i in range(args.trials)
    ]
    _write_csv(
        args.csv,
        _header_lines("estimate", config),
        ["trial", "phase_estimate", "fraction_estimate", "queries", "shots"],
        rows,
    )
    return 0


def _parse_sweep_file(path, default_seed: int) -> bench.SweepSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read sweep spec: {exc}") from exc
    seed = default_seed
    n_truths = 10_000
    thresholds = bench.DEFAULT_THRESHOLDS
    configs = []
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON sweep spec: {exc}") from exc
        seed = int(doc.get("seed", seed))
        n_truths = int(doc.get("n_truths", n_truths))
        thresholds = tuple(float(x) for x in doc.get("thresholds", thresholds))
        for entry in doc.get("schemes", []):
            entry = dict(entry)
            name = entry.pop("scheme", None)
            if name is None:
                raise UsageError("sweep spec scheme entry missing 'scheme'")
            params = {k: _coerce_param(k, v) for k, v in entry.items()}
            configs.append(_make_config(name, params))
    else:
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            head_key, _, head_val = tokens[0].partition("=")
            if not head_val:
                raise UsageError(f"malformed sweep spec line: {raw!r}")
            if head_key == "scheme":
                params = {}
                for token in tokens[1:]:
                    k, _, v = token.partition("=")
                    if not v:
                        raise UsageError(f"malformed sweep spec line: {raw!r}")
                    params[k] = _coerce_param(k, v)
                configs.append(_make_config(head_val, params))
            elif head_key == "seed":
                seed = int(head_val)
            elif head_key == "n_truths":
                n_truths = int(head_val)
            elif head_key == "thresholds":
                thresholds = tuple(float(x) for x in head_val.split(","))
            else:
                raise UsageError(f"unknown sweep spec key {head_key!r}")
    try:
        return bench.SweepSpec(
            schemes=tuple(configs), n_truths=n_truths, seed=seed, thresholds=thresholds
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _inline_sweep_spec(args) -> bench.SweepSpec:
    if args.scheme is None or args.ladder is None:
        raise UsageError("sweep needs --spec FILE, or --scheme with --ladder")
    try:
        ladder = [int(x) for x in args.ladder.split(",") if x]
    except ValueError as exc:
        raise UsageError(f"malformed --ladder: {exc}") from exc
    if not ladder:
        raise UsageError("--ladder must list at least one value")
    knob = _SWEEP_LADDER_KNOB[args.scheme]
    configs = []
    for value in ladder:
        ns = argparse.Namespace(**vars(args))
        setattr(ns, {"n_shot": "nshot", "T": "T", "t": "t"}[knob], value)
        configs.append(_build_scheme(ns))
    thresholds = bench.DEFAULT_THRESHOLDS
    if args.thresholds:
        thresholds = tuple(float(x) for x in args.thresholds.split(","))
    try:
        return bench.SweepSpec(
            schemes=tuple(configs),
            n_truths=args.n_truths,
            seed=args.seed,
            thresholds=thresholds,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_sweep(args) -> int:
    if args.spec is not None:
        spec = _parse_sweep_file(args.spec, args.seed)
    else:
        spec = _inline_sweep_spec(args)
    rows = bench.run_sweep(spec, threads=args.threads)
    config = {
        "entries": len(spec.schemes),
        "n_truths": spec.n_truths,
        "thresholds": ",".join(_fmt(t) for t in spec.thresholds),
        "seed": spec.seed,
        "backend": BACKEND,
    }
    columns = ["scheme", "params", "mean_queries", "mae"] + [
        f"pba_{t:g}" for t in spec.thresholds
    ]
    out_rows = [
        (r.scheme, r.params, r.mean_queries, r.mae, *r.pba) for r in rows
    ]
    _write_csv(args.csv, _header_lines("sweep", config), columns, out_rows)
    if args.svg:
        grouped: dict = {}
        for r in rows:
            grouped.setdefault(r.scheme, ([], []))
            grouped[r.scheme][0].append(r.mean_queries)
            grouped[r.scheme][1].append(r.mae)
        series = [(name, xs, ys) for name, (xs, ys) in grouped.items()]
        _write_svg(
            args.svg, series, True, True, "queries", "mae",
            _header_lines("sweep", config),
        )
    return 0


def _cmd_pattern(args) -> int:
    cfg = _build_scheme(args)
    try:
        grid = bench.pattern_grid(args.step)
        if args.ntest < 1:
            raise ValueError("--ntest must be >= 1")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = bench.run_pattern(
        cfg, phi_step=args.step, n_test=args.ntest, seed=args.seed, threads=args.threads
    )
    config = {
        **_scheme_config_dict(cfg),
        "step": args.step,
        "n_test": args.ntest,
        "points": len(grid),
        "seed": args.seed,
        "backend": BACKEND,
    }
    out_rows = [(r.truth, r.bias, r.mae) for r in rows]
    _write_csv(args.csv, _header_lines("pattern", config), ["truth", "bias", "mae"], out_rows)
    if args.svg:
        xs = [r.truth for r in rows]
        series = [("bias", xs, [r.bias for r in rows]), ("mae", xs, [r.mae for r in rows])]
        _write_svg(
            args.svg, series, False, False, "truth", "bias / mae",
            _header_lines("pattern", config),
        )
    return 0


def _cmd_disk(args) -> int:
    cfg = _build_scheme(args)
    try:
        disk = imaging.generate_gray_disk(args.size)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    noisy = imaging.simulate_scalar(disk, cfg, seed=args.seed, threads=args.threads)
    config = {
        **_scheme_config_dict(cfg),
        "size": args.size,
        "seed": args.seed,
        "backend": BACKEND,
    }
    imaging.save_png8(noisy, args.png)
    _write_sidecar(args.png, "disk", config)
    if args.truth_png:
        imaging.save_png8(disk, args.truth_png)
        _write_sidecar(args.truth_png, "disk", config)
    counts = imaging.diff_exceedance(disk, noisy)
    _write_diff_report(str(args.png) + ".diff.txt", "disk", config, counts, disk.size)
    return 0


def _cmd_hdr(args) -> int:
    scheme_cfg = _build_scheme(args)
    try:
        cfg = imaging.PipelineConfig(
            scheme=scheme_cfg, b=args.b, b0=args.b0, seed=args.seed
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    img = imaging.load_pfm(args.infile)
    if img.ndim != 3:
        raise imaging.PfmError("hdr pipeline expects a color (PF) input")
    noisy = imaging.simulate_hdr(img, cfg, threads=args.threads)
    config = {
        **_scheme_config_dict(scheme_cfg),
        "in": os.path.basename(args.infile),
        "b": cfg.b,
        "b0": cfg.b0,
        "seed": args.seed,
        "backend": BACKEND,
    }
    imaging.save_png8(noisy, args.png)
    _write_sidecar(args.png, "hdr", config)
    if args.pfm:
        imaging.save_pfm(noisy, args.pfm)
        _write_sidecar(args.pfm, "hdr", config)
    counts = imaging.diff_exceedance(img, noisy, fraction_scale=2.0**-cfg.b0)
    _write_diff_report(str(args.png) + ".diff.txt", "hdr", config, counts, img.size)
    return 0


def _cmd_verify(args) -> int:
    if not 2 <= args.t <= oracle.MAX_ANCILLAS:
        raise UsageError(f"--t must lie in [2, {oracle.MAX_ANCILLAS}], got {args.t}")
    if args.cases < 1:
        raise UsageError("--cases must be >= 1")
    rng = np.random.default_rng(args.seed)
    print(f"# qss verify t={args.t} cases={args.cases} seed={args.seed}")

    dev_equiv = 0.0
    for _ in range(args.cases):
        t = int(rng.integers(2, args.t + 1))
        phi = float(rng.random() * 0.5)
        analytic = phasedist.qc_pmf(phi, 2**t).mass
        simulated = oracle.simulate_pea(phi, t).mass
        dev_equiv = max(dev_equiv, float(np.max(np.abs(analytic - simulated))))
    print(f"oracle-equivalence: max |qc_pmf - simulate_pea| = {dev_equiv:.3e} (tol 1e-10)")

    dev_count = 0.0
    dev_trunc_ok = True
    for _ in range(args.cases):
        n = int(rng.integers(1, 7))
        b = int(rng.integers(1, 7))
        b0 = int(rng.integers(0, b + 1))
        tbl = oracle.random_oracle_table(rng, n, b, b0)
        s_direct, s_via_g = oracle.verify_counting_relation(tbl)
        dev_count = max(dev_count, abs(s_direct - s_via_g))
        raw_mean = float(tbl.values.sum()) * 2.0**-n
        dev_trunc_ok &= abs(s_direct - raw_mean) < 2.0 ** (b0 - b)
    print(f"counting-relation: max |S_direct - S_via_g| = {dev_count:.3e} (tol 0, exact)")

    dev_angle = 0.0
    for _ in range(args.cases):
        n = int(rng.integers(1, 6))
        b = int(rng.integers(1, 6))
        b0 = int(rng.integers(0, b + 1))
        tbl = oracle.random_oracle_table(rng, n, b, b0)
        expected = float(
            np.arcsin(np.sqrt(oracle.count_g(tbl) / 2.0 ** (n + b))) / np.pi
        )
        try:
            measured = oracle.verify_rotation_angle(tbl)
        except oracle.DegenerateRotationError:
            measured = 0.0 if oracle.count_g(tbl) == 0 else 0.5
        dev_angle = max(dev_angle, abs(measured - expected))
    print(f"rotation-angle: max deviation = {dev_angle:.3e} (tol 1e-12)")

    failures = []
    if dev_equiv > 1e-10:
        failures.append("oracle-equivalence")
    if dev_count != 0.0:
        failures.append("counting-relation")
    if not dev_trunc_ok:
        failures.append("truncation-bound")
    if dev_angle > 1e-12:
        failures.append("rotation-angle")
    if failures:
        print(f"verify: FAIL ({', '.join(failures)})")
        raise ToleranceError(", ".join(failures))
    print("verify: PASS")
    return 0


# -------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("QSS_SEED", "42"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default_seed, help="master seed")
    common.add_argument(
        "--threads", type=int, default=os.cpu_count() or 1, help="worker threads"
    )

    parser = argparse.ArgumentParser(
        prog="qss",
        description="Quantum-counting supersampling simulation workbench",
    )
    parser.add_argument("--version", action="version", version=f"qss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", parents=[common], help="dump a counting PMF as CSV")
    p.add_argument("--scheme", dest="dist", required=True, choices=["pea", "qc"])
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--csv", default=None, help="output path (default stdout)")
    p.set_defaults(func=_cmd_pmf)

    p = sub.add_parser("estimate", parents=[common], help="run repeated estimates")
    _add_scheme_args(p)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("sweep", parents=[common], help="error vs query-cost sweep")
    p.add_argument("--spec", default=None, help="spec file (flat key=value or JSON)")
    _add_scheme_args(p, with_scheme=False)
    p.add_argument("--scheme", choices=sorted(_SWEEP_LADDER_KNOB), default=None)
    p.add_argument("--ladder", default=None, help="comma list for the size knob")
    p.add_argument("--n-truths", dest="n_truths", type=int, default=10_000)
    p.add_argument("--thresholds", default=None, help="comma list, e.g. 0.1,0.01")
    p.add_argument("--csv", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("pattern", parents=[common], help="bias/MAE across truths")
    _add_scheme_args(p)
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument("--ntest", type=int, default=10_000)
    p.add_argument("--csv", default=None)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=_cmd_pattern)

    p = sub.add_parser("disk", parents=[common], help="gray-disk noise experiment")
    _add_scheme_args(p)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--png", required=True, help="noisy output PNG")
    p.add_argument("--truth-png", dest="truth_png", default=None)
    p.set_defaults(func=_cmd_disk)

    p = sub.add_parser("hdr", parents=[common], help="HDR noise pipeline on a PFM")
    _add_scheme_args(p)
    p.add_argument("--in", dest="infile", required=True, help="input PFM (PF)")
    p.add_argument("--b", type=int, default=16, help="fixed-point total bits")
    p.add_argument("--b0", type=int, default=4, help="fixed-point integer bits")
    p.add_argument("--png", required=True, help="tone-mapped output PNG")
    p.add_argument("--pfm", default=None, help="optional noisy linear PFM")
    p.set_defaults(func=_cmd_hdr)

    p = sub.add_parser("verify", parents=[common], help="run the oracle suites")
    p.add_argument("--t", type=int, default=8, help="max ancilla count (<= 12)")
    p.add_argument("--cases", type=int, default=50)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qss {args.command}: {exc}", file=sys.stderr)
        return 2
    except ToleranceError:
        return 1
    except (OSError, imaging.PfmError) as exc:
        print(f"qss {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
