"""Command-line front end: ``python -m cgssl <subcommand> ...``.

Every subcommand writes into ``--out-dir`` (default: current directory) and
drops a ``<subcommand>.config.json`` echo with the resolved arguments and the
tool version. Flags override values read from ``--config``. Exit codes: 0 on
success, 1 on a runtime failure, 2 on a usage or configuration error; errors
are reported as one ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    iv_table, loglog_slope, read_sweep_csv, regression_table, time_benchmark, write_rows_csv,
)
from .augment import AugmentationSpec, augment
from .encoder import EncoderConfig, EncoderState
from .graph import Graph, GraphError, generate_synthetic, load_graph, save_graph
from .spectrum import (
    curves_svg, graph_spectrum, histogram, kde_curve, spectral_distance,
    write_curve_csv, write_histogram_csv, write_spectrum_csv,
)
from .theory import APPENDIX_D, BoundInputs, infonce_bounds, verify_lemma
from .trainer import ConfigError, DegenerateSplitError, TrainConfig, embed, linear_probe, split, train

SUBCOMMANDS = ("gen", "spectrum", "augment", "train", "sweep", "probe", "bounds", "verify",
               "analyze", "bench", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    return format(float(x), ".17g")


def default_seed() -> int:
    raw = os.environ.get("CGSSL_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CGSSL_SEED must be an integer, got {raw!r}") from None


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg})") from None


def _load_graph(path):
    if not Path(path).is_file():
        raise UsageError(f"cannot read {path}: no such file")
    try:
        return load_graph(path)
    except GraphError as exc:
        raise UsageError(str(exc)) from None


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo(out: Path, name, payload) -> None:
    payload = {"tool": "cgssl", "version": __version__, "command": name, **payload}
    (out / f"{name}.config.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _args_dict(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


# --------------------------------------------------------------------- gen


def cmd_gen(args):
    out = _out_dir(args)
    if args.kind == "er":
        if args.n is None or args.p is None:
            raise UsageError("gen --kind er needs --n and --p")
        params = {"n": args.n, "p": args.p, "feature_dim": args.feature_dim}
    else:
        if args.sizes is None or args.p_in is None or args.p_out is None:
            raise UsageError("gen --kind sbm needs --sizes, --p-in and --p-out")
        params = {"sizes": args.sizes, "p_in": args.p_in, "p_out": args.p_out,
                  "feature_dim": args.feature_dim, "feature_signal": args.feature_signal}
    graphs = [generate_synthetic(args.kind, params, seed=args.seed + i) for i in range(args.count)]
    save_graph(out / args.name, graphs[0] if args.count == 1 else graphs)
    _echo(out, "gen", _args_dict(args))
    print(f"wrote {out / args.name} ({args.count} graph(s), n={graphs[0].n}, m={graphs[0].m})")


# ---------------------------------------------------------------- spectrum


def cmd_spectrum(args):
    out = _out_dir(args)
    data = _load_graph(args.input)
    graphs = [data] if isinstance(data, Graph) else data
    spectra = [graph_spectrum(g) for g in graphs]
    if len(spectra) == 1:
        write_spectrum_csv(out / "spectrum.csv", spectra[0])
    else:
        for i, s in enumerate(spectra):
            write_spectrum_csv(out / f"spectrum_{i}.csv", s)
    dens, edges = histogram(np.concatenate([s.values for s in spectra]), bins=args.bins)
    write_histogram_csv(out / "histogram.csv", dens, edges)
    curve = kde_curve(spectra, grid_points=args.grid_points)
    write_curve_csv(out / "kde.csv", curve)
    if args.svg:
        (out / "kde.svg").write_text(curves_svg({Path(args.input).stem: curve}, title="spectral density"))
    _echo(out, "spectrum", _args_dict(args))
    print(f"wrote {len(spectra)} spectrum file(s) to {out}")


# ----------------------------------------------------------------- augment


def _aug_spec(args):
    fields = {"kind": args.kind}
    for name in ("p", "q", "alpha", "budget", "r_spa", "d_spa", "max_attempts"):
        val = getattr(args, name, None)
        if val is not None:
            fields[name] = val
    try:
        return AugmentationSpec(**fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_augment(args):
    out = _out_dir(args)
    g = _load_graph(args.input)
    if not isinstance(g, Graph):
        raise UsageError("augment expects a single graph")
    spec = _aug_spec(args)
    if spec.kind == "ppr":
        raise UsageError("ppr produces a dense diffusion matrix, not a graph; use train")
    rng = np.random.default_rng(args.seed)
    base = graph_spectrum(g)
    views_dir = out / "views"
    spec_dir = out / "spectra"
    views_dir.mkdir(exist_ok=True)
    spec_dir.mkdir(exist_ok=True)
    write_spectrum_csv(spec_dir / "original.csv", base)
    lines, spectra = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for i in range(args.samples):
            view = augment(g, spec, rng)
            s = graph_spectrum(view.graph)
            spectra.append(s)
            save_graph(views_dir / f"view_{i}.json", view.graph)
            write_spectrum_csv(spec_dir / f"view_{i}.csv", s)
            rep = {k: v for k, v in view.report.items() if k != "history"}
            lines.append(json.dumps({"sample": i, "og_aug": spectral_distance(base, s), **rep}, default=float))
    (out / "reports.jsonl").write_text("\n".join(lines) + "\n")
    write_curve_csv(out / "kde.csv", kde_curve(spectra))
    _echo(out, "augment", {**_args_dict(args), "spec": spec.to_dict()})
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"wrote {args.samples} view(s) to {views_dir}")


# ------------------------------------------------------------------- train


DEFAULT_TRAIN = {
    "framework": "gbt",
    "augmentation_1": {"kind": "drop_edge", "p": 0.3},
    "augmentation_2": {"kind": "drop_edge", "p": 0.3},
    # dims[0] = null means "take the input width from the graph features"
    "encoder": {"dims": [None, 32], "proj_dim": 32, "normalize_output": False},
    "epochs": 200,
    "lr": 0.005,
}


def _train_dict(args):
    cfg = dict(DEFAULT_TRAIN)
    if args.config:
        raw = _read_json(args.config)
        cfg = dict(raw.get("train", raw))
    if args.framework is not None:
        cfg["framework"] = args.framework
        cfg.pop("loss", None)
    if args.epochs is not None:
        cfg["epochs"] = args.epochs
    if args.lr is not None:
        cfg["lr"] = args.lr
    if args.p is not None:
        for key in ("augmentation_1", "augmentation_2"):
            cfg[key] = {**cfg[key], "p": args.p}
    cfg["seed"] = args.seed if args.seed is not None else cfg.get("seed", default_seed())
    if args.spectrum_logging:
        cfg["spectrum_logging"] = True
    return cfg


def _make_config(cfg: dict) -> TrainConfig:
    try:
        return TrainConfig.from_dict(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from None


def _validate_config(cfg: dict) -> None:
    """Validate before the graph is read; a null input width is checked as 1."""
    enc = cfg.get("encoder")
    if isinstance(enc, dict) and enc.get("dims") and enc["dims"][0] is None:
        cfg = {**cfg, "encoder": {**enc, "dims": [1, *enc["dims"][1:]]}}
    _make_config(cfg)


def _fit_features(g: Graph, cfg: TrainConfig):
    if g.features.shape[1] != cfg.encoder.dims[0]:
        raise UsageError(
            f"graph feature dim {g.features.shape[1]} does not match encoder dims[0]={cfg.encoder.dims[0]}"
        )


def run_training(cfg_dict: dict, graph_path, run_dir, probe_fractions=(0.1, 0.1, 0.8)) -> dict:
    """Train, probe (when labels exist) and write a run directory. Returns the summary."""
    data = _load_graph(graph_path)
    graphs = [data] if isinstance(data, Graph) else data
    enc = cfg_dict.get("encoder")
    if isinstance(enc, dict) and enc.get("dims") and enc["dims"][0] is None:
        cfg_dict = {**cfg_dict, "encoder": {**enc, "dims": [graphs[0].features.shape[1], *enc["dims"][1:]]}}
    config = _make_config(cfg_dict)
    for g in graphs:
        _fit_features(g, config)
    run_dir = Path(run_dir)
    (run_dir / "spectra").mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(
        json.dumps({"version": __version__, "train": config.to_dict(), "data": str(graph_path)},
                   indent=2, sort_keys=True)
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        record = train(config, data)
    _write_csv(run_dir / "metrics.csv", ["epoch", "loss", "seconds"],
               [(i, l, t) for i, (l, t) in enumerate(zip(record.loss_history, record.wallclock_per_epoch))])
    record.final_state.save(run_dir / "checkpoint.json")
    summary = {"seed": config.seed, "final_loss": record.loss_history[-1],
               "p": config.augmentation_1.p, "config_hash": config_hash(config.to_dict())}
    if record.augmented_spectra is not None:
        base = [graph_spectrum(g) for g in graphs]
        for i, s in enumerate(base):
            write_spectrum_csv(run_dir / "spectra" / f"original_{i}.csv", s)
        per_epoch = 2 * len(graphs)
        og, aa = [], []
        for e in range(0, len(record.augmented_spectra), per_epoch):
            chunk = record.augmented_spectra[e : e + per_epoch]
            for j, s in enumerate(chunk):
                write_spectrum_csv(run_dir / "spectra" / f"epoch{e // per_epoch:04d}_view{j}.csv", s)
            half = len(chunk) // 2
            for i in range(half):
                og.append(spectral_distance(base[i], chunk[i]))
                aa.append(spectral_distance(chunk[i], chunk[half + i]))
        summary["og_aug"] = float(np.mean(og)) if og else float("nan")
        summary["aug_aug"] = float(np.mean(aa)) if aa else float("nan")
        summary["spectrum_cadence"] = record.spectrum_cadence
    if isinstance(data, Graph) and isinstance(data.labels, np.ndarray):
        z = embed(record.final_state, config.encoder, data)
        sp = split(data.n, probe_fractions, config.seed)
        try:
            summary["accuracy"] = linear_probe(z, data.labels, sp)
        except DegenerateSplitError as exc:
            print(f"warning: {run_dir}: probe skipped ({exc})", file=sys.stderr)
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return summary


def config_hash(cfg: dict) -> str:
    cfg = {k: v for k, v in cfg.items() if k != "seed"}
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:12]


def cmd_train(args):
    out = _out_dir(args)
    cfg = _train_dict(args)
    summary = run_training(cfg, args.input, out)
    _echo(out, "train", {**_args_dict(args), "resolved": cfg})
    print(json.dumps(summary, sort_keys=True, default=fmt))


# ------------------------------------------------------------------- sweep


def _sweep_job(job):
    cfg, graph_path, run_dir = job
    return run_training(cfg, graph_path, run_dir)


def cmd_sweep(args):
    out = _out_dir(args)
    raw = _read_json(args.config) if args.config else {}
    base = dict(raw.get("train", DEFAULT_TRAIN))
    axes = raw.get("sweep", {})
    ps = args.ps if args.ps is not None else axes.get("p", [0.1 * i for i in range(1, 10)])
    seeds = args.seeds if args.seeds is not None else axes.get("seeds", [default_seed()])
    if args.epochs is not None:
        base["epochs"] = args.epochs
    base["spectrum_logging"] = True
    jobs = []
    for p in ps:
        for s in seeds:
            cfg = json.loads(json.dumps(base))
            for key in ("augmentation_1", "augmentation_2"):
                if cfg[key]["kind"] == "drop_edge":
                    cfg[key]["p"] = float(p)
            cfg["seed"] = int(s)
            _validate_config(cfg)
            jobs.append((cfg, args.input, out / f"run_p{float(p):.3f}_s{int(s)}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            summaries = list(pool.map(_sweep_job, jobs))
    else:
        summaries = [_sweep_job(j) for j in jobs]
    rows = [(s["p"], s["seed"], s.get("og_aug"), s.get("aug_aug"), s.get("accuracy", float("nan")),
             s["final_loss"]) for s in summaries]
    _write_csv(out / "sweep.csv", ["p", "seed", "og_aug", "aug_aug", "accuracy", "final_loss"], rows)
    _echo(out, "sweep", {**_args_dict(args), "p": ps, "seeds": seeds, "train": base})
    print(f"wrote {len(rows)} runs to {out / 'sweep.csv'}")


# ------------------------------------------------------------------- probe


def cmd_probe(args):
    out = _out_dir(args)
    run = Path(args.run_dir)
    cfg = _read_json(run / "config.json")
    config = _make_config(cfg["train"])
    state = EncoderState.load(run / "checkpoint.json")
    g = _load_graph(args.input)
    if not isinstance(g, Graph) or not isinstance(g.labels, np.ndarray):
        raise UsageError("probe needs a single graph with node labels")
    _fit_features(g, config)
    seed = args.seed if args.seed is not None else config.seed
    z = embed(state, config.encoder, g, representation=args.representation)
    res = linear_probe(z, g.labels, split(g.n, args.fractions, seed), return_details=True)
    payload = {"accuracy": res.accuracy, "val_accuracy": res.val_accuracy, "best_step": res.best_step}
    (out / "probe.json").write_text(json.dumps(payload, indent=2))
    _echo(out, "probe", _args_dict(args))
    print(json.dumps(payload, default=fmt))


# ------------------------------------------------------------------ bounds


BOUND_FIELDS = ("n", "d", "n_v", "d_min", "d_max", "k", "L_W", "x_norm", "p_norm", "tau", "delta", "c_z")


def cmd_bounds(args):
    out = _out_dir(args)
    if args.preset == "appendix-d":
        base = {f: getattr(APPENDIX_D, f) for f in BOUND_FIELDS}
    else:
        base = {f: getattr(args, f) for f in BOUND_FIELDS}
        missing = [f for f, v in base.items() if v is None and f != "c_z"]
        if missing:
            raise UsageError(f"bounds needs --preset or all of: {', '.join(missing)}")
    for f in BOUND_FIELDS:
        v = getattr(args, f)
        if v is not None:
            base[f] = v
    if base.get("c_z") is None:
        base["c_z"] = 1.0
    deltas = args.delta_sweep if args.delta_sweep else [base["delta"]]
    rows, results = [], []
    for d in deltas:
        inp = BoundInputs(**{**base, "delta": d})
        try:
            res = infonce_bounds(inp)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        results.append(res)
        rows.append([inp.__dict__[f] for f in BOUND_FIELDS] +
                    [res.A, res.B, res.epsilon, res.epsilon_prime, res.lower, res.upper, res.gap])
    _write_csv(out / "bounds.csv",
               list(BOUND_FIELDS) + ["A", "B", "epsilon", "epsilon_prime", "lower", "upper", "gap"],
               [[float(v) for v in r] for r in rows])
    _echo(out, "bounds", _args_dict(args))
    for d, res in zip(deltas, results):
        print(f"delta {fmt(d)} epsilon {fmt(res.epsilon)} epsilon_prime {fmt(res.epsilon_prime)} "
              f"lower {res.lower:.4f} upper {res.upper:.4f} gap {res.gap:.4f}")


# ------------------------------------------------------------------ verify


def cmd_verify(args):
    out = _out_dir(args)
    kwargs = dict(trials=args.trials, n=args.n, delta=args.delta, k=args.k, seed=args.seed,
                  L_W=args.L_W, equality_case=args.equality)
    if args.lemma == 6:
        kwargs.update(pairs=args.pairs, d=args.d)
    rep = verify_lemma(args.lemma, **kwargs)
    payload = {"lemma": rep.lemma, "trials": rep.trials, "passes": rep.pass_count,
               "pass_fraction": rep.pass_fraction, "worst_margin": _finite(rep.worst_margin),
               "predicted_pass_fraction": rep.predicted_pass_fraction, "params": rep.params}
    (out / f"verify_lemma{args.lemma}.json").write_text(json.dumps(payload, indent=2))
    _echo(out, "verify", _args_dict(args))
    print(json.dumps({k: payload[k] for k in ("lemma", "trials", "passes", "worst_margin")}))


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


# ----------------------------------------------------------------- analyze


def cmd_analyze(args):
    out = _out_dir(args)
    if not Path(args.input).is_file():
        raise UsageError(f"cannot read {args.input}: no such file")
    try:
        data = read_sweep_csv(args.input)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    keep = np.all([np.isfinite(v) for v in data.values()], axis=0)
    data = {k: v[keep] for k, v in data.items()}
    write_rows_csv(out / "regression.csv", regression_table(data))
    write_rows_csv(out / "iv2sls.csv", iv_table(data))
    _echo(out, "analyze", _args_dict(args))
    print(f"wrote regression.csv and iv2sls.csv to {out}")


# ------------------------------------------------------------------- bench


def cmd_bench(args):
    out = _out_dir(args)
    rows = []
    for n in args.ns:
        g = generate_synthetic("er", {"n": n, "p": min(1.0, args.mean_degree / (n - 1))}, seed=args.seed)
        for op in args.ops:
            rows.append(time_benchmark(op, g, repeats=args.repeats, p=args.p, seed=args.seed))
    _write_csv(out / "timing.csv", ["method", "n", "m", "seconds_per_call"],
               [(r.method, r.n, r.m, r.seconds_per_call) for r in rows])
    spec = [r for r in rows if r.method == "Spectrum calculation"]
    if len(spec) >= 2:
        print(f"spectrum log-log slope {loglog_slope([r.n for r in spec], [r.seconds_per_call for r in spec]):.3f}")
    _echo(out, "bench", _args_dict(args))
    for r in rows:
        print(f"{r.method:22s} n={r.n:<6d} m={r.m:<8d} {r.seconds_per_call:.6g} s")


# ------------------------------------------------------------------ report


def _read_spectrum_csv(path):
    with open(path, newline="") as fh:
        return np.array([float(r["eigenvalue"]) for r in csv.DictReader(fh)])


def cmd_report(args):
    out = _out_dir(args)
    groups: dict[str, list] = {}
    for d in args.run_dirs:
        d = Path(d)
        if not (d / "metrics.csv").is_file():
            print(f"warning: {d}: missing metrics.csv, skipped", file=sys.stderr)
            continue
        cfg = _read_json(d / "config.json")["train"] if (d / "config.json").is_file() else {}
        summary = _read_json(d / "summary.json") if (d / "summary.json").is_file() else {}
        with open(d / "metrics.csv", newline="") as fh:
            metrics = list(csv.DictReader(fh))
        summary.setdefault("final_loss", float(metrics[-1]["loss"]) if metrics else float("nan"))
        key = summary.get("config_hash") or config_hash(cfg)
        groups.setdefault(key, []).append((d, cfg, summary))
    if not groups:
        raise RuntimeError("no run directory contained metrics.csv")
    cols = ("final_loss", "accuracy", "og_aug", "aug_aug")
    rows = []
    for key, runs in groups.items():
        row = {"config_hash": key, "framework": runs[0][1].get("framework", ""),
               "p": runs[0][2].get("p", float("nan")), "runs": len(runs)}
        for c in cols:
            vals = np.array([r[2].get(c, np.nan) for r in runs], float)
            vals = vals[np.isfinite(vals)]
            row[f"{c}_mean"] = float(vals.mean()) if vals.size else float("nan")
            row[f"{c}_std"] = float(vals.std(ddof=1)) if vals.size > 1 else float("nan")
            row[f"{c}_max"] = float(vals.max()) if vals.size else float("nan")
        rows.append(row)
    rows.sort(key=lambda r: (r["framework"], r["p"]))
    write_rows_csv(out / "report.csv", rows)
    curves = {}
    for key, runs in groups.items():
        for kind in ("original", "epoch"):
            spectra = [_read_spectrum_csv(f) for d, _, _ in runs for f in sorted((d / "spectra").glob(f"{kind}*.csv"))]
            if spectra:
                curves[f"{key[:6]} {'OG' if kind == 'original' else 'AUG'}"] = kde_curve(spectra)
    if curves:
        (out / "spectra.svg").write_text(curves_svg(curves, title="spectral density, mean and std"))
    _echo(out, "report", _args_dict(args))
    print(f"wrote report.csv ({len(rows)} config(s)) to {out}")


# ------------------------------------------------------------------ parser


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgssl", description="Graph contrastive learning workbench.")
    parser.add_argument("--version", action="version", version=f"cgssl {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out-dir", default=".")
        p.set_defaults(func=func)
        return p

    p = add("gen", cmd_gen, "generate synthetic graphs")
    p.add_argument("--kind", choices=("er", "sbm"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--sizes", type=_ints)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--feature-dim", type=int, default=8)
    p.add_argument("--feature-signal", type=float, default=0.0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--name", default="graph.json")
    p.add_argument("--seed", type=int, default=None)

    p = add("spectrum", cmd_spectrum, "normalized Laplacian spectra, histogram and KDE")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--grid-points", type=int, default=256)
    p.add_argument("--svg", action="store_true")

    p = add("augment", cmd_augment, "sample augmented views")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", required=True, choices=("identity", "drop_edge", "add_edge", "span", "spa", "ppr"))
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--r-spa", type=float)
    p.add_argument("--d-spa", type=float)
    p.add_argument("--max-attempts", type=int)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)

    for name, func, help_ in (("train", cmd_train, "train one encoder"),):
        p = add(name, func, help_)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--config")
        p.add_argument("--framework", choices=("grace", "mvgrl", "gbt", "bgrl"))
        p.add_argument("--epochs", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--p", type=float, help="drop rate for both views")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--spectrum-logging", action="store_true")

    p = add("sweep", cmd_sweep, "drop-rate sweep over seeds")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--config")
    p.add_argument("--ps", type=_floats)
    p.add_argument("--seeds", type=_ints)
    p.add_argument("--epochs", type=int)
    p.add_argument("--jobs", type=int, default=1)

    p = add("probe", cmd_probe, "linear probe on a trained run")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--fractions", type=_floats, default=[0.1, 0.1, 0.8])
    p.add_argument("--representation", choices=("hidden", "projected"), default="hidden")
    p.add_argument("--seed", type=int, default=None)

    p = add("bounds", cmd_bounds, "InfoNCE bound constants")
    p.add_argument("--preset", choices=("appendix-d",))
    for f in BOUND_FIELDS:
        typ = int if f in ("n", "d", "k") else float
        p.add_argument(f"--{f.replace('_', '-')}" if f != "L_W" else "--L-W", dest=f, type=typ)
    p.add_argument("--delta-sweep", type=_floats)

    p = add("verify", cmd_verify, "randomized lemma checks")
    p.add_argument("--lemma", type=int, choices=range(1, 7), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--L-W", dest="L_W", type=float, default=0.5)
    p.add_argument("--d", type=int, default=4096)
    p.add_argument("--pairs", type=int, default=100_000)
    p.add_argument("--equality", action="store_true")
    p.add_argument("--seed", type=int, default=None)

    p = add("analyze", cmd_analyze, "regressions on a sweep CSV")
    p.add_argument("--in", dest="input", required=True)

    p = add("bench", cmd_bench, "timing of spectrum vs edge perturbation")
    p.add_argument("--ns", type=_ints, default=[250, 500, 1000, 2000])
    p.add_argument("--ops", type=lambda s: s.split(","), default=["spectrum", "drop_edge", "add_edge"])
    p.add_argument("--mean-degree", type=float, default=10.0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--p", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=None)

    p = add("report", cmd_report, "merge run directories")
    p.add_argument("run_dirs", nargs="+")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None and args.command != "train":
            args.seed = default_seed()
        if args.command == "bench":
            bad = [o for o in args.ops if o not in ("spectrum", "drop_edge", "add_edge")]
            if bad:
                raise UsageError(f"unknown bench op(s): {', '.join(bad)}")
        args.func(args)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
