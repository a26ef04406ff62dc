"""Command-line entry point.

Every subcommand resolves its parameters as built-in profile defaults,
overridden by a ``[subcommand]`` section of ``--config``, overridden by
flags, and prints the resolved set to stderr before running.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
import threading
from pathlib import Path

import numpy as np

from .errors import GenpotError

log = logging.getLogger("genpot")

# name -> (type, paper default, desk default, help)
PARAMS = {
    "simulate": {
        "out": (str, None, None, "output CSV path"),
        "duration": (float, 7200.0, 120.0, "seconds of plant operation"),
        "rate": (float, 500.0, 50.0, "sample rate in Hz"),
        "seed": (int, 0, 0, "noise seed"),
        "sim_config": (str, None, None, "plant/schedule INI file (default: packaged)"),
    },
    "train": {
        "data": (str, None, None, "training CSV"),
        "out": (str, None, None, "output directory for models and manifest"),
        "lookback": (int, 2000, 200, "look-back length L in samples"),
        "horizon": (int, 200, 20, "look-ahead length H in samples"),
        "hidden": (int, 64, 32, "LSTM hidden size"),
        "epochs": (int, 1000, 150, "training epochs"),
        "lr": (float, 1e-3, 1e-3, "Adam learning rate"),
        "batch_size": (int, 32, 32, "mini-batch size"),
        "stride": (int, 1, 20, "window stride in samples"),
        "train_fraction": (float, 0.8, 0.8, "leading fraction used for training"),
        "seed": (int, 0, 0, "weight-init and shuffle seed"),
    },
    "generate": {
        "manifest": (str, None, None, "composite manifest"),
        "out": (str, None, None, "output CSV path"),
        "segments": (int, 16, 16, "number of look-ahead segments"),
        "seed_source": (str, "simulator", "simulator", "seed CSV or 'simulator'"),
        "seed": (int, 42, 42, "simulator seed for the initial look-back"),
        "single_step": (bool, False, False, "single-step recursive generation"),
    },
    "evaluate": {
        "manifest": (str, None, None, "composite manifest"),
        "data": (str, None, None, "recording CSV; its tail after --train-fraction is the validation part"),
        "train_fraction": (float, 0.8, 0.8, "fraction skipped at the start of --data"),
        "seeds": (int, 301, 301, "number of seed trajectories T"),
        "segments": (int, 20, 20, "segments per trajectory S"),
        "seed": (int, 0, 0, "seed-position RNG seed"),
        "out": (str, None, None, "long-form RMSE CSV (optional)"),
        "check": (bool, False, False, "exit 1 unless quantiles are ordered and >= 6 variables accumulate error"),
        "json": (bool, False, False, "print a JSON summary"),
    },
    "bench": {
        "manifest": (str, None, None, "composite manifest"),
        "n": (int, 300, 300, "timed generate_segment calls"),
        "warmup": (int, 3, 3, "untimed warm-up calls"),
        "seed_source": (str, "simulator", "simulator", "seed CSV or 'simulator'"),
        "seed": (int, 42, 42, "simulator seed for the look-back"),
        "json": (bool, False, False, "print a JSON summary"),
    },
    "serve": {
        "manifest": (str, None, None, "composite manifest"),
        "seed_source": (str, "simulator", "simulator", "seed CSV or 'simulator'"),
        "seed": (int, 42, 42, "simulator seed for the look-back"),
        "sim_config": (str, None, None, "plant INI for simulator seeding"),
        "host": (str, "0.0.0.0", "127.0.0.1", "listen address"),
        "port": (int, 4840, 4840, "listen port (0 picks a free one)"),
        "publish_rate": (float, 500.0, 500.0, "publication rate in Hz"),
        "queue_capacity": (int, 4, 4, "segments buffered between producer and consumer"),
        "intrusion_log": (str, "intrusion.jsonl", "intrusion.jsonl", "JSON-lines activity log"),
        "duration": (float, None, None, "stop after this many seconds (default: run until signalled)"),
    },
}

REQUIRED = {
    "simulate": ("out",),
    "train": ("data", "out"),
    "generate": ("manifest", "out"),
    "evaluate": ("manifest", "data"),
    "bench": ("manifest",),
    "serve": ("manifest",),
}


class UsageError(Exception):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genpot", description="Generative OPC UA honeypot for a 2-DoF aero CPS.")
    p.add_argument("--profile", choices=("paper", "desk"), default="paper", help="default parameter set (default: paper)")
    p.add_argument("--config", metavar="INI", help="INI file; section names match subcommands, keys match long options")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "simulate": "run the plant simulator and write a CSV recording",
        "train": "train the eight per-variable models on a CSV recording",
        "generate": "generate a trajectory CSV from a trained composite",
        "evaluate": "segment-wise RMSE protocol against a recording",
        "bench": "time segment generation",
        "serve": "run the OPC UA decoy",
    }
    for cmd, params in PARAMS.items():
        sp = sub.add_parser(cmd, help=helps[cmd], description=helps[cmd])
        for name, (typ, paper, desk, text) in params.items():
            flag = "--" + name.replace("_", "-")
            shown = f"{text} (paper: {paper}, desk: {desk})" if paper is not None else text
            if typ is bool:
                sp.add_argument(flag, dest=name, action="store_const", const=True, default=None, help=shown)
            else:
                sp.add_argument(flag, dest=name, type=typ, default=None, metavar=name.upper(), help=shown)
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Profile defaults < config file section < explicit flags."""
    cmd = args.command
    params = PARAMS[cmd]
    col = 1 if args.profile == "paper" else 2
    cfg = {name: spec[col] for name, spec in params.items()}
    if args.config:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise UsageError(f"cannot read config file {args.config}")
        if cp.has_section(cmd):
            for key, text in cp.items(cmd):
                name = key.replace("-", "_")
                if name not in params:
                    raise UsageError(f"unknown key {key!r} in [{cmd}] of {args.config}")
                typ = params[name][0]
                try:
                    cfg[name] = _parse_bool(text) if typ is bool else typ(text)
                except ValueError as exc:
                    raise UsageError(f"bad value for {key} in {args.config}: {exc}") from None
    for name in params:
        v = getattr(args, name)
        if v is not None:
            cfg[name] = v
    missing = [n for n in REQUIRED[cmd] if cfg.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return cfg


def print_config(cmd: str, profile: str, cfg: dict, out=None) -> None:
    out = out if out is not None else sys.stderr
    items = " ".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    print(f"# {cmd} profile={profile} {items}", file=out, flush=True)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: dict) -> int:
    from .cps_sim import load_config, simulate
    from .timeseries import write_csv

    ds = simulate(load_config(cfg["sim_config"]), cfg["duration"], cfg["rate"], cfg["seed"])
    write_csv(ds, cfg["out"])
    print(f"wrote {len(ds)} frames to {cfg['out']}")
    return 0


def cmd_train(cfg: dict) -> int:
    from .generator import CompositeGenerator, init_models, save_composite
    from .lstm.training import train_many
    from .timeseries import REPLICATED, fit_scaler, make_windows, read_csv, split

    ds = read_csv(cfg["data"])
    train_ds, val_ds = split(ds, cfg["train_fraction"])
    scaler = fit_scaler(train_ds)
    L, H = cfg["lookback"], cfg["horizon"]
    windows = make_windows(train_ds, L, H, cfg["stride"], scaler)
    val = make_windows(val_ds, L, H, cfg["stride"], scaler) if len(val_ds) >= L + H else None
    rng = np.random.default_rng(cfg["seed"])
    models = init_models(rng, L, H, cfg["hidden"])
    log.info("training 8 models on %d windows (%d validation)", len(windows), len(val) if val else 0)

    def progress(epoch, train_mse, val_mse):
        log.info("epoch %d train %s val %s", epoch + 1, np.array2string(train_mse, precision=5), np.array2string(val_mse, precision=5))

    reports = train_many(models, windows, cfg["epochs"], cfg["lr"], cfg["batch_size"], cfg["seed"], val, progress)
    gen = CompositeGenerator(models, scaler, ds.rate_hz)
    manifest = save_composite(gen, cfg["out"])
    history = Path(cfg["out"]) / "history.csv"
    with history.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch"] + [f"train_{n}" for n in REPLICATED] + [f"val_{n}" for n in REPLICATED])
        for e in range(cfg["epochs"]):
            w.writerow([e + 1] + [repr(float(r.train_mse[e])) for r in reports] + [repr(float(r.val_mse[e])) for r in reports])
    ratios = [r.train_mse[-1] / r.train_mse[0] for r in reports]
    print(f"wrote {manifest}; final/first training MSE per variable: " + " ".join(f"{n}={q:.4f}" for n, q in zip(REPLICATED, ratios)))
    return 0


def _lookback(cfg: dict, gen):
    from .runtime import init_lookback

    return init_lookback(cfg["seed_source"], gen.L, gen.scaler, gen.rate_hz, cfg["seed"])


def cmd_generate(cfg: dict) -> int:
    from .generator import generate_trajectory, load_composite, trajectory_dataset
    from .timeseries import write_csv

    gen = load_composite(cfg["manifest"], single_step=cfg["single_step"])
    segments = generate_trajectory(gen, _lookback(cfg, gen), cfg["segments"])
    ds = trajectory_dataset(segments, gen.rate_hz)
    write_csv(ds, cfg["out"])
    print(f"wrote {len(ds)} frames ({len(ds) / gen.rate_hz:g} s at {gen.rate_hz:g} Hz) to {cfg['out']}")
    return 0


def cmd_evaluate(cfg: dict) -> int:
    from .evalsuite import evaluate
    from .generator import load_composite
    from .timeseries import read_csv, split

    gen = load_composite(cfg["manifest"])
    _, validation = split(read_csv(cfg["data"]), cfg["train_fraction"])
    table = evaluate(gen, validation, cfg["seeds"], cfg["segments"], cfg["seed"])
    if cfg["out"]:
        table.to_csv(cfg["out"])
    summary = table.summary()
    if cfg["json"]:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        for s in (0, table.steps - 1):
            print(f"step {s + 1:3d} median RMSE " + " ".join(f"{n}={table.median[s, k]:.4f}" for k, n in enumerate(summary["median_first"])))
        print(f"ordered={summary['ordered']} accumulating={len(summary['accumulating'])}/8")
    if cfg["check"] and not (summary["ordered"] and len(summary["accumulating"]) >= 6):
        print("check failed", file=sys.stderr)
        return 1
    return 0


def cmd_bench(cfg: dict) -> int:
    from .evalsuite import bench_producer
    from .generator import load_composite

    gen = load_composite(cfg["manifest"])
    stats = bench_producer(gen, cfg["n"], _lookback(cfg, gen), warmup=cfg["warmup"])
    if cfg["json"]:
        print(json.dumps({**stats.as_dict(), "L": gen.L, "H": gen.H}, indent=2, sort_keys=True))
    else:
        print(f"n={stats.n} min={stats.min:.4f}s mean={stats.mean:.4f}s max={stats.max:.4f}s (L={gen.L} H={gen.H})")
    return 0


def cmd_serve(cfg: dict) -> int:
    from .generator import load_composite
    from .runtime import RuntimeConfig, serve

    gen = load_composite(cfg["manifest"])
    rc = RuntimeConfig(
        manifest=cfg["manifest"],
        publish_rate_hz=cfg["publish_rate"],
        seed_source=cfg["seed_source"],
        seed=cfg["seed"],
        sim_config=cfg["sim_config"],
        host=cfg["host"],
        port=cfg["port"],
        queue_capacity=cfg["queue_capacity"],
        intrusion_log=cfg["intrusion_log"],
    )
    stop = threading.Event()
    if cfg["duration"] is not None:
        timer = threading.Timer(cfg["duration"], stop.set)
        timer.daemon = True
        timer.start()
    return serve(gen, rc, stop)


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the synopsis
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"genpot: error: {exc}", file=sys.stderr)
        return 2
    print_config(args.command, args.profile, cfg)
    try:
        return COMMANDS[args.command](cfg)
    except (GenpotError, OSError, ValueError) as exc:
        print(f"genpot {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
