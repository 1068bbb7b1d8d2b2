"""Command-line entry points: run, fci, seed, sample, inspect, plot."""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arnn import load_model
from .determinant import count_symmetry_sector
from .driver import RunAborted, RunConfig, StageSpec, build_seed, run
from .eigensolver import CHEMICAL_ACCURACY, FCI_GUARD, fci_reference, n_ca, sorted_by_born
from .integrals import load_fcidump
from .sampler import dump_batch, sample_fast

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_ITERATIONS = 2
EXIT_GUARD = 3

SYSTEM_KEYS = {"fcidump", "target_irrep"}
RUN_KEYS = {
    "seed_kind", "n_gs_samples", "n_network_samples", "n_unique_cap",
    "beta_schedule", "beta0", "max_iterations", "epsilon_ha", "patience",
    "rng_seed", "warm_start", "compute_reference", "verbose_loss",
}
TRAIN_KEYS = {"learning_rate", "epochs", "minibatch", "n_train"}
MODEL_KEYS = {"n_layers", "features_per_bit", "dropout_rate", "activation"}


@dataclass
class CliInvocation:
    command: str
    config_path: str | None = None
    overrides: tuple[str, ...] = ()
    output_dir: str | None = None


class ConfigError(ValueError):
    pass


def read_config(path, overrides=()) -> tuple[RunConfig, str]:
    """Parse the flat key=value run configuration; unknown keys are errors.

    Returns (RunConfig, canonical snapshot text).
    """
    parser = configparser.ConfigParser()
    loaded = parser.read(path)
    if not loaded:
        raise ConfigError(f"cannot read config file {path}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        section = _section_of(parser, key.strip())
        parser.set(section, key.strip(), value.strip())
    return _build_run_config(parser), _snapshot(parser)


def _section_of(parser, key: str) -> str:
    hits = [s for s in parser.sections() if parser.has_option(s, key)]
    if not hits:
        raise ConfigError(f"override key {key!r} not present in the config")
    if len(hits) > 1:
        raise ConfigError(f"override key {key!r} is ambiguous across sections {hits}")
    return hits[0]


def _build_run_config(parser) -> RunConfig:
    known_sections = {"system", "run", "train"}
    model_sections = sorted(
        (s for s in parser.sections() if s.startswith("model.")),
        key=lambda s: int(s.split(".", 1)[1]),
    )
    for section in parser.sections():
        if section in known_sections or section in model_sections:
            continue
        raise ConfigError(f"unknown config section [{section}]")
    for section, allowed in (("system", SYSTEM_KEYS), ("run", RUN_KEYS), ("train", TRAIN_KEYS)):
        if parser.has_section(section):
            for key in parser[section]:
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
    for section in model_sections:
        for key in parser[section]:
            if key not in MODEL_KEYS:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    if not parser.has_option("system", "fcidump"):
        raise ConfigError("config needs [system] fcidump")
    system = parser["system"]
    runsec = parser["run"] if parser.has_section("run") else {}
    trainsec = parser["train"] if parser.has_section("train") else {}

    stages = []
    for section in model_sections:
        sec = parser[section]
        stages.append(
            StageSpec(
                n_layers=sec.getint("n_layers", 2),
                features_per_bit=sec.getint("features_per_bit", 4),
                dropout_rate=sec.getfloat("dropout_rate", 0.05),
                activation=sec.get("activation", "softplus"),
            )
        )
    if not stages:
        stages = [StageSpec(), StageSpec(n_layers=4, features_per_bit=8, dropout_rate=0.1)]

    raw_schedule = _get(runsec, "beta_schedule", "auto")
    if raw_schedule == "auto":
        schedule: str | tuple[float, ...] = "auto"
    else:
        schedule = tuple(float(tok) for tok in raw_schedule.split(",") if tok.strip())

    n_train_raw = _get(trainsec, "n_train", "10000,100000")
    n_train = tuple(int(tok) for tok in n_train_raw.split(",") if tok.strip())
    if len(n_train) == 1:
        n_train = n_train * len(stages)

    try:
        return RunConfig(
            fcidump_path=system["fcidump"],
            target_irrep=int(_get(system, "target_irrep", "0")),
            seed_kind=_get(runsec, "seed_kind", "hf"),
            n_gs_samples=int(_get(runsec, "n_gs_samples", "1000")),
            n_network_samples=int(_get(runsec, "n_network_samples", "0")),
            n_unique_cap=int(_get(runsec, "n_unique_cap", "0")),
            beta_schedule=schedule,
            beta0=float(_get(runsec, "beta0", "0.4")),
            max_iterations=int(_get(runsec, "max_iterations", "60")),
            epsilon_ha=float(_get(runsec, "epsilon_ha", "1e-5")),
            patience=int(_get(runsec, "patience", "3")),
            rng_seed=int(_get(runsec, "rng_seed", "1")),
            warm_start=_get(runsec, "warm_start", "false").lower() in ("1", "true", "yes"),
            compute_reference=_get(runsec, "compute_reference", "true").lower()
            in ("1", "true", "yes"),
            verbose_loss=_get(runsec, "verbose_loss", "false").lower() in ("1", "true", "yes"),
            n_train=n_train,
            model_stages=tuple(stages),
            train_learning_rate=float(_get(trainsec, "learning_rate", "0.001")),
            train_epochs=int(_get(trainsec, "epochs", "200")),
            train_minibatch=int(_get(trainsec, "minibatch", "256")),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _get(section, key, default):
    try:
        return section.get(key, default)
    except AttributeError:
        return default


def _snapshot(parser) -> str:
    import io

    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def cmd_run(args) -> int:
    inv = CliInvocation("run", args.config, tuple(args.override), args.out)
    try:
        cfg, snapshot = read_config(inv.config_path, inv.overrides)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_ERROR
    if not Path(cfg.fcidump_path).exists():
        print(f"missing FCIDUMP: {cfg.fcidump_path}", file=sys.stderr)
        return EXIT_ERROR
    out_dir = Path(inv.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.snapshot.cfg").write_text(snapshot)
    try:
        result = run(cfg, run_dir=out_dir)
    except RunAborted as err:
        print(f"run aborted: {err}", file=sys.stderr)
        return EXIT_ERROR
    final = result.records[-1]
    delta = (
        f"  dE = {final.delta_e_vs_reference:.3e} Ha"
        if final.delta_e_vs_reference is not None
        else ""
    )
    print(
        f"{result.status}: {len(result.records) - 1} iterations, "
        f"E = {final.energy:.8f} Ha{delta}  (N_U cap {result.n_unique_cap}, "
        f"N_N {result.n_network_samples})"
    )
    return EXIT_OK if result.status == "converged" else EXIT_MAX_ITERATIONS


def cmd_fci(args) -> int:
    path = Path(args.fcidump)
    if not path.exists():
        print(f"missing FCIDUMP: {path}", file=sys.stderr)
        return EXIT_ERROR
    t = load_fcidump(path)
    sector = t.sector(args.target_irrep)
    size = count_symmetry_sector(sector, t.m)
    if size > FCI_GUARD:
        print(f"sector size {size} exceeds the FCI guard {FCI_GUARD}", file=sys.stderr)
        return EXIT_GUARD
    gs = fci_reference(t, sector)
    print(f"FCI energy: {gs.energy:.10f} Ha  (sector size {size})")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        ranked = sorted_by_born(gs)
        probs = np.sort(gs.born_probabilities())[::-1]
        with open(out_dir / "born_table.csv", "w") as fh:
            fh.write("bitstring,probability\n")
            for c, p in zip(ranked, probs):
                fh.write(f"{c.to_text()},{p:.12e}\n")
        print(f"born table written to {out_dir / 'born_table.csv'}")
    if args.chem_acc is not None:
        count = n_ca(gs, t, chem_acc=args.chem_acc)
        print(f"N_CA at {args.chem_acc:g} Ha: {count}")
    return EXIT_OK


def cmd_seed(args) -> int:
    try:
        cfg, _ = read_config(args.config, tuple(args.override))
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        t = load_fcidump(cfg.fcidump_path)
        seed = build_seed(cfg, t, t.sector(cfg.target_irrep))
    except (OSError, ValueError) as err:
        print(f"seed construction failed: {err}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{cfg.seed_kind} seed energy: {seed.energy:.10f} Ha  "
          f"({len(seed.support)} configurations)")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            for c, a in zip(seed.support, seed.amplitudes):
                fh.write(f"{c.to_text()} {a:.15g}\n")
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        model = load_model(args.model)
    except (OSError, ValueError) as err:
        print(f"cannot load model: {err}", file=sys.stderr)
        return EXIT_ERROR
    batch = sample_fast(model, args.n, args.beta, args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            dump_batch(batch, fh, model)
    else:
        dump_batch(batch, sys.stdout, model)
    return EXIT_OK


def cmd_inspect(args) -> int:
    run_dir = Path(args.run_dir)
    records = run_dir / "records.csv"
    if not records.exists():
        print(f"no records.csv under {run_dir}", file=sys.stderr)
        return EXIT_ERROR
    rows = list(csv.DictReader(open(records)))
    print(f"{len(rows)} records")
    for row in rows:
        delta = row["delta_e_ha"] or "n/a"
        print(f"  i={row['i']:>3} E={row['energy_ha']} dE={delta} "
              f"nU={row['n_unique']} beta={row['beta']} stage={row['stage']}")
    for ckpt in sorted(run_dir.glob("model_stage*.arnn")):
        model = load_model(ckpt)
        print(f"{ckpt.name}: {model.config}")
    return EXIT_OK


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dirs = [Path(d) for d in args.run_dir]
    missing = [d for d in run_dirs if not (d / "records.csv").exists()]
    if missing or not run_dirs:
        print(f"missing records.csv in: {missing or 'no run dirs given'}", file=sys.stderr)
        return EXIT_ERROR

    fig, ax = plt.subplots(figsize=(6, 4))
    for d in run_dirs:
        rows = list(csv.DictReader(open(d / "records.csv")))
        iters = [int(r["i"]) for r in rows]
        deltas = [float(r["delta_e_ha"]) if r["delta_e_ha"] else np.nan for r in rows]
        label = _run_label(d)
        ax.semilogy(iters, np.abs(deltas), marker="o", label=label)
    ax.axhline(CHEMICAL_ACCURACY, linestyle="--", color="gray", label="chemical accuracy")
    ax.set_xlabel("iteration")
    ax.set_ylabel("|dE| (Ha)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(args.out)
    fig.savefig(out, format="svg")
    print(f"wrote {out}")

    if args.born:
        fig2, ax2 = plt.subplots(figsize=(6, 4))
        with open(args.born) as fh:
            table = list(csv.DictReader(fh))
        sorted_bits = [row["bitstring"] for row in table]
        for d in run_dirs:
            support = {
                line.split()[0]
                for line in (d / "final_state.txt").read_text().splitlines()
            }
            bins = np.array_split(np.arange(len(sorted_bits)), args.bins)
            coverage = [
                np.mean([sorted_bits[i] in support for i in chunk]) if len(chunk) else 0.0
                for chunk in bins
            ]
            ax2.bar(
                np.arange(len(coverage)), coverage, width=1.0, alpha=0.6, label=_run_label(d)
            )
        ax2.set_xlabel(f"sorted-configuration bin (of {args.bins})")
        ax2.set_ylabel("coverage")
        ax2.legend(fontsize=8)
        fig2.tight_layout()
        fill_out = out.with_name(out.stem + "_filling.svg")
        fig2.savefig(fill_out, format="svg")
        print(f"wrote {fill_out}")
    return EXIT_OK


def _run_label(run_dir: Path) -> str:
    snapshot = run_dir / "config.snapshot.cfg"
    if snapshot.exists():
        parser = configparser.ConfigParser()
        parser.read(snapshot)
        if parser.has_option("run", "seed_kind"):
            return f"{run_dir.name} ({parser['run']['seed_kind']})"
    return run_dir.name


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arnnsci", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full iterative loop")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_run.add_argument("--out", required=True, help="run directory")

    p_fci = sub.add_parser("fci", help="exact sector ground state")
    p_fci.add_argument("--fcidump", required=True)
    p_fci.add_argument("--target-irrep", type=int, default=0)
    p_fci.add_argument("--out", default=None, help="directory for the Born table")
    p_fci.add_argument("--chem-acc", type=float, default=None,
                       help="also report N_CA at this accuracy (Ha)")

    p_seed = sub.add_parser("seed", help="build and report the initial state")
    p_seed.add_argument("--config", required=True)
    p_seed.add_argument("--override", action="append", default=[])
    p_seed.add_argument("--out", default=None, help="state dump file")

    p_sample = sub.add_parser("sample", help="sample a model checkpoint")
    p_sample.add_argument("--model", required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--beta", type=float, default=1.0)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", default=None)

    p_inspect = sub.add_parser("inspect", help="summarize a run directory")
    p_inspect.add_argument("--run-dir", required=True)

    p_plot = sub.add_parser("plot", help="convergence and filling plots")
    p_plot.add_argument("--run-dir", action="append", default=[], required=True)
    p_plot.add_argument("--out", default="convergence.svg")
    p_plot.add_argument("--born", default=None, help="Born table CSV for a filling plot")
    p_plot.add_argument("--bins", type=int, default=100)
    return parser


COMMANDS = {
    "run": cmd_run,
    "fci": cmd_fci,
    "seed": cmd_seed,
    "sample": cmd_sample,
    "inspect": cmd_inspect,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except Exception as err:  # CLI surface: fail with a message, not a traceback
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
