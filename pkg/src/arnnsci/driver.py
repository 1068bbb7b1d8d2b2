"""The iterative subspace-expansion loop.

Each iteration: flatten the previous iterate's Born distribution, draw
training data, fit a fresh network, sample it (temperature-scaled in early
iterations), post-select physical configurations, merge them with the
forced set and the previous support, and diagonalize.  The previous
support is always retained, which makes the energy record non-increasing.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._rng import hash64, substream
from .arnn import ArnnConfig, ArnnModel, init_model, save_model
from .determinant import (
    Configuration,
    SymmetrySector,
    count_symmetry_sector,
    excitations,
    hf_configuration,
    passes_symmetry,
)
from .eigensolver import FCI_GUARD, SparseState, fci_reference, n_ca, solve_subspace
from .integrals import IntegralTable, load_fcidump
from .sampler import filter_physical, find_beta, sample_fast, select_unique
from .trainer import TrainPlan, draw_training_set, rescale_sparse, train

CISD_GUARD = 200_000
TEMPERATURE_ITERATIONS = 3  # beta tuning is only effective early on

SEED_KINDS = ("hf", "cisd", "gs_sample")


@dataclass(frozen=True)
class StageSpec:
    """Network architecture for one model stage (width in bits comes from
    the integral file at run time)."""

    n_layers: int = 2
    features_per_bit: int = 4
    dropout_rate: float = 0.05
    activation: str = "softplus"


@dataclass(frozen=True)
class RunConfig:
    fcidump_path: str
    seed_kind: str = "hf"
    n_gs_samples: int = 1000
    n_network_samples: int = 0  # 0: expected-sample anchor from the exact GS
    n_unique_cap: int = 0  # 0: twice the chemical-accuracy count
    n_train: tuple[int, ...] = (10_000, 100_000)
    beta_schedule: tuple[float, ...] | str = "auto"
    beta0: float = 0.4
    model_stages: tuple[StageSpec, ...] = (
        StageSpec(),
        StageSpec(n_layers=4, features_per_bit=8, dropout_rate=0.1),
    )
    max_iterations: int = 60
    epsilon_ha: float = 1e-5
    patience: int = 3
    rng_seed: int = 1
    warm_start: bool = False
    compute_reference: bool = True
    verbose_loss: bool = False  # per-iteration training-loss CSVs in the run dir
    target_irrep: int = 0
    train_learning_rate: float = 0.001
    train_epochs: int = 200
    train_minibatch: int = 256

    def __post_init__(self) -> None:
        if self.seed_kind not in SEED_KINDS:
            raise ValueError(f"seed_kind must be one of {SEED_KINDS}")
        if not self.model_stages:
            raise ValueError("need at least one model stage")
        if len(self.n_train) != len(self.model_stages):
            raise ValueError("n_train schedule must match the model stages")
        if self.epsilon_ha <= 0 or self.patience < 1:
            raise ValueError("invalid convergence settings")


@dataclass(frozen=True)
class IterationRecord:
    index: int
    energy: float
    delta_e_vs_reference: float | None
    n_unique_used: int
    beta_used: float
    n_discarded_unphysical: int
    model_stage: int
    wall_time_s: float


@dataclass
class RunResult:
    records: list[IterationRecord]
    final_state: SparseState
    status: str  # converged | max_iterations
    reference_energy: float | None
    n_unique_cap: int
    n_network_samples: int


class RunAborted(RuntimeError):
    """A component failed mid-run; carries everything up to the failure."""

    def __init__(self, message: str, partial: RunResult | None):
        super().__init__(message)
        self.partial = partial


def cisd_configurations(t: IntegralTable, sector: SymmetrySector) -> list[Configuration]:
    """HF plus its symmetry-filtered single and double excitations."""
    hf = hf_configuration(t.m, t.n_electrons)
    out = []
    if passes_symmetry(hf, sector):
        out.append(hf)
    seen = {hf.bits}
    for order in ("singles", "doubles"):
        for c in excitations(hf, order):
            if c.bits not in seen and passes_symmetry(c, sector):
                seen.add(c.bits)
                out.append(c)
    return out


def build_seed(cfg: RunConfig, t: IntegralTable, sector: SymmetrySector) -> SparseState:
    """Initial approximation: HF point mass, the CISD ground state, or the
    exact ground state as a sampling source."""
    if cfg.seed_kind == "hf":
        hf = hf_configuration(t.m, t.n_electrons)
        if not passes_symmetry(hf, sector):
            raise ValueError("the closed-shell reference lies outside the target sector")
        return solve_subspace([hf], t)
    if cfg.seed_kind == "cisd":
        basis = cisd_configurations(t, sector)
        if len(basis) > CISD_GUARD:
            raise ValueError(f"CISD space of {len(basis)} exceeds the guard {CISD_GUARD}")
        if not basis:
            raise ValueError("empty CISD space in the target sector")
        return solve_subspace(basis, t)
    size = count_symmetry_sector(sector, t.m)
    if size > FCI_GUARD:
        raise ValueError(f"gs_sample seed needs FCI; sector size {size} exceeds guard")
    return fci_reference(t, sector)


def iteration_zero(seed_state: SparseState, cfg: RunConfig, t: IntegralTable,
                   sector: SymmetrySector, forced: list[Configuration]) -> tuple[SparseState, IterationRecord]:
    """Diagonalize over raw seed data (no network): sampled support for the
    gs_sample kind, the seed's own support otherwise, plus the forced set."""
    start = time.perf_counter()
    if cfg.seed_kind == "gs_sample":
        rng = substream(cfg.rng_seed, "seed-sample")
        counts = rng.multinomial(cfg.n_gs_samples, seed_state.born_probabilities())
        sampled = [
            (c, int(k)) for c, k in zip(seed_state.support, counts) if k > 0
        ]
        sampled.sort(key=lambda ck: (-ck[1], ck[0].lex_key()))
        ranked = [c for c, _ in sampled]
    else:
        order = np.argsort(-np.abs(seed_state.amplitudes), kind="stable")
        ranked = [seed_state.support[i] for i in order]
    basis = _merge_capped(forced, ranked, cfg.n_unique_cap)
    psi = solve_subspace(basis, t)
    return psi, IterationRecord(
        index=0,
        energy=psi.energy,
        delta_e_vs_reference=None,
        n_unique_used=len(basis),
        beta_used=1.0,
        n_discarded_unphysical=0,
        model_stage=0,
        wall_time_s=time.perf_counter() - start,
    )


def _merge_capped(forced: list[Configuration], ranked: list[Configuration], cap: int) -> list[Configuration]:
    out = list(forced)
    seen = {c.bits for c in forced}
    room = max(cap, len(out)) - len(out)
    for c in ranked:
        if room == 0:
            break
        if c.bits not in seen:
            seen.add(c.bits)
            out.append(c)
            room -= 1
    return out


def run_iteration(psi_prev: SparseState, cfg: RunConfig, t: IntegralTable,
                  sector: SymmetrySector, forced: list[Configuration], i: int,
                  stage_idx: int, model_prev: ArnnModel | None,
                  loss_sink=None) -> tuple[SparseState, IterationRecord, ArnnModel]:
    start = time.perf_counter()
    table = rescale_sparse(psi_prev, cfg.beta0)
    data = draw_training_set(
        table, cfg.n_train[stage_idx], substream(cfg.rng_seed, "train-draw", i)
    )
    stage = cfg.model_stages[stage_idx]
    if cfg.warm_start and model_prev is not None:
        model = model_prev
    else:
        model = init_model(
            ArnnConfig(
                n_bits=t.m,
                n_layers=stage.n_layers,
                features_per_bit=stage.features_per_bit,
                dropout_rate=stage.dropout_rate,
                activation=stage.activation,
                seed=hash64(cfg.rng_seed, "init", i) % 2**32,
            )
        )
    plan = TrainPlan(
        learning_rate=cfg.train_learning_rate,
        epochs=cfg.train_epochs,
        minibatch_size=cfg.train_minibatch,
        beta0=cfg.beta0,
        shuffle_seed=hash64(cfg.rng_seed, "train", i) % 2**32,
    )
    model, trace = train(model, data, plan)
    if loss_sink is not None:
        from .trainer import write_loss_trace

        with open(loss_sink, "w") as fh:
            write_loss_trace(trace, fh)

    sample_seed = hash64(cfg.rng_seed, "sample", i)
    if cfg.beta_schedule == "auto":
        if i <= TEMPERATURE_ITERATIONS:
            beta, batch = find_beta(
                model, cfg.n_network_samples, cfg.n_unique_cap, sector, sample_seed
            )
        else:
            beta = 1.0
            batch = sample_fast(model, cfg.n_network_samples, beta, sample_seed)
    else:
        beta = cfg.beta_schedule[i - 1] if i - 1 < len(cfg.beta_schedule) else 1.0
        batch = sample_fast(model, cfg.n_network_samples, beta, sample_seed)

    physical = filter_physical(batch, sector)
    retention_order = np.argsort(-np.abs(psi_prev.amplitudes), kind="stable")
    retention = [psi_prev.support[k] for k in retention_order]
    basis = select_unique(physical, cfg.n_unique_cap, forced + retention, model=model)
    psi = solve_subspace(basis, t)
    record = IterationRecord(
        index=i,
        energy=psi.energy,
        delta_e_vs_reference=None,
        n_unique_used=len(basis),
        beta_used=beta,
        n_discarded_unphysical=physical.n_discarded_unphysical,
        model_stage=stage_idx,
        wall_time_s=time.perf_counter() - start,
    )
    return psi, record, model


def run(cfg: RunConfig, run_dir=None) -> RunResult:
    """Iterate until the energy improvement stays below epsilon_ha for
    `patience` iterations at the final model stage."""
    t = load_fcidump(cfg.fcidump_path)
    if t.ms2 != 0:
        raise ValueError("only Sz = 0 systems are supported")
    sector = t.sector(cfg.target_irrep)
    forced = cisd_configurations(t, sector)

    reference: SparseState | None = None
    if cfg.compute_reference and count_symmetry_sector(sector, t.m) <= FCI_GUARD:
        reference = fci_reference(t, sector)
    ref_energy = reference.energy if reference is not None else None

    cfg = _resolve_auto_settings(cfg, t, reference)
    if cfg.seed_kind == "gs_sample" and reference is not None:
        seed_state = reference
    else:
        seed_state = build_seed(cfg, t, sector)

    records: list[IterationRecord] = []
    models: dict[int, ArnnModel] = {}

    def finalize(state: SparseState, status: str) -> RunResult:
        result = RunResult(
            records, state, status, ref_energy, cfg.n_unique_cap, cfg.n_network_samples
        )
        if run_dir is not None:
            _write_run_dir(Path(run_dir), result, models)
        return result

    def with_delta(rec: IterationRecord) -> IterationRecord:
        if ref_energy is None:
            return rec
        return replace(rec, delta_e_vs_reference=rec.energy - ref_energy)

    psi, rec = iteration_zero(seed_state, cfg, t, sector, forced)
    records.append(with_delta(rec))

    stage_idx = 0
    stall = 0
    status = "max_iterations"
    model_prev: ArnnModel | None = None
    try:
        for i in range(1, cfg.max_iterations + 1):
            loss_sink = None
            if cfg.verbose_loss and run_dir is not None:
                Path(run_dir).mkdir(parents=True, exist_ok=True)
                loss_sink = Path(run_dir) / f"loss_iter{i:03d}.csv"
            psi_new, rec, model = run_iteration(
                psi, cfg, t, sector, forced, i, stage_idx, model_prev, loss_sink
            )
            records.append(with_delta(rec))
            models[stage_idx] = model
            model_prev = model
            improvement = psi.energy - psi_new.energy
            psi = psi_new
            if improvement < cfg.epsilon_ha:
                stall += 1
            else:
                stall = 0
            if stall >= cfg.patience:
                if stage_idx < len(cfg.model_stages) - 1:
                    stage_idx += 1
                    stall = 0
                    model_prev = None  # stages differ in shape
                else:
                    status = "converged"
                    break
    except Exception as err:  # preserve progress; the caller decides next steps
        partial = finalize(psi, "error")
        raise RunAborted(f"iteration failed: {err}", partial) from err
    return finalize(psi, status)


def _resolve_auto_settings(cfg: RunConfig, t: IntegralTable,
                           reference: SparseState | None) -> RunConfig:
    updates = {}
    if cfg.n_unique_cap == 0 or cfg.n_network_samples == 0:
        if reference is None:
            raise ValueError(
                "automatic n_unique_cap / n_network_samples need the exact "
                "ground state; set them explicitly for guarded sectors"
            )
        n_acc = n_ca(reference, t)
        if cfg.n_unique_cap == 0:
            updates["n_unique_cap"] = 2 * n_acc
        if cfg.n_network_samples == 0:
            probs = np.sort(reference.born_probabilities())[::-1]
            anchor = probs[min(n_acc, probs.size) - 1]
            updates["n_network_samples"] = int(math.ceil(1.0 / max(anchor, 1e-12)))
    return replace(cfg, **updates) if updates else cfg


CSV_HEADER = "i,energy_ha,delta_e_ha,n_unique,beta,discarded,stage,seconds"


def _write_run_dir(path: Path, result: RunResult, models: dict[int, ArnnModel]) -> None:
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "records.csv", "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in result.records:
            delta = "" if r.delta_e_vs_reference is None else f"{r.delta_e_vs_reference:.12g}"
            fh.write(
                f"{r.index},{r.energy:.12f},{delta},{r.n_unique_used},"
                f"{r.beta_used:.6g},{r.n_discarded_unphysical},{r.model_stage},"
                f"{r.wall_time_s:.3f}\n"
            )
    with open(path / "final_state.txt", "w") as fh:
        order = np.argsort(-np.abs(result.final_state.amplitudes), kind="stable")
        for k in order:
            c = result.final_state.support[k]
            fh.write(f"{c.to_text()} {result.final_state.amplitudes[k]:.15g}\n")
    for stage_idx, model in models.items():
        save_model(model, path / f"model_stage{stage_idx}.arnn")
