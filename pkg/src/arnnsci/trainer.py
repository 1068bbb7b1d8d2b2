"""Maximum-likelihood training of the network on weighted configuration data.

Minimizing the negative weighted log-likelihood is the same as minimizing
the KL divergence from the data distribution up to its (parameter-free)
entropy.  Training never touches the Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .arnn import ArnnModel, config_batch, log_prob_batch, log_prob_grad_arrays
from .determinant import Configuration
from .eigensolver import SparseState


@dataclass(frozen=True)
class TrainingSet:
    """Unique configurations with multiplicities; total = N_T."""

    entries: tuple[tuple[Configuration, int], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty training set")
        if any(count < 1 for _, count in self.entries):
            raise ValueError("counts must be positive")
        if len({c.bits for c, _ in self.entries}) != len(self.entries):
            raise ValueError("duplicate configurations in training set")

    @property
    def total(self) -> int:
        return sum(count for _, count in self.entries)


@dataclass(frozen=True)
class TrainPlan:
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 200
    minibatch_size: int = 256
    beta0: float = 0.4
    shuffle_seed: int = 0
    early_stop_rel: float | None = 1e-4  # None disables the stopping rule

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if not 0.0 < self.beta0 <= 1.0:
            raise ValueError("beta0 must lie in (0, 1]")


@dataclass(frozen=True)
class ProbabilityTable:
    """Normalized probabilities over an explicit configuration list."""

    configs: tuple[Configuration, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        if len(self.configs) != self.probs.shape[0]:
            raise ValueError("configs and probs disagree in length")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9 or np.any(self.probs < 0):
            raise ValueError("probabilities must be non-negative and sum to 1")


def rescale_sparse(state: SparseState, beta0: float) -> ProbabilityTable:
    """Born distribution of the sparse iterate, flattened by |amp|^(2*beta0)."""
    if len(state.support) == 0:
        raise ValueError("empty state")
    if beta0 <= 0:
        raise ValueError("beta0 must be positive")
    p = np.abs(state.amplitudes) ** (2.0 * beta0)
    total = p.sum()
    if total == 0.0:
        raise ValueError("state has all-zero amplitudes")
    return ProbabilityTable(state.support, p / total)


def draw_training_set(p: ProbabilityTable, n_samples: int, rng: np.random.Generator) -> TrainingSet:
    """Multinomial draw aggregated into (configuration, count) entries."""
    counts = rng.multinomial(n_samples, p.probs)
    entries = tuple(
        (c, int(k)) for c, k in zip(p.configs, counts) if k > 0
    )
    return TrainingSet(entries)


def train(model: ArnnModel, data: TrainingSet, plan: TrainPlan):
    """ADAM on minibatches of the negative weighted log-likelihood.

    Returns (trained model, loss trace) where the trace rows are
    (epoch, minibatch, nll).  The input model is left untouched; ADAM
    moments start fresh.  Minibatches draw entries with probability
    proportional to count; once the minibatch would cover the whole set,
    the exact count-weighted gradient is used instead (same expectation,
    zero sampling variance).
    """
    out = model.copy()
    trace: list[tuple[int, int, float]] = []
    if plan.epochs == 0:
        return out, trace

    configs = [c for c, _ in data.entries]
    counts = np.array([k for _, k in data.entries], dtype=np.float64)
    x_all = config_batch(configs, model.n_bits)
    weights_all = counts / counts.sum()

    batch_rng = substream(plan.shuffle_seed, "minibatch")
    drop_rng = substream(plan.shuffle_seed, "dropout")
    full_batch = plan.minibatch_size >= len(data.entries)
    steps_per_epoch = max(1, -(-data.total // plan.minibatch_size))

    m1 = np.zeros_like(out.params)
    m2 = np.zeros_like(out.params)
    step = 0
    epoch_losses: list[float] = []
    for epoch in range(plan.epochs):
        nlls = []
        for minibatch in range(steps_per_epoch):
            if full_batch:
                x, w = x_all, weights_all
            else:
                picks = batch_rng.choice(
                    len(configs), size=plan.minibatch_size, p=weights_all
                )
                x = x_all[picks]
                w = np.full(plan.minibatch_size, 1.0 / plan.minibatch_size)
            grad, loglike = log_prob_grad_arrays(out, x, w, train_mode=True, rng=drop_rng)
            nll = -loglike
            if not np.isfinite(nll):
                raise RuntimeError(
                    f"training diverged at epoch {epoch} minibatch {minibatch}: nll={nll}"
                )
            trace.append((epoch, minibatch, nll))
            nlls.append(nll)
            step += 1
            m1 = plan.adam_beta1 * m1 + (1 - plan.adam_beta1) * (-grad)
            m2 = plan.adam_beta2 * m2 + (1 - plan.adam_beta2) * grad**2
            hat1 = m1 / (1 - plan.adam_beta1**step)
            hat2 = m2 / (1 - plan.adam_beta2**step)
            out.params -= plan.learning_rate * hat1 / (np.sqrt(hat2) + plan.adam_eps)
        epoch_losses.append(float(np.mean(nlls)))
        if plan.early_stop_rel is not None and epoch >= 10:
            past = epoch_losses[-11]
            if past - epoch_losses[-1] < plan.early_stop_rel * abs(past):
                break
    return out, trace


def kl_divergence_exact(p: ProbabilityTable, model: ArnnModel) -> float:
    """sum_n p(n) (log p(n) - log P_model(n)) over the table's support."""
    live = p.probs > 0
    x = config_batch([c for c, keep in zip(p.configs, live) if keep], model.n_bits)
    logq = log_prob_batch(model, x)
    pv = p.probs[live]
    return float(np.sum(pv * (np.log(pv) - logq)))


def write_loss_trace(trace, stream) -> None:
    """CSV emission (epoch, minibatch, nll) for the verbose flag."""
    stream.write("epoch,minibatch,nll\n")
    for epoch, minibatch, nll in trace:
        stream.write(f"{epoch},{minibatch},{nll:.12g}\n")
