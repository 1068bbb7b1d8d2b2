"""Temperature-scaled fast sampling of the network, with post-selection.

Sampling grows all requested samples as one batch of bitstring prefixes:
at bit q every live prefix splits binomially between its two children, so
the work scales with the number of unique prefixes rather than the sample
count.  The inverse temperature deforms each conditional independently,
which preserves per-bit normalization exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._rng import hash64
from .arnn import ArnnModel, conditional_log_probs_batch, log_prob_batch
from .determinant import Configuration, SymmetrySector, passes_symmetry

EXACT_BINOMIAL_LIMIT = 10**6
BETA_MIN = 0.05
BETA_PROBE_LIMIT = 12
BETA_ACCEPT_BAND = 0.10


@dataclass(frozen=True)
class SampleBatch:
    """Aggregated draw: unique configurations with multiplicities."""

    entries: tuple[tuple[Configuration, int], ...]
    n_requested: int
    beta: float
    n_discarded_unphysical: int = 0

    @property
    def n_unique(self) -> int:
        return len(self.entries)

    def total_count(self) -> int:
        return sum(k for _, k in self.entries)


def _binomial_split(count: int, p_one: float, rng: np.random.Generator) -> int:
    if count <= EXACT_BINOMIAL_LIMIT:
        return int(rng.binomial(count, p_one))
    mean = count * p_one
    sd = np.sqrt(count * p_one * (1.0 - p_one))
    return int(np.clip(np.rint(rng.normal(mean, sd)), 0, count))


def sample_fast(model: ArnnModel, n: int, beta: float, seed) -> SampleBatch:
    """Draw n samples from the beta-deformed network distribution.

    ``seed`` may be an int or a Generator (an int root is drawn from it);
    every prefix gets its own counter-based stream keyed by
    (seed, bit, prefix), so the result is independent of processing order.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(0, 2**63))
    m = model.n_bits
    prefixes = np.zeros(1, dtype=np.uint64)
    counts = np.array([n], dtype=np.int64)
    shifts = np.arange(m, dtype=np.uint64)
    for q in range(m):
        x = ((prefixes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
        logp = conditional_log_probs_batch(model, x)[:, q, :]
        if not np.all(np.isfinite(logp)):
            raise FloatingPointError(f"non-finite conditional at bit {q}")
        a = beta * logp
        peak = a.max(axis=1, keepdims=True)
        expa = np.exp(a - peak)
        p_one = expa[:, 1] / expa.sum(axis=1)
        ones = np.empty_like(counts)
        for i in range(prefixes.size):
            rng = np.random.Generator(
                np.random.Philox(key=np.uint64(hash64(seed, q, int(prefixes[i]))))
            )
            ones[i] = _binomial_split(int(counts[i]), float(p_one[i]), rng)
        zeros = counts - ones
        child_prefixes = np.concatenate([prefixes, prefixes | np.uint64(1 << q)])
        child_counts = np.concatenate([zeros, ones])
        live = child_counts > 0
        order = np.argsort(child_prefixes[live], kind="stable")
        prefixes = child_prefixes[live][order]
        counts = child_counts[live][order]
    entries = tuple(
        (Configuration(int(b), m), int(k)) for b, k in zip(prefixes, counts)
    )
    return SampleBatch(entries, n, beta)


def filter_physical(batch: SampleBatch, sector: SymmetrySector) -> SampleBatch:
    """Drop entries outside the symmetry sector, recording their weight."""
    kept = []
    discarded = batch.n_discarded_unphysical
    for c, k in batch.entries:
        if passes_symmetry(c, sector):
            kept.append((c, k))
        else:
            discarded += k
    return SampleBatch(tuple(kept), batch.n_requested, batch.beta, discarded)


def select_unique(batch: SampleBatch, n_u_cap: int, forced,
                  model: ArnnModel | None = None) -> list[Configuration]:
    """Ordered basis: forced configurations, then top sampled ones.

    Sampled entries rank by count (desc), then model log-probability
    (desc, when a model is given), then lexicographic text order.  The
    result is truncated to max(n_u_cap, len(forced)).
    """
    forced_list: list[Configuration] = []
    seen: set[int] = set()
    for c in forced:
        if c.bits not in seen:
            seen.add(c.bits)
            forced_list.append(c)
    if n_u_cap < len(forced_list):
        warnings.warn(
            f"unique cap {n_u_cap} below forced set size {len(forced_list)}; keeping forced",
            stacklevel=2,
        )
    candidates = [(c, k) for c, k in batch.entries if c.bits not in seen]
    if model is not None and candidates:
        from .arnn import config_batch

        logp = log_prob_batch(model, config_batch([c for c, _ in candidates], model.n_bits))
    else:
        logp = np.zeros(len(candidates))
    ranked = sorted(
        range(len(candidates)),
        key=lambda i: (-candidates[i][1], -logp[i], candidates[i][0].lex_key()),
    )
    room = max(n_u_cap, len(forced_list)) - len(forced_list)
    return forced_list + [candidates[i][0] for i in ranked[:room]]


def find_beta(model: ArnnModel, n: int, target_unique: int, sector: SymmetrySector,
              seed) -> tuple[float, SampleBatch]:
    """Bisect beta in [BETA_MIN, 1] until the physical unique count lands
    within +-10% of target (12 probes max, fresh seed per probe); returns
    the pre-filter batch of the closest probe."""
    if target_unique < 1:
        raise ValueError("target_unique must be positive")
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(0, 2**63))

    def probe(beta: float, k: int):
        batch = sample_fast(model, n, beta, hash64(seed, "beta-probe", k))
        unique = filter_physical(batch, sector).n_unique
        return batch, unique

    batch, unique = probe(1.0, 0)
    if unique >= target_unique:
        return 1.0, batch
    best = (abs(unique - target_unique), 1.0, batch)

    lo_batch, lo_unique = probe(BETA_MIN, 1)
    if abs(lo_unique - target_unique) < best[0]:
        best = (abs(lo_unique - target_unique), BETA_MIN, lo_batch)
    if lo_unique < target_unique:
        warnings.warn(
            f"target of {target_unique} unique configurations unreachable at "
            f"beta={BETA_MIN} (got {lo_unique})",
            stacklevel=2,
        )
        return BETA_MIN, lo_batch

    lo, hi = BETA_MIN, 1.0  # unique(lo) >= target > unique(hi)
    for k in range(2, BETA_PROBE_LIMIT):
        mid = 0.5 * (lo + hi)
        batch, unique = probe(mid, k)
        if abs(unique - target_unique) < best[0]:
            best = (abs(unique - target_unique), mid, batch)
        if abs(unique - target_unique) <= BETA_ACCEPT_BAND * target_unique:
            return mid, batch
        if unique >= target_unique:
            lo = mid
        else:
            hi = mid
    return best[1], best[2]


def dump_batch(batch: SampleBatch, stream, model: ArnnModel | None = None) -> None:
    """CSV emission (bitstring, count, log_prob) for filling analyses."""
    stream.write("bitstring,count,log_prob\n")
    if model is not None and batch.entries:
        from .arnn import config_batch

        logp = log_prob_batch(model, config_batch([c for c, _ in batch.entries], model.n_bits))
    else:
        logp = np.full(len(batch.entries), np.nan)
    for (c, k), lp in zip(batch.entries, logp):
        stream.write(f"{c.to_text()},{k},{lp:.12g}\n")
