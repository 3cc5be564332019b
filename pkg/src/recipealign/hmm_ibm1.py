"""Pairwise instruction aligner: lexical emission model inside a position HMM.

One recipe of a pair plays the source role, the other the target role.  The
hidden state of source instruction m is the index n of the target instruction
that emits it, so a state sequence lives in {0..N-1}^M.  The pieces:

* emission: a source instruction F = f_1..f_J is emitted by a target
  instruction E = e_1..e_I with probability

      (epsilon / I^J) * prod_j sum_i p(f_j | e_i)

  where p(f|e) is a learned lexical table.  There is no null word; the
  normalizer is I^J.  Pairs missing from the table score FLOOR_PROB.

* transition: a single multinomial over index offsets d in [-window, window],
  renormalized at each state over the offsets that stay inside 0..N-1.  The
  initial state is uniform.

* training: EM over a pair corpus.  Expected word-link counts refit the
  lexical table by row normalization.  Expected jump counts refit the offset
  multinomial; because the same offset parameter appears in many renormalized
  rows, that subproblem is solved exactly in log space (it is a concave
  maximum-entropy objective) instead of by count normalization, keeping the
  corpus log-likelihood non-decreasing within a schedule stage.

* decoding: posterior marginals gamma from forward-backward; each source
  instruction takes argmax_n gamma[m][n], ties to the smaller index.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .corpus import TokenSequence, Vocabulary

FLOOR_PROB = 1e-12

LexicalTable = dict[str, dict[str, float]]
JumpTable = dict[int, float]
SequencePair = tuple[Sequence[TokenSequence], Sequence[TokenSequence]]


class DegenerateInput(ValueError):
    """A pair with an empty side (or an empty token sequence) cannot be aligned."""


class NoPairs(ValueError):
    """Training needs at least one sequence pair."""


@dataclass(frozen=True)
class TrainSchedule:
    """EM stages as (window, iterations) tuples; windows must not shrink."""

    stages: tuple[tuple[int, int], ...] = ((1, 3), (2, 2))

    def __post_init__(self):
        if not self.stages:
            raise ValueError("schedule needs at least one stage")
        last = 0
        for window, iters in self.stages:
            if window < 1 or iters < 1:
                raise ValueError("stage windows and iteration counts must be >= 1")
            if window < last:
                raise ValueError("stage windows must be non-decreasing")
            last = window


@dataclass
class AlignmentModel:
    lexical: LexicalTable
    jump: JumpTable
    window: int
    epsilon: float = 1.0
    source_vocab: Vocabulary | None = None
    target_vocab: Vocabulary | None = None
    schedule: TrainSchedule | None = None
    loglik_trace: tuple[float, ...] = ()

    def lexical_prob(self, e: str, f: str) -> float:
        """p(f|e), falling back to the floor for pairs the table never saw."""
        row = self.lexical.get(e)
        if row is None:
            return FLOOR_PROB
        return row.get(f, FLOOR_PROB)


@dataclass(frozen=True)
class PairwiseAlignment:
    """Decoded alignment of one ordered pair.

    labels[m] is the target index emitting source instruction m and
    posteriors[m] its marginal probability; posterior_rows optionally keeps
    the full gamma rows.
    """

    source_id: str
    target_id: str
    labels: tuple[int, ...]
    posteriors: tuple[float, ...]
    dish_id: str | None = None
    kind: str | None = None
    posterior_rows: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class FBResult:
    gamma: np.ndarray  # (M, N) posterior state marginals, rows sum to 1
    xi: np.ndarray  # (M-1, N, N) posterior transition marginals
    loglik: float


def _lex_prob(lexical: LexicalTable, e: str, f: str) -> float:
    row = lexical.get(e)
    if row is None:
        return FLOOR_PROB
    return row.get(f, FLOOR_PROB)


def emission_logprob(
    source_seq: TokenSequence, target_seq: TokenSequence, model: AlignmentModel
) -> float:
    """Log of (epsilon / I^J) * prod_j sum_i p(f_j|e_i)."""
    I = len(target_seq.tokens)
    J = len(source_seq.tokens)
    if I == 0 or J == 0:
        raise DegenerateInput("empty token sequence")
    total = math.log(model.epsilon) - J * math.log(I)
    tgt_counts = Counter(target_seq.tokens)
    for f in source_seq.tokens:
        s = 0.0
        for e, ce in tgt_counts.items():
            s += ce * model.lexical_prob(e, f)
        total += math.log(s)
    return total


# ---------------------------------------------------------------------------
# forward-backward
# ---------------------------------------------------------------------------


class _PreparedPair:
    """Per-pair token statistics that are constant across EM iterations."""

    __slots__ = ("src_counters", "tgt_counters", "src_lens", "tgt_lens", "m", "n")

    def __init__(self, source_seqs: Sequence[TokenSequence], target_seqs: Sequence[TokenSequence]):
        if not source_seqs or not target_seqs:
            raise DegenerateInput("a pair side has no instructions")
        if any(not s.tokens for s in source_seqs) or any(
            not t.tokens for t in target_seqs
        ):
            raise DegenerateInput("empty token sequence")
        self.src_counters = [Counter(s.tokens) for s in source_seqs]
        self.tgt_counters = [Counter(t.tokens) for t in target_seqs]
        self.src_lens = [len(s.tokens) for s in source_seqs]
        self.tgt_lens = np.array([len(t.tokens) for t in target_seqs], dtype=float)
        self.m = len(source_seqs)
        self.n = len(target_seqs)


def _emission_tables(
    prep: _PreparedPair, lexical: LexicalTable, epsilon: float
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Denominators D[f][n] = sum_e count_e(n) p(f|e) and the log-emission matrix."""
    denominators: dict[str, np.ndarray] = {}
    log_denominators: dict[str, np.ndarray] = {}
    distinct_f = sorted({f for counter in prep.src_counters for f in counter})
    for f in distinct_f:
        vec = np.empty(prep.n)
        for n, tc in enumerate(prep.tgt_counters):
            s = 0.0
            for e, ce in tc.items():
                s += ce * _lex_prob(lexical, e, f)
            vec[n] = s
        denominators[f] = vec
        log_denominators[f] = np.log(vec)
    log_i = np.log(prep.tgt_lens)
    log_b = np.empty((prep.m, prep.n))
    log_eps = math.log(epsilon)
    for m, sc in enumerate(prep.src_counters):
        row = log_eps - prep.src_lens[m] * log_i
        for f, cf in sc.items():
            row = row + cf * log_denominators[f]
        log_b[m] = row
    return denominators, log_b


def _transition_matrix(jump: JumpTable, window: int, n_states: int) -> np.ndarray:
    """Offset multinomial renormalized over the feasible successors of each state.

    A row whose feasible offsets all carry zero probability falls back to
    uniform; trained tables never produce one, but hand-built ones can.
    """
    trans = np.zeros((n_states, n_states))
    for n in range(n_states):
        lo = max(0, n - window)
        hi = min(n_states - 1, n + window)
        row = np.array([jump.get(d, 0.0) for d in range(lo - n, hi - n + 1)])
        z = row.sum()
        if z <= 0.0:
            row = np.full(hi - lo + 1, 1.0 / (hi - lo + 1))
        else:
            row = row / z
        trans[n, lo : hi + 1] = row
    return trans


def _scaled_forward_backward(
    log_b: np.ndarray, trans: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """Rabiner-scaled forward-backward with a uniform initial distribution.

    Emissions arrive in log space and are shifted per observation before
    exponentiation, so arbitrarily long instructions cannot underflow; the
    shifts are added back into the returned log-likelihood.
    """
    m_total, n_states = log_b.shape
    shift = log_b.max(axis=1)
    emis = np.exp(log_b - shift[:, None])

    alpha = np.empty((m_total, n_states))
    scale = np.empty(m_total)
    a = emis[0] / n_states
    scale[0] = a.sum()
    alpha[0] = a / scale[0]
    for m in range(1, m_total):
        a = (alpha[m - 1] @ trans) * emis[m]
        scale[m] = a.sum()
        alpha[m] = a / scale[m]

    beta = np.empty((m_total, n_states))
    beta[m_total - 1] = 1.0
    for m in range(m_total - 2, -1, -1):
        beta[m] = (trans @ (emis[m + 1] * beta[m + 1])) / scale[m + 1]

    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    if m_total > 1:
        xi = (
            alpha[:-1, :, None]
            * trans[None, :, :]
            * (emis[1:, None, :] * beta[1:, None, :])
            / scale[1:, None, None]
        )
        xi /= xi.sum(axis=(1, 2), keepdims=True)
    else:
        xi = np.zeros((0, n_states, n_states))
    loglik = float(np.log(scale).sum() + shift.sum())
    return gamma, xi, loglik


def forward_backward(
    source_seqs: Sequence[TokenSequence],
    target_seqs: Sequence[TokenSequence],
    model: AlignmentModel,
) -> FBResult:
    """Posterior state and transition marginals for one ordered pair."""
    prep = _PreparedPair(source_seqs, target_seqs)
    _, log_b = _emission_tables(prep, model.lexical, model.epsilon)
    trans = _transition_matrix(model.jump, model.window, prep.n)
    gamma, xi, loglik = _scaled_forward_backward(log_b, trans)
    return FBResult(gamma=gamma, xi=xi, loglik=loglik)


def decode(
    source_seqs: Sequence[TokenSequence],
    target_seqs: Sequence[TokenSequence],
    model: AlignmentModel,
    *,
    source_id: str = "",
    target_id: str = "",
    dish_id: str | None = None,
    kind: str | None = None,
    keep_rows: bool = False,
) -> PairwiseAlignment:
    """Posterior decoding: per-instruction argmax of gamma, ties to smaller n."""
    result = forward_backward(source_seqs, target_seqs, model)
    labels = result.gamma.argmax(axis=1)
    posteriors = result.gamma[np.arange(len(labels)), labels]
    rows = None
    if keep_rows:
        rows = tuple(tuple(float(x) for x in row) for row in result.gamma)
    return PairwiseAlignment(
        source_id=source_id,
        target_id=target_id,
        labels=tuple(int(l) for l in labels),
        posteriors=tuple(float(p) for p in posteriors),
        dish_id=dish_id,
        kind=kind,
        posterior_rows=rows,
    )


# ---------------------------------------------------------------------------
# EM training
# ---------------------------------------------------------------------------


def _cooccurrence_init(prepared: Sequence[_PreparedPair]) -> LexicalTable:
    """Uniform lexical table over the (target word, source word) pairs that
    co-occur in at least one training pair."""
    cooc: dict[str, set[str]] = {}
    for prep in prepared:
        src_words = sorted({f for c in prep.src_counters for f in c})
        tgt_words = sorted({e for c in prep.tgt_counters for e in c})
        for e in tgt_words:
            cooc.setdefault(e, set()).update(src_words)
    table: LexicalTable = {}
    for e in sorted(cooc):
        fs = sorted(cooc[e])
        p = 1.0 / len(fs)
        table[e] = {f: p for f in fs}
    return table


def _widen_jump(jump: JumpTable | None, window: int) -> JumpTable:
    """First stage: uniform over the window.  Later stages keep the learned
    mass, seed newly legal offsets at the floor, and renormalize."""
    offsets = range(-window, window + 1)
    if jump is None:
        p = 1.0 / (2 * window + 1)
        return {d: p for d in offsets}
    if all(d in jump for d in offsets):
        return dict(jump)
    widened = {d: jump.get(d, FLOOR_PROB) for d in offsets}
    total = sum(widened.values())
    return {d: p / total for d, p in widened.items()}


def _accumulate_pair(
    prep: _PreparedPair,
    lexical: LexicalTable,
    trans_cache: dict[int, np.ndarray],
    jump: JumpTable,
    window: int,
    epsilon: float,
    lex_counts: dict[str, dict[str, float]],
    jump_counts: np.ndarray,
    visits: dict[tuple[int, int], float],
) -> float:
    """E-step for one pair; returns its log-likelihood under the current model."""
    denominators, log_b = _emission_tables(prep, lexical, epsilon)
    trans = trans_cache.get(prep.n)
    if trans is None:
        trans = _transition_matrix(jump, window, prep.n)
        trans_cache[prep.n] = trans
    gamma, xi, loglik = _scaled_forward_backward(log_b, trans)

    for m, sc in enumerate(prep.src_counters):
        for n, tc in enumerate(prep.tgt_counters):
            weight = gamma[m, n]
            for f, cf in sc.items():
                scale = weight * cf / denominators[f][n]
                for e, ce in tc.items():
                    contribution = scale * ce * _lex_prob(lexical, e, f)
                    row = lex_counts.get(e)
                    if row is None:
                        row = lex_counts[e] = {}
                    row[f] = row.get(f, 0.0) + contribution

    if prep.m > 1:
        xi_total = xi.sum(axis=0)
        for d in range(-window, window + 1):
            jump_counts[d + window] += float(np.trace(xi_total, offset=d))
        gamma_sources = gamma[:-1].sum(axis=0)
        for n in range(prep.n):
            key = (max(-window, -n), min(window, prep.n - 1 - n))
            visits[key] = visits.get(key, 0.0) + float(gamma_sources[n])
    return loglik


def _normalize_lexical(lex_counts: dict[str, dict[str, float]]) -> LexicalTable:
    table: LexicalTable = {}
    for e, row in lex_counts.items():
        total = sum(row.values())
        if total <= 0.0:
            continue
        # filter on the quotient, not the count: c/total can underflow to an
        # exact zero, and a stored zero would bypass the lookup floor
        normalized = {f: c / total for f, c in row.items()}
        table[e] = {f: p for f, p in normalized.items() if p > 0.0}
    return table


def _fit_jump(
    jump_counts: np.ndarray,
    visits: dict[tuple[int, int], float],
    jump_old: JumpTable,
    window: int,
) -> JumpTable:
    """Exact jump M-step.

    Expected complete-data objective in log parameters eta:

        Q(eta) = sum_d c_d eta_d - sum_pat v_pat log sum_{d in pat} exp(eta_d)

    where a pattern is one distinct feasible window (lo, hi) aggregated over
    states and pairs.  Q is concave and gauge-invariant (sum c = sum v), so we
    maximize with L-BFGS warm-started at the current table and keep the old
    table if the optimizer fails to improve Q; either way the EM step cannot
    decrease the corpus likelihood.  When every visit shares the full window
    the closed-form count ratio is already exact.
    """
    offsets = list(range(-window, window + 1))
    counts = np.asarray(jump_counts, dtype=float)
    if counts.sum() <= 0.0:
        return dict(jump_old)

    patterns = [(span, v) for span, v in sorted(visits.items()) if v > 0.0]
    if all(span == (-window, window) for span, _ in patterns):
        probs = counts / counts.sum()
        return {d: float(p) for d, p in zip(offsets, probs)}

    masks = []
    for (lo, hi), v in patterns:
        mask = np.zeros(len(offsets), dtype=bool)
        mask[lo + window : hi + window + 1] = True
        masks.append((mask, v))

    def negative_q(eta: np.ndarray) -> tuple[float, np.ndarray]:
        value = float(counts @ eta)
        grad = counts.copy()
        for mask, v in masks:
            sub = eta[mask]
            top = sub.max()
            weights = np.exp(sub - top)
            z = weights.sum()
            value -= v * (top + math.log(z))
            grad[mask] -= v * (weights / z)
        return -value, -grad

    eta0 = np.log(
        np.maximum(np.array([jump_old.get(d, 0.0) for d in offsets]), 1e-30)
    )
    result = minimize(negative_q, eta0, jac=True, method="L-BFGS-B")
    eta = result.x if negative_q(result.x)[0] <= negative_q(eta0)[0] else eta0
    weights = np.exp(eta - eta.max())
    probs = weights / weights.sum()
    return {d: float(p) for d, p in zip(offsets, probs)}


IterationHook = Callable[[int, int, int, float, LexicalTable, JumpTable], None]


def em_train(
    pairs: Sequence[SequencePair],
    schedule: TrainSchedule | None = None,
    source_vocab: Vocabulary | None = None,
    target_vocab: Vocabulary | None = None,
    epsilon: float = 1.0,
    on_iteration: IterationHook | None = None,
) -> AlignmentModel:
    """EM over a pair corpus following the window schedule.

    The returned model carries the per-iteration corpus log-likelihood trace;
    entry k is the likelihood of the model as it stood entering iteration k,
    so the trace is non-decreasing within every fixed-window stage.  The
    optional hook fires after each M-step with
    (stage, iteration, window, loglik, lexical, jump).
    """
    if not pairs:
        raise NoPairs("no training pairs")
    schedule = schedule or TrainSchedule()
    prepared = [_PreparedPair(src, tgt) for src, tgt in pairs]
    lexical = _cooccurrence_init(prepared)
    jump: JumpTable | None = None
    trace: list[float] = []
    for stage_idx, (window, iterations) in enumerate(schedule.stages):
        jump = _widen_jump(jump, window)
        for iteration in range(iterations):
            lex_counts: dict[str, dict[str, float]] = {}
            jump_counts = np.zeros(2 * window + 1)
            visits: dict[tuple[int, int], float] = {}
            trans_cache: dict[int, np.ndarray] = {}
            total_loglik = 0.0
            for prep in prepared:
                total_loglik += _accumulate_pair(
                    prep,
                    lexical,
                    trans_cache,
                    jump,
                    window,
                    epsilon,
                    lex_counts,
                    jump_counts,
                    visits,
                )
            lexical = _normalize_lexical(lex_counts)
            jump = _fit_jump(jump_counts, visits, jump, window)
            trace.append(total_loglik)
            if on_iteration is not None:
                on_iteration(
                    stage_idx, iteration, window, total_loglik, lexical, jump
                )
    return AlignmentModel(
        lexical=lexical,
        jump=jump if jump is not None else {0: 1.0},
        window=schedule.stages[-1][0],
        epsilon=epsilon,
        source_vocab=source_vocab,
        target_vocab=target_vocab,
        schedule=schedule,
        loglik_trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# wire format for decoded alignments
# ---------------------------------------------------------------------------


def alignment_to_record(alignment: PairwiseAlignment) -> dict:
    return {
        "dish_id": alignment.dish_id,
        "source_id": alignment.source_id,
        "target_id": alignment.target_id,
        "kind": alignment.kind,
        "labels": list(alignment.labels),
        "posteriors": list(alignment.posteriors),
    }


def alignment_from_record(record: dict) -> PairwiseAlignment:
    return PairwiseAlignment(
        source_id=record["source_id"],
        target_id=record["target_id"],
        labels=tuple(int(x) for x in record["labels"]),
        posteriors=tuple(float(x) for x in record["posteriors"]),
        dish_id=record.get("dish_id"),
        kind=record.get("kind"),
    )
