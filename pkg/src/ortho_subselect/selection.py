"""Randomized halving selection with exact certification.

The core loop draws independent +-1 signs over the surviving columns, keeps
the +1 half, and accepts the draw only if (a) the child cardinality lands in
the window [p/2 * (1 - 1/sqrt(p)), p/2] and (b) the exactly computed global
deviation of the child stays within the budget. Acceptance on the *global*
deviation makes every certificate sound by construction: no step is ever
kept on the strength of a probabilistic estimate alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySubset, InvalidEpsilon, RetriesExhausted, SizeOutOfRange
from .generators import coherence
from .linalg import OrthoRowMatrix, SubsetIndex, deviation, scaled_gram_extremes
from .parallel import run_indexed
from .rng import child_seed, make_rng

DEFAULT_MAX_RETRIES = 64
# Floor coefficient for the analytic stop ceil(kappa * t^2/eps^2 * n * ln n),
# pinned by the scaling study in the README; see select_subset.
DEFAULT_KAPPA = 0.25


@dataclass(frozen=True)
class HalvingStep:
    """One accepted halving: sizes, certified deviation, and the draw seed.

    retries_used counts the rejected draws before the accepted one, so 0
    means the first draw was accepted.
    """

    parent_size: int
    child_size: int
    deviation_after: float
    retries_used: int
    seed: int


@dataclass(frozen=True)
class SelectionTrace:
    steps: tuple[HalvingStep, ...]
    initial_m: int
    final_subset: SubsetIndex
    epsilon_target: float


@dataclass(frozen=True)
class IsometryCertificate:
    """Exact spectral certificate for one column subset.

    epsilon_achieved = max(lambda_max - 1, 1 - lambda_min) for the extreme
    eigenvalues of (M/|I|) A_I A_I^T; recomputable from (A, subset) alone.
    """

    n: int
    m: int
    subset: SubsetIndex
    lambda_min: float
    lambda_max: float
    epsilon_achieved: float
    coherence_t: float
    scale: float


def cardinality_window(parent_size: int) -> tuple[float, float]:
    """Admissible child-size interval for one halving of ``parent_size``."""
    half = parent_size / 2.0
    return half * (1.0 - 1.0 / math.sqrt(parent_size)), half


def halve_step(
    a: OrthoRowMatrix,
    parent: SubsetIndex,
    epsilon_budget: float,
    seed: int,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> tuple[SubsetIndex, HalvingStep]:
    """Draw sign splits of ``parent`` until one is accepted.

    Retry r uses the generator seeded by child_seed(seed, r). Draws whose
    child is empty, full, or outside the cardinality window count as
    retries, as do draws whose certified deviation exceeds the budget.
    Raises RetriesExhausted when no draw within ``max_retries`` passes both
    tests.
    """
    p = len(parent)
    if p < 2:
        raise SizeOutOfRange(f"cannot halve a subset of size {p}")
    if epsilon_budget < 0.0:
        raise InvalidEpsilon(f"budget must be >= 0, got {epsilon_budget}")
    lo, hi = cardinality_window(p)
    parent_arr = np.asarray(parent.indices, dtype=np.intp)
    for retry in range(max_retries):
        rng = make_rng(child_seed(seed, retry))
        keep = rng.integers(0, 2, size=p).astype(bool)  # sign +1 <=> keep
        size = int(keep.sum())
        if size < 1 or size < lo or size > hi:
            continue
        child = SubsetIndex(tuple(int(x) for x in parent_arr[keep]), parent.m)
        dev = deviation(a, child)
        if dev <= epsilon_budget:
            return child, HalvingStep(p, size, dev, retry, seed)
    raise RetriesExhausted(
        f"no accepted halving of a size-{p} subset in {max_retries} draws "
        f"(budget {epsilon_budget})"
    )


def size_floor(n: int, t: float, epsilon: float, kappa: float = DEFAULT_KAPPA) -> int:
    """Analytic stopping floor ceil(kappa * (t/epsilon)^2 * n * ln n)."""
    return math.ceil(kappa * (t * t) / (epsilon * epsilon) * n * math.log(n))


def select_subset(
    a: OrthoRowMatrix,
    epsilon: float,
    seed: int,
    max_retries: int = DEFAULT_MAX_RETRIES,
    min_size: int = 1,
    kappa: float = DEFAULT_KAPPA,
) -> tuple[IsometryCertificate, SelectionTrace]:
    """Repeat accepted halvings until no further halving is worthwhile.

    Stops when (a) a step exhausts its retries (the empirical signal that
    the budget is no longer reachable at the next size), (b) the subset has
    reached ``min_size``, or (c) another halving would undershoot the
    analytic floor ``size_floor``. Step k derives its seed as
    child_seed(seed, k). The returned certificate always satisfies
    epsilon_achieved <= epsilon because every accepted step re-verified the
    global deviation.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(f"epsilon must be in (0, 1), got {epsilon}")
    if min_size < 1:
        raise SizeOutOfRange(f"min_size must be >= 1, got {min_size}")
    report = coherence(a)
    floor = size_floor(a.n, report.t, epsilon, kappa)
    current = SubsetIndex.full(a.m)
    steps: list[HalvingStep] = []
    while len(current) > min_size and len(current) >= 2 and len(current) / 2.0 >= floor:
        try:
            current, step = halve_step(
                a, current, epsilon, child_seed(seed, len(steps)), max_retries
            )
        except RetriesExhausted:
            break
        steps.append(step)
    cert = certify(a, current)
    trace = SelectionTrace(tuple(steps), a.m, current, epsilon)
    return cert, trace


def certify(a: OrthoRowMatrix, i: SubsetIndex) -> IsometryCertificate:
    """Exact certificate for ``i``: eigen extremes of (M/|I|) A_I A_I^T."""
    if len(i) == 0:
        raise EmptySubset("cannot certify an empty subset")
    ext = scaled_gram_extremes(a, i)
    eps = max(ext.lambda_max - 1.0, 1.0 - ext.lambda_min)
    return IsometryCertificate(
        n=a.n,
        m=a.m,
        subset=i,
        lambda_min=ext.lambda_min,
        lambda_max=ext.lambda_max,
        epsilon_achieved=eps,
        coherence_t=coherence(a).t,
        scale=a.m / len(i),
    )


def uniform_baseline(
    a: OrthoRowMatrix, size: int, seed: int, trials: int
) -> list[IsometryCertificate]:
    """Certify ``trials`` uniformly random subsets of the given cardinality.

    Trial k draws from the generator seeded by child_seed(seed, k), so any
    parallel schedule reproduces the same per-trial certificates; trials run
    on the shared worker pool (ORTHO_SUBSELECT_THREADS).
    """
    if not 1 <= size <= a.m:
        raise SizeOutOfRange(f"size must be in 1..{a.m}, got {size}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def one_trial(trial: int) -> IsometryCertificate:
        rng = make_rng(child_seed(seed, trial))
        cols = np.sort(rng.choice(a.m, size=size, replace=False)) + 1
        return certify(a, SubsetIndex(tuple(int(c) for c in cols), a.m))

    return run_indexed(one_trial, trials)


def certificate_to_dict(cert: IsometryCertificate) -> dict:
    """Certificate in its normative JSON field order."""
    return {
        "n": cert.n,
        "M": cert.m,
        "subset": list(cert.subset.indices),
        "lambda_min": cert.lambda_min,
        "lambda_max": cert.lambda_max,
        "epsilon_achieved": cert.epsilon_achieved,
        "coherence_t": cert.coherence_t,
        "scale": cert.scale,
    }


def trace_to_dict(trace: SelectionTrace) -> dict:
    """Trace in its normative JSON field order."""
    return {
        "epsilon_target": trace.epsilon_target,
        "steps": [
            {
                "parent_size": s.parent_size,
                "child_size": s.child_size,
                "deviation_after": s.deviation_after,
                "retries_used": s.retries_used,
                "seed": s.seed,
            }
            for s in trace.steps
        ],
        "final_subset": list(trace.final_subset.indices),
    }
