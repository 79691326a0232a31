"""Command-line front end.

Subcommands: gen (write instance matrices), select (run the halving
selection), certify (recompute a certificate from scratch), study (scaling
sweeps to CSV), verify (estimator and property suites). Exit codes: 0
success/pass, 1 domain failure, 2 usage error. All randomness flows from
--seed through the documented stream-splitting rule, so identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import OrthoSubselectError
from .generators import coherence, gen_random_ortho, gen_trig, gen_walsh
from .jsonio import dumps, format_float, loads
from .linalg import OrthoRowMatrix, SubsetIndex, read_matrix_text, write_matrix_text
from .parallel import run_indexed
from .processes import (
    SubspaceBasis,
    check_ball_convexity,
    check_quasi_triangle,
    estimate_process,
    gaussian_sup_estimates,
    quasimetric_d,
    quasimetric_dtilde,
)
from .rng import child_seed, make_rng
from .selection import (
    DEFAULT_KAPPA,
    DEFAULT_MAX_RETRIES,
    certificate_to_dict,
    certify,
    select_subset,
    trace_to_dict,
)

CSV_HEADER = "n,M,trial,final_size,epsilon_achieved,steps,total_retries,ratio"

HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)
HALF_NORMAL_STD = math.sqrt(1.0 - 2.0 / math.pi)


@dataclass(frozen=True)
class StudyConfig:
    kind: str
    n_list: tuple[int, ...]
    m_factor: int
    epsilon: float
    trials: int
    seed: int
    kappa: float = DEFAULT_KAPPA

    def __post_init__(self):
        if not self.n_list or list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be nonempty and strictly ascending")
        if min(self.n_list) < 2:
            raise ValueError("study requires n >= 2 (ratio divides by n ln n)")
        if self.m_factor < 1:
            raise ValueError("m_factor must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class StudyRow:
    n: int
    m: int
    trial: int
    final_size: int
    epsilon_achieved: float
    steps: int
    total_retries: int
    ratio: float  # final_size / (n ln n)


def _generate(kind: str, n: int, m: int, seed: int) -> OrthoRowMatrix:
    if kind == "walsh":
        return gen_walsh(n, m)
    if kind == "trig":
        return gen_trig(n, m)
    if kind == "random":
        return gen_random_ortho(n, m, seed)
    raise ValueError(f"unknown generator kind {kind!r}")


def run_study(cfg: StudyConfig) -> list[StudyRow]:
    """One selection run per (n, trial); trials are schedule-independent."""
    matrices = {
        n: _generate(cfg.kind, n, cfg.m_factor * n, child_seed(cfg.seed, "matrix", n))
        for n in cfg.n_list
    }
    tasks = [(n, t) for n in cfg.n_list for t in range(cfg.trials)]

    def work(i: int) -> StudyRow:
        n, trial = tasks[i]
        a = matrices[n]
        cert, trace = select_subset(
            a, cfg.epsilon, child_seed(cfg.seed, n, trial), kappa=cfg.kappa
        )
        size = len(cert.subset)
        return StudyRow(
            n=n,
            m=a.m,
            trial=trial,
            final_size=size,
            epsilon_achieved=cert.epsilon_achieved,
            steps=len(trace.steps),
            total_retries=sum(s.retries_used for s in trace.steps),
            ratio=size / (n * math.log(n)),
        )

    return run_indexed(work, len(tasks))


def study_summary(cfg: StudyConfig, rows: list[StudyRow]) -> dict:
    per_n = []
    for n in cfg.n_list:
        ratios = [r.ratio for r in rows if r.n == n]
        finals = [r.final_size for r in rows if r.n == n]
        per_n.append(
            {
                "n": n,
                "M": cfg.m_factor * n,
                "median_ratio": float(statistics.median(ratios)),
                "median_final_size": float(statistics.median(finals)),
            }
        )
    medians = [e["median_ratio"] for e in per_n]
    return {
        "kind": cfg.kind,
        "epsilon": cfg.epsilon,
        "kappa": cfg.kappa,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "per_n": per_n,
        "median_ratio_min": min(medians),
        "median_ratio_max": max(medians),
        "median_ratio_spread": max(medians) / min(medians),
    }


def study_rows_to_csv(rows: list[StudyRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    str(r.n),
                    str(r.m),
                    str(r.trial),
                    str(r.final_size),
                    format_float(r.epsilon_achieved),
                    str(r.steps),
                    str(r.total_retries),
                    format_float(r.ratio),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def parse_subset_spec(spec: str, m: int) -> SubsetIndex:
    """Subset from a certificate/trace JSON path or an inline index list."""
    path = Path(spec)
    if path.exists():
        data = loads(path.read_text(encoding="ascii"))
        if isinstance(data, dict) and "subset" in data:
            arr = data["subset"]
        elif isinstance(data, dict) and "final_subset" in data:
            arr = data["final_subset"]
        elif isinstance(data, list):
            arr = data
        else:
            raise OrthoSubselectError(f"{spec}: no subset found in JSON")
    else:
        try:
            arr = [int(tok) for tok in spec.replace(",", " ").split()]
        except ValueError as exc:
            raise OrthoSubselectError(f"cannot parse subset {spec!r}") from exc
        if not arr:
            raise OrthoSubselectError("empty subset specification")
    return SubsetIndex.from_iterable(arr, m)


def cmd_gen(args) -> int:
    a = _generate(args.kind, args.n, args.M, args.seed)
    write_matrix_text(args.output, a.mat)
    report = coherence(a)
    print(
        dumps(
            {
                "kind": args.kind,
                "n": args.n,
                "M": args.M,
                "t": report.t,
                "argmax_column": report.argmax_column,
                "per_column_norms": list(report.per_column_norms),
            }
        )
    )
    return 0


def cmd_select(args) -> int:
    a = OrthoRowMatrix(read_matrix_text(args.input))
    cert, trace = select_subset(
        a,
        args.epsilon,
        args.seed,
        max_retries=args.max_retries,
        min_size=args.min_size,
        kappa=args.kappa,
    )
    Path(args.output).write_text(
        dumps(certificate_to_dict(cert)) + "\n", encoding="ascii"
    )
    if args.trace:
        Path(args.trace).write_text(
            dumps(trace_to_dict(trace)) + "\n", encoding="ascii"
        )
    print(f"|I|={len(cert.subset)} eps={format_float(cert.epsilon_achieved)}")
    return 0 if cert.epsilon_achieved <= args.epsilon else 1


def cmd_certify(args) -> int:
    a = OrthoRowMatrix(read_matrix_text(args.input))
    subset = parse_subset_spec(args.subset, a.m)
    cert = certify(a, subset)
    print(dumps(certificate_to_dict(cert)))
    return 0 if cert.epsilon_achieved <= args.epsilon else 1


def cmd_study(args) -> int:
    cfg = StudyConfig(
        kind=args.kind,
        n_list=tuple(args.n_list),
        m_factor=args.m_factor,
        epsilon=args.epsilon,
        trials=args.trials,
        seed=args.seed,
        kappa=args.kappa,
    )
    rows = run_study(cfg)
    Path(args.output).write_text(study_rows_to_csv(rows), encoding="ascii")
    print(dumps(study_summary(cfg, rows)))
    if any(r.epsilon_achieved > cfg.epsilon for r in rows):
        print("error: a trial certificate exceeded epsilon", file=sys.stderr)
        return 1
    return 0


def _property_line(check: str, samples: int, max_ratio: float, threshold: float,
                   passed: bool) -> dict:
    return {
        "check": check,
        "samples": samples,
        "max_ratio": max_ratio,
        "threshold": threshold,
        "pass": passed,
    }


def _verify_process(trials: int, seed: int) -> list[dict]:
    out = []
    fixture = SubspaceBasis.coordinate_span(64, 1)
    est = estimate_process(fixture, max(2, min(trials, 64)), child_seed(seed, "fixture"))
    out.append(
        {
            "check": "process_fixture_span_e1",
            "mean": est.mean,
            "std_error": est.std_error,
            "trials": est.trials,
            "Q": est.q,
            "bound_ratio": est.bound_ratio,
            "seed": est.seed,
        }
    )
    out.append(
        _property_line(
            "process_fixture_exact_mean",
            est.trials,
            abs(est.mean - 1.0),
            0.0,
            est.mean == 1.0,
        )
    )
    ratios = []
    for n, m in ((8, 128), (16, 256), (32, 512)):
        w = SubspaceBasis.from_ortho_rows(gen_walsh(n, m))
        est = estimate_process(w, trials, child_seed(seed, "grid", n, m))
        ratios.append(est.bound_ratio)
        out.append(
            {
                "check": f"process_walsh_n{n}_M{m}",
                "mean": est.mean,
                "std_error": est.std_error,
                "trials": est.trials,
                "Q": est.q,
                "bound_ratio": est.bound_ratio,
                "seed": est.seed,
            }
        )
    spread = max(ratios) / min(ratios)
    out.append(
        _property_line(
            "process_bound_ratio_stability", trials, spread, 2.0, spread < 2.0
        )
    )
    return out


def _verify_sudakov(trials: int, seed: int) -> list[dict]:
    out = []
    m = 64
    fixture = SubspaceBasis.coordinate_span(m, 1)
    se = HALF_NORMAL_STD / math.sqrt(trials)

    mean_inf, _ = gaussian_sup_estimates(fixture, None, trials, child_seed(seed, "inf"))
    gap = abs(mean_inf - HALF_NORMAL_MEAN) / se
    out.append(_property_line("sudakov_inf_span_e1", trials, gap, 3.0, gap <= 3.0))

    weights = [0.0] * m
    weights[0] = 1.0
    _, mean_w = gaussian_sup_estimates(
        fixture, weights, trials, child_seed(seed, "weighted")
    )
    gap_w = abs(mean_w - HALF_NORMAL_MEAN) / se
    out.append(
        _property_line("sudakov_weighted_span_e1", trials, gap_w, 3.0, gap_w <= 3.0)
    )

    _, mean_zero = gaussian_sup_estimates(
        fixture, [0.0] * m, trials, child_seed(seed, "zero")
    )
    out.append(
        _property_line(
            "sudakov_zero_weights", trials, mean_zero, 0.0, mean_zero == 0.0
        )
    )
    return out


def _sandwich_worst(samples: int, dim: int, seed: int) -> float:
    """Worst dtilde / (sqrt(2) d) over random pairs; must stay <= 1."""
    rng = make_rng(seed)
    worst = 0.0
    x = rng.standard_normal((samples, dim))
    y = rng.standard_normal((samples, dim))
    for a, b in zip(x, y):
        d = quasimetric_d(a, b)
        if d > 0.0:
            worst = max(worst, quasimetric_dtilde(a, b) / (math.sqrt(2.0) * d))
    return worst


def _verify_quasimetric(trials: int, seed: int) -> list[dict]:
    out = []
    for dim in (2, 8, 32):
        ratio = check_quasi_triangle(trials, dim, child_seed(seed, "triangle", dim))
        out.append(
            _property_line(
                f"quasi_triangle_dim{dim}", trials, ratio, 4.0, ratio <= 4.0
            )
        )
        pairs = max(1, trials // 10)
        worst = _sandwich_worst(pairs, dim, child_seed(seed, "sandwich", dim))
        out.append(
            _property_line(
                f"quasi_sandwich_dim{dim}", pairs, worst, 1.0, worst <= 1.0
            )
        )
    combos = max(1, trials // 10)
    ratio = check_ball_convexity(combos, 6, 0.3, child_seed(seed, "convexity"))
    out.append(
        _property_line("quasi_ball_convexity", combos, ratio, 4.0, ratio <= 4.0)
    )
    return out


def cmd_verify(args) -> int:
    suites = {
        "process": (_verify_process, 200),
        "sudakov": (_verify_sudakov, 10000),
        "quasimetric": (_verify_quasimetric, 100000),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    all_pass = True
    for name in names:
        fn, default_trials = suites[name]
        trials = args.trials if args.trials is not None else default_trials
        for line in fn(trials, child_seed(args.seed, name)):
            print(dumps(line))
            if line.get("pass") is False:
                all_pass = False
    return 0 if all_pass else 1


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ortho-subselect",
        description="Column-subset selection for orthonormal-row matrices "
        "with exact isometry certification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance matrix")
    p.add_argument("--kind", required=True, choices=("walsh", "trig", "random"))
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--M", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("select", help="run the halving selection")
    p.add_argument("--input", required=True)
    p.add_argument("--epsilon", required=True, type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-retries", type=int, default=DEFAULT_MAX_RETRIES)
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--output", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("certify", help="recompute a certificate from scratch")
    p.add_argument("--input", required=True)
    p.add_argument("--subset", required=True,
                   help="certificate/trace JSON path or index list '3,7,11'")
    p.add_argument("--epsilon", required=True, type=float)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("study", help="scaling sweep over n, CSV output")
    p.add_argument("--kind", required=True, choices=("walsh", "trig", "random"))
    p.add_argument("--n-list", required=True, type=_int_list)
    p.add_argument("--m-factor", required=True, type=int,
                   help="integer f in the size rule M = f*n")
    p.add_argument("--epsilon", required=True, type=float)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("verify", help="estimator and property suites")
    p.add_argument("--suite", required=True,
                   choices=("process", "sudakov", "quasimetric", "all"))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # OrthoSubselectError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
