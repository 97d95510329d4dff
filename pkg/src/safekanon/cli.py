"""Command-line entry point.

Exit codes: 0 success, 1 bad input file, 2 parameter out of range,
3 verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import figures, oracle
from .data import format_rows, read_dataset
from .errors import DomainError, ParseError, RecodingError
from .hierarchy import HierarchySpec, RecodingScheme
from .pipeline import esafe_publish, strongly_safe_publish
from .privacy import (
    amplify,
    delta_esafe,
    gamma,
    min_epsilon,
    solve_min_epsilon,
    solve_min_k,
    strongly_safe_bound,
)

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_CHECK = 0, 1, 2, 3

DEMO_D_MAX = 0.02
DEMO_D_PRIME_RANGE = (0.20, 0.30)


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    hierarchy: str | None = None
    levels: str | None = None
    candidates: str | None = None
    output: str | None = None
    report: str | None = None
    k: int | None = None
    beta: float | None = None
    epsilon: float | None = None
    epsilon1: float | None = None
    delta_max: float | None = None
    seed: int = 0
    n_max: int = 2000
    trials: int = 100_000
    figure: int | None = None
    kind: str | None = None
    delta1: float | None = None
    beta1: float | None = None
    beta2: float | None = None
    ratio: float | None = None
    m_per_gender: int = 1000
    threshold: int = 100

    def validate(self) -> None:
        if self.k is not None and self.k < 1:
            raise DomainError(f"--k must be >= 1, got {self.k}")
        if self.beta is not None and not 0 < self.beta < 1:
            raise DomainError(f"--beta must lie in (0, 1), got {self.beta}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise DomainError(f"--epsilon must be positive, got {self.epsilon}")
        if self.epsilon1 is not None and self.epsilon1 < 0:
            raise DomainError(f"--epsilon1 must be >= 0, got {self.epsilon1}")
        if self.delta_max is not None and not self.delta_max > 0:
            raise DomainError(f"--delta-max must be positive, got {self.delta_max}")
        if self.n_max < 1:
            raise DomainError(f"--n-max must be >= 1, got {self.n_max}")
        if self.trials < 1:
            raise DomainError(f"--trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise DomainError(f"--seed must be >= 0, got {self.seed}")
        if self.ratio is not None and not 0 < self.ratio <= 1:
            raise DomainError(f"--ratio must lie in (0, 1], got {self.ratio}")

    def need(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            flags = ", ".join("--" + n.replace("_", "-") for n in missing)
            raise DomainError(f"{self.command} requires {flags}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def cmd_calc_delta(cfg: RunConfig) -> int:
    cfg.need("k", "beta", "epsilon")
    eps1 = cfg.epsilon1 or 0.0
    if eps1 > 0:
        delta = delta_esafe(cfg.k, cfg.beta, cfg.epsilon, eps1)
        bound = strongly_safe_bound(cfg.k, cfg.beta, max(cfg.epsilon - eps1, min_epsilon(cfg.beta)))
    else:
        bound = strongly_safe_bound(cfg.k, cfg.beta, cfg.epsilon)
        delta = bound.delta
    print(_dump({
        "delta": delta,
        "argmax_n": bound.argmax_n,
        "gamma": gamma(cfg.epsilon - eps1, cfg.beta),
        "min_epsilon": min_epsilon(cfg.beta) + eps1,
        "k": cfg.k, "beta": cfg.beta, "epsilon": cfg.epsilon, "epsilon1": eps1,
        "cap_reached": bound.capped,
    }))
    return EXIT_OK


def cmd_amplify(cfg: RunConfig) -> int:
    cfg.need("epsilon1", "delta1", "beta1", "beta2")
    amp = amplify(cfg.epsilon1, cfg.delta1, cfg.beta1, cfg.beta2)
    print(_dump({"epsilon2": amp.epsilon2, "delta2": amp.delta2, "ratio": amp.ratio}))
    return EXIT_OK


def cmd_solve(cfg: RunConfig) -> int:
    cfg.need("beta", "delta_max")
    if cfg.k is not None:
        eps = solve_min_epsilon(cfg.k, cfg.beta, cfg.delta_max)
        print(_dump({"k": cfg.k, "beta": cfg.beta, "delta_max": cfg.delta_max,
                     "epsilon": eps, "satisfiable": eps is not None}))
    else:
        cfg.need("epsilon")
        k = solve_min_k(cfg.beta, cfg.epsilon, cfg.delta_max)
        print(_dump({"epsilon": cfg.epsilon, "beta": cfg.beta, "delta_max": cfg.delta_max,
                     "k": k, "satisfiable": k is not None}))
    return EXIT_OK


def cmd_table2(cfg: RunConfig) -> int:
    sys.stdout.write(figures.table2_csv())
    return EXIT_OK


def cmd_figure_data(cfg: RunConfig) -> int:
    cfg.need("figure")
    if cfg.figure not in figures.FIGURES:
        raise DomainError(f"unknown figure {cfg.figure}; choose from {figures.FIGURES}")
    sys.stdout.write(figures.figure_csv(cfg.figure))
    return EXIT_OK


def cmd_anonymize(cfg: RunConfig) -> int:
    cfg.need("input", "hierarchy", "output", "k", "beta")
    if (cfg.levels is None) == (cfg.candidates is None):
        raise DomainError("anonymize needs exactly one of --levels or --candidates")
    if cfg.candidates is not None and not cfg.epsilon1:
        raise DomainError("--candidates requires --epsilon1 > 0")
    h = HierarchySpec.read(cfg.hierarchy)
    d = read_dataset(cfg.input)
    eps1 = cfg.epsilon1 if cfg.candidates is not None else 0.0
    epsilon = cfg.epsilon
    if epsilon is None and cfg.delta_max is not None:
        eps0 = solve_min_epsilon(cfg.k, cfg.beta, cfg.delta_max)
        if eps0 is None:
            raise DomainError(f"no epsilon <= 10 reaches delta <= {cfg.delta_max}")
        epsilon = eps0 + eps1
    if cfg.candidates is None:
        g = RecodingScheme.parse(cfg.levels, h)
        release = strongly_safe_publish(d, g, h, cfg.k, cfg.beta, cfg.seed, epsilon=epsilon)
    else:
        cands = [RecodingScheme.parse(c, h) for c in cfg.candidates.split(";") if c.strip()]
        release = esafe_publish(d, h, cands, eps1, cfg.k, cfg.beta, cfg.seed, epsilon=epsilon)
    Path(cfg.output).write_text(format_rows(d.columns, release.data.rows()), encoding="utf-8")
    text = _dump(release.report) + "\n"
    if cfg.report:
        Path(cfg.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    kind = cfg.kind
    if kind == "oracle":
        cfg.need("k", "beta", "epsilon")
        result = oracle.verify_strongly_safe(cfg.k, cfg.beta, cfg.epsilon, cfg.n_max)
    elif kind == "amplification":
        cfg.need("k", "beta", "ratio", "epsilon")
        result = oracle.verify_amplification(cfg.k, cfg.beta, cfg.ratio, cfg.epsilon, cfg.n_max)
    elif kind == "postprocess":
        result = oracle.check_postprocessing(min(cfg.trials, 100_000), cfg.seed)
    elif kind == "convexity":
        result = oracle.check_convexity(min(cfg.trials, 100_000), cfg.seed)
    else:
        raise DomainError(f"unknown check {kind!r}")
    print(_dump(result))
    return EXIT_OK if result["pass"] else EXIT_CHECK


def cmd_demo_compose(cfg: RunConfig) -> int:
    beta = 0.5 if cfg.beta is None else cfg.beta
    eps2 = 1.0 if cfg.epsilon is None else cfg.epsilon
    p_d, p_dp = oracle.compose_attack_demo(cfg.m_per_gender, cfg.threshold, beta, eps2, cfg.trials, cfg.seed)
    # 5 standard errors of a proportion near 1/4
    half_width = 5 * math.sqrt(0.25 * 0.75 / cfg.trials)
    out = {
        "params": {"m_per_gender": cfg.m_per_gender, "threshold": cfg.threshold, "beta": beta,
                   "eps2": eps2, "trials": cfg.trials, "seed": cfg.seed},
        "noise_scale": 1.0 / (eps2 * beta * 2 * cfg.m_per_gender) if cfg.m_per_gender else 1.0 / eps2,
        "p_event_D": p_d,
        "p_event_D_prime": p_dp,
        "tolerance": {"D_max": DEMO_D_MAX, "D_prime_range": list(DEMO_D_PRIME_RANGE)},
        "within_tolerance": p_d <= DEMO_D_MAX and DEMO_D_PRIME_RANGE[0] <= p_dp <= DEMO_D_PRIME_RANGE[1],
        "standard_error_5x": half_width,
    }
    if half_width > 0.05:
        out["note"] = "few trials: estimates are too noisy to compare with the tolerances"
    print(_dump(out))
    return EXIT_OK


COMMANDS = {
    "calc-delta": cmd_calc_delta,
    "amplify": cmd_amplify,
    "solve": cmd_solve,
    "table2": cmd_table2,
    "figure": cmd_figure_data,
    "anonymize": cmd_anonymize,
    "verify": cmd_verify,
    "demo-compose": cmd_demo_compose,
}


def _finite(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="safekanon", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, *flags):
        p = sub.add_parser(name, help=help_)
        for flag in flags:
            flag(p)
        return p

    k = lambda p: p.add_argument("--k", type=int)
    beta = lambda p: p.add_argument("--beta", type=_finite)
    eps = lambda p: p.add_argument("--epsilon", type=_finite)
    eps1 = lambda p: p.add_argument("--epsilon1", type=_finite)
    dmax = lambda p: p.add_argument("--delta-max", type=_finite)
    seed = lambda p: p.add_argument("--seed", type=int, default=0)
    n_max = lambda p: p.add_argument("--n-max", type=int, default=2000)
    trials = lambda p: p.add_argument("--trials", type=int, default=100_000)

    add("calc-delta", "delta for strongly-safe (or eps1-safe) k-anonymization", k, beta, eps, eps1)
    p = add("amplify", "parameters after lowering the sampling rate", eps1)
    p.add_argument("--delta1", type=_finite)
    p.add_argument("--beta1", type=_finite)
    p.add_argument("--beta2", type=_finite)
    add("solve", "least epsilon (given --k) or least k (given --epsilon) meeting --delta-max",
        k, beta, eps, dmax)
    add("table2", "delta grid at k=20")
    p = add("figure", "figure data as CSV")
    p.add_argument("--figure", type=int)
    p = add("anonymize", "sample, generalize and suppress a CSV file", k, beta, eps, eps1, dmax, seed)
    for flag in ("--input", "--hierarchy", "--levels", "--candidates", "--output", "--report"):
        p.add_argument(flag)
    p = add("verify", "run an oracle check", k, beta, eps, seed, n_max, trials)
    p.add_argument("kind", choices=["oracle", "amplification", "postprocess", "convexity"])
    p.add_argument("--ratio", type=_finite)
    p.set_defaults(trials=500)
    p = add("demo-compose", "Monte-Carlo composition counterexample", beta, eps, seed, trials)
    p.add_argument("--m-per-gender", type=int, default=1000)
    p.add_argument("--threshold", type=int, default=100)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ParseError, RecodingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
