"""Command-line front end: constants, corpus verification, sweeps, search.

Exit codes: 0 success (or report mode), 1 a verification failed, 2 malformed
input, 3 invalid parameters.  All structured output (JSON reports, CSV) goes
to stdout or --out; stderr carries diagnostics only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._rat import INF, frac
from .corpus import (
    gen_cellset,
    gen_coefficients,
    gen_function,
    gen_sparse,
    gen_weight,
)
from .errors import (
    HypothesisError,
    MalformedInputError,
    NormalizationError,
    ParameterError,
    SparselabError,
    VerificationError,
)
from .gridfn import GridFunction, MeasureSpec, kolmogorov_check, kolmogorov_subset
from .lattice import SHIFTS
from .maximal import n_weak_check
from .pipelines import (
    TheoremParams,
    extremal_search,
    log_sweep,
    normalize_for,
    prop31_check,
    prop32_check,
    search_csv,
    sweep_csv,
    thm_a_verify,
    thm_c_verify,
)
from .reports import json_ready, stable_json
from .sparse import SparseCollection, carleson_sum, magic_selection
from .weights import Weight, WeightCharacteristics, generate_weight, parse_kind

_MASK64 = (1 << 64) - 1


@dataclass
class RunConfig:
    seed: int
    L: int
    trials: int
    tol: float
    mode: str
    output: str | None

    def __post_init__(self) -> None:
        self.seed &= _MASK64
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if self.mode not in ("assert", "report"):
            raise ParameterError(f"mode must be assert|report, got {self.mode!r}")
        if self.L < 0:
            raise ParameterError(f"L must be >= 0, got {self.L}")


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _workers() -> int:
    env = os.environ.get("SPARSELAB_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ParameterError(f"SPARSELAB_THREADS must be an integer, got {env!r}")
        return max(1, cap)
    return min(8, os.cpu_count() or 1)


def _load_weight(spec: str, seed: int, L: int) -> Weight:
    """A weight from a JSON file (path) or a generator spec string."""
    if os.path.exists(spec) or spec.endswith(".json"):
        try:
            with open(spec, encoding="utf-8") as fh:
                obj = json.load(fh)
        except FileNotFoundError:
            raise MalformedInputError(f"no such weight file: {spec}")
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"malformed weight JSON in {spec}: {exc}")
        return Weight.from_json(obj)
    name, kwargs = parse_kind(spec)
    return generate_weight(name, seed, L, **kwargs)


# ---------------------------------------------------------------------------
# Subcommand: constants
# ---------------------------------------------------------------------------


_FAMILIES = {
    "dyadic": "dyadic-three-grids",
    "intervals": "all-lattice-intervals",
}


def cmd_constants(args) -> int:
    cfg = _config(args)
    w = _load_weight(args.weight, cfg.seed, cfg.L)
    family = _FAMILIES.get(args.family, args.family)
    try:
        chars = WeightCharacteristics(w, family)
    except ValueError:
        raise ParameterError(
            f"unknown family {args.family!r}; choose dyadic or intervals"
        )
    out = chars.to_json()
    for p in args.ap or []:
        out[f"ap({p})"] = float(chars.ap(frac(p)))
    out["witness"] = json_ready(chars.witnesses)
    _emit(stable_json(out), cfg.output)
    return 0


# ---------------------------------------------------------------------------
# Subcommand: verify
# ---------------------------------------------------------------------------


def _theta_params(theta: Fraction) -> TheoremParams:
    if theta == 0:
        return TheoremParams(1, INF, 1)
    return TheoremParams(theta.numerator, theta.denominator, 1)


_KOL_EXPONENTS = [(2, 1), (2, Fraction(3, 2)), (3, 1), (4, 2)]


def _trial_kolmogorov(cfg: RunConfig, i: int, args) -> dict:
    f = gen_function(cfg.seed, cfg.L, i, density=0.9)
    w = gen_weight(cfg.seed, cfg.L, i)
    mu = MeasureSpec(w.density) if i % 2 else MeasureSpec()
    E = gen_cellset(cfg.seed, cfg.L, i)
    p, theta = _KOL_EXPONENTS[i % len(_KOL_EXPONENTS)]
    rep = kolmogorov_check(f, mu, E, p, theta, cfg.tol)
    _, sub = kolmogorov_subset(f, mu, E, p, theta, cfg.tol)
    ok = rep.passed and sub.passed
    return {
        "trial": i,
        "pass": ok,
        "step": None if ok else (rep.name if not rep.passed else "kolmogorov-subset"),
        "report": rep.to_json(),
        "subset": sub.to_json(),
    }


def _trial_magic(cfg: RunConfig, i: int, args) -> dict:
    theta = frac(args.theta if args.theta is not None else 0)
    S = gen_sparse(cfg.seed, cfg.L, i, _theta_params(theta), target=args.size)
    f = gen_function(cfg.seed, cfg.L, i, density=0.95)
    w = gen_weight(cfg.seed, cfg.L, i)
    # aim the level at a member average so selections are often nonempty
    alpha = S.shifts()[0]
    members = S.intervals(alpha)
    Q = members[i % len(members)]
    base = f.avg(Q)
    lam = base / 2 if base > 0 else Fraction(1, 16)
    _, _, rep = magic_selection(S, f, w, lam, theta)
    return {"trial": i, "pass": rep.passed,
            "step": None if rep.passed else rep.name, "report": rep.to_json()}


def _trial_nweak(cfg: RunConfig, i: int, args) -> dict:
    theta = float(args.theta) if args.theta is not None else [0.0, 0.25, 0.5, 0.9][i % 4]
    f = gen_function(cfg.seed, cfg.L, i, density=0.9)
    w = gen_weight(cfg.seed, cfg.L, i)
    rep = n_weak_check(f, w, theta, SHIFTS[i % 3], cfg.tol)
    return {"trial": i, "pass": rep.passed,
            "step": None if rep.passed else rep.name, "report": rep.to_json()}


def _trial_carleson(cfg: RunConfig, i: int, args) -> dict:
    S = gen_sparse(cfg.seed, cfg.L, i, None, target=args.size)
    w = gen_weight(cfg.seed, cfg.L, i)
    alpha = S.shifts()[0]
    nodes, parent, _ = S.forest(alpha)
    roots = [q for q in nodes if parent[q] is None]
    Q0 = roots[i % len(roots)]
    total, bound, ratio = carleson_sum(S, w, Q0)
    ok = total <= bound
    return {
        "trial": i,
        "pass": ok,
        "step": None if ok else "carleson-packing",
        "report": json_ready(
            {"name": "carleson-packing", "lhs": total, "rhs": bound,
             "ratio": float(ratio), "pass": ok, "Q0": Q0.to_json()}
        ),
    }


def _trial_prop32(cfg: RunConfig, i: int, args) -> dict:
    S0 = gen_sparse(cfg.seed, cfg.L, i, None, target=args.size)
    S = SparseCollection(S0.L, Fraction(1, 2), S0.grids)
    f = gen_function(cfg.seed, cfg.L, i, density=0.9)
    w = gen_weight(cfg.seed, cfg.L, i)
    rep = prop32_check(S, f, args.t, w, mode=cfg.mode, tol=cfg.tol)
    return {"trial": i, "pass": rep.passed,
            "step": None if rep.passed else rep.name, "report": rep.to_json()}


def _trial_prop31(cfg: RunConfig, i: int, args) -> dict:
    S = gen_sparse(cfg.seed, cfg.L, i, None, target=args.size)
    a = gen_coefficients(cfg.seed, cfg.L, i, S)
    w = gen_weight(cfg.seed, cfg.L, i)
    rep = prop31_check(S, a, args.t1, args.t2, w, mode=cfg.mode, tol=cfg.tol)
    return {"trial": i, "pass": rep.passed,
            "step": None if rep.passed else rep.name, "report": rep.to_json()}


def _trial_thm_a(cfg: RunConfig, i: int, args) -> dict:
    w = gen_weight(cfg.seed, cfg.L, i)
    f = normalize_for(gen_function(cfg.seed, cfg.L, i, density=0.9), w, 1)
    S = gen_sparse(cfg.seed, cfg.L, i, None, target=args.size)
    E = gen_cellset(cfg.seed, cfg.L, i)
    trace = thm_a_verify(w, f, S, E, cfg.tol)
    bad = None if trace.green else trace.failing_steps()[0]
    return {"trial": i, "pass": trace.green, "step": bad,
            "final_ratio": trace.summary["final_ratio"], "trace": trace.to_json()}


def _trial_thm_c(cfg: RunConfig, i: int, args) -> dict:
    params = _parse_params(args.params)
    w = gen_weight(cfg.seed, cfg.L, i)
    f = normalize_for(gen_function(cfg.seed, cfg.L, i, density=0.9), w, params.r)
    S = gen_sparse(cfg.seed, cfg.L, i, params, target=args.size)
    E = gen_cellset(cfg.seed, cfg.L, i)
    trace = thm_c_verify(w, params, f, S, E, cfg.tol)
    bad = None if trace.green else trace.failing_steps()[0]
    return {"trial": i, "pass": trace.green, "step": bad,
            "final_ratio": trace.summary["final_ratio"], "trace": trace.to_json()}


_TRIALS = {
    "kolmogorov": _trial_kolmogorov,
    "magic": _trial_magic,
    "nweak": _trial_nweak,
    "carleson": _trial_carleson,
    "prop31": _trial_prop31,
    "prop32": _trial_prop32,
    "thm-a": _trial_thm_a,
    "thm-c": _trial_thm_c,
}


def _parse_params(spec: str) -> TheoremParams:
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 3:
        raise MalformedInputError(f"--params wants 'r,s,q', got {spec!r}")
    s = INF if parts[1] in ("inf", "oo") else Fraction(parts[1])
    return TheoremParams(Fraction(parts[0]), s, Fraction(parts[2]))


def cmd_verify(args) -> int:
    cfg = _config(args)
    runner = _TRIALS[args.target]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        rows = list(pool.map(lambda i: runner(cfg, i, args), range(cfg.trials)))
    failures = [r for r in rows if not r["pass"]]
    summary = {
        "target": args.target,
        "trials": cfg.trials,
        "passed": cfg.trials - len(failures),
        "failed": len(failures),
    }
    ratios = [r["final_ratio"] for r in rows if "final_ratio" in r]
    if ratios:
        summary["max_final_ratio"] = max(ratios)
    report = {
        "config": {"seed": cfg.seed, "L": cfg.L, "tol": cfg.tol, "mode": cfg.mode},
        "summary": summary,
        "trials": rows if args.full else [
            {k: r[k] for k in r if k not in ("trace",)} for r in rows
        ],
    }
    _emit(stable_json(json_ready(report)), cfg.output)
    if failures and cfg.mode == "assert":
        first = failures[0]
        sys.stderr.write(
            f"verify {args.target}: trial {first['trial']} (seed {cfg.seed}) "
            f"failed at step {first['step']!r}\n"
        )
        return 1
    return 0


# ---------------------------------------------------------------------------
# Subcommands: sweep, search, gen
# ---------------------------------------------------------------------------


def _power_family(eps: float, seed: int, L: int) -> Weight:
    # fw grows like 1/(1+beta) as beta -> -1; eps = 1 + beta
    return generate_weight("power", seed, L, beta=frac(eps - 1.0))


def cmd_sweep(args) -> int:
    cfg = _config(args)
    eps_list = [float(x) for x in args.eps.split(",") if x]
    if not eps_list:
        raise MalformedInputError("--eps wants a comma-separated list of values in (0, 1]")
    for e in eps_list:
        if not 0.0 < e <= 1.0:
            raise ParameterError(f"eps values must lie in (0, 1], got {e}")
    rows = log_sweep(
        _power_family,
        eps_list,
        lambda seed, L, index: gen_sparse(seed, L, index, None, target=args.size),
        lambda seed, L, index: gen_function(seed, L, index, density=0.9),
        L=cfg.L,
        seed=cfg.seed,
        trials=cfg.trials,
    )
    _emit(sweep_csv(rows), cfg.output)
    return 0


def cmd_search(args) -> int:
    cfg = _config(args)
    kwargs = {}
    if args.params:
        kwargs["params"] = _parse_params(args.params)
    res = extremal_search(
        args.objective, cfg.seed, args.iters, L=cfg.L, t=args.t, **kwargs
    )
    _emit(search_csv(res.trajectory), cfg.output)
    if args.save_state:
        with open(args.save_state, "w", encoding="utf-8") as fh:
            fh.write(stable_json(res.to_json()))
    return 0


def cmd_gen(args) -> int:
    cfg = _config(args)
    i = args.index
    if args.what == "weight":
        obj = gen_weight(cfg.seed, cfg.L, i, kind=args.kind).to_json()
    elif args.what == "function":
        obj = gen_function(cfg.seed, cfg.L, i).to_json()
    elif args.what == "sparse":
        params = _parse_params(args.params) if args.params else None
        obj = gen_sparse(cfg.seed, cfg.L, i, params, target=args.size).to_json()
    elif args.what == "cells":
        obj = [int(c) for c in gen_cellset(cfg.seed, cfg.L, i)]
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown object {args.what!r}")
    _emit(stable_json(json_ready(obj)), cfg.output)
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def _config(args) -> RunConfig:
    return RunConfig(
        seed=args.seed,
        L=args.L,
        trials=args.trials,
        tol=args.tol,
        mode=args.mode,
        output=args.out,
    )


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="sparselab",
        description="verify weighted weak-type bounds for sparse averaging forms",
    )
    top.set_defaults(seed=0, L=6, trials=8, tol=1e-9, mode="assert", out=None)
    # the same run-config flags parse before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    for parser, dflt in ((top, False), (common, True)):
        parser.add_argument("--seed", type=int, default=S, help="64-bit master seed")
        parser.add_argument("--L", type=int, default=S,
                            help="grid resolution (3·2^L cells)")
        parser.add_argument("--trials", type=int, default=S,
                            help="number of seeded instances")
        parser.add_argument("--tol", type=float, default=S, help="relative tolerance")
        parser.add_argument("--mode", choices=("assert", "report"), default=S)
        parser.add_argument("--out", default=S, help="write output to this file")
    sub = top.add_subparsers(dest="command", required=True)

    p_const = sub.add_parser("constants", parents=[common],
                             help="weight characteristics as JSON")
    p_const.add_argument("--weight", required=True,
                         help="weight JSON file or generator spec, e.g. 'power(-0.5)'")
    p_const.add_argument("--family", default="dyadic", help="dyadic | intervals")
    p_const.add_argument("--ap", action="append", default=None, metavar="P",
                         help="also emit the p-characteristic (repeatable)")
    p_const.set_defaults(fn=cmd_constants)

    p_verify = sub.add_parser("verify", parents=[common], help="run a seeded verification corpus")
    p_verify.add_argument("target", choices=sorted(_TRIALS))
    p_verify.add_argument("--theta", default=None,
                          help="exponent for magic/nweak targets, e.g. 1/2")
    p_verify.add_argument("--t", type=float, default=2.0, help="power for prop32")
    p_verify.add_argument("--t1", type=float, default=1.0, help="left power for prop31")
    p_verify.add_argument("--t2", type=float, default=2.0, help="right power for prop31")
    p_verify.add_argument("--params", default="1,inf,1",
                          help="r,s,q for thm-c (s may be 'inf')")
    p_verify.add_argument("--target-size", dest="size", type=int, default=48,
                          help="collection size cap")
    p_verify.add_argument("--full", action="store_true",
                          help="include complete per-trial traces in the report")
    p_verify.set_defaults(fn=cmd_verify)

    p_sweep = sub.add_parser("sweep", parents=[common], help="measured ratio vs bound along a weight family")
    p_sweep.add_argument("--eps", default="0.5,0.1,0.01,0.001",
                         help="comma-separated family parameters in (0, 1]")
    p_sweep.add_argument("--target-size", dest="size", type=int, default=48)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_search = sub.add_parser("search", parents=[common], help="simulated-annealing ratio ascent")
    p_search.add_argument("--objective", default="thm-a-ratio",
                          choices=("thm-a-ratio", "thm-c-ratio", "prop32-ratio"))
    p_search.add_argument("--iters", type=int, default=200)
    p_search.add_argument("--t", type=float, default=2.0, help="power for prop32-ratio")
    p_search.add_argument("--params", default=None, help="r,s,q for thm-c-ratio")
    p_search.add_argument("--save-state", default=None,
                          help="also write the best configuration as JSON here")
    p_search.set_defaults(fn=cmd_search)

    p_gen = sub.add_parser("gen", parents=[common], help="emit one corpus object as JSON")
    p_gen.add_argument("what", choices=("weight", "function", "sparse", "cells"))
    p_gen.add_argument("--index", type=int, default=0)
    p_gen.add_argument("--kind", default=None, help="weight kind override")
    p_gen.add_argument("--params", default=None, help="r,s,q budget for sparse")
    p_gen.add_argument("--target-size", dest="size", type=int, default=32)
    p_gen.set_defaults(fn=cmd_gen)
    return top


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (VerificationError, HypothesisError, NormalizationError) as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        return 1
    except MalformedInputError as exc:
        sys.stderr.write(f"malformed input: {exc}\n")
        return 2
    except ParameterError as exc:
        sys.stderr.write(f"invalid parameters: {exc}\n")
        return 3
    except SparselabError as exc:  # residual library errors count as malformed runs
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
