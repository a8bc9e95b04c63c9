"""Command-line interface: ``wshift weights | check | repro | fhc-vector``.

Exit codes: 0 certified-true (or success), 3 certified-false or failed
precondition, 4 inconclusive, 2 usage and parse errors. Every non-zero
exit writes a structured JSON diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .constructions import (a_set_truncated, example8_k_sequence, example8_weights, example_a_set,
                            geometric_markers, menet_c_rule, menet_marker, menet_weights,
                            verify_example8_conditions, verify_menet_identities)
from .criteria import (CERTIFIED_FALSE, CERTIFIED_TRUE, CRule, KSequence, Verdict, check_fhc_subspace,
                       check_frequent_hypercyclicity, check_hypercyclic, check_hypercyclic_subspace,
                       check_no_fhc_subspace, constant_c_rule, explicit_k_sequence, orbit_counts)
from .density import CSV_HEADER, density_profile, intersect_g_sets
from .errors import PreconditionError, SpecParseError, WShiftError
from .fhc_vector import TargetSet, build_fhc_candidate, build_separated_family, criterion_conditions_check, visit_report
from .report import SCHEMA_VERSION, csv_table, dumps, flatten, plain
from .specfile import builtin_spec, load_spec
from .weights import PrefixTable, WeightSpec

log = logging.getLogger("wshift")

EXIT_OK, EXIT_USAGE, EXIT_FALSE, EXIT_INCONCLUSIVE = 0, 2, 3, 4
STATUS_EXIT = {CERTIFIED_TRUE: EXIT_OK, CERTIFIED_FALSE: EXIT_FALSE}
CRITERIA = ("fhc", "hc-subspace", "no-fhc-subspace", "fhc-subspace", "hypercyclic")

DEFAULT_K = 10 ** 5
DEFAULT_N = 10 ** 6
DEFAULT_NO_FHC_HORIZON = 10 ** 4
DEFAULT_SPACING = 8


class UsageError(WShiftError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


@dataclass
class RunConfig:
    """Every option of every subcommand; ``None`` means "use the default"."""

    command: Optional[str] = None
    target: Optional[str] = None
    spec: Optional[str] = None
    builtin: Optional[str] = None
    base: Optional[int] = None
    p: Optional[str] = None
    horizon: Optional[int] = None
    N: Optional[int] = None
    K: Optional[int] = None
    horizon_n: Optional[int] = None
    horizon_k: Optional[int] = None
    n_max: Optional[int] = None
    C: Optional[str] = None
    k_seq: Optional[str] = None
    delta: Optional[str] = None
    rho: Optional[str] = None
    tau: Optional[str] = None
    epsilon: Optional[str] = None
    L: Optional[int] = None
    spacing: Optional[int] = None
    block_length: Optional[int] = None
    format: Optional[str] = None
    exact: Optional[bool] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    candidate_out: Optional[str] = None

    def validate(self) -> None:
        for name in ("horizon", "N", "K", "horizon_n", "horizon_k", "n_max", "L", "spacing", "block_length"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise UsageError(f"{name} must be >= 1, got {v}", name)
        for name in ("delta", "rho", "tau", "epsilon"):
            v = getattr(self, name)
            if v is not None and _rational(v, name) <= 0:
                raise UsageError(f"{name} must be positive, got {v}", name)
        if self.p is not None and _rational(self.p, "p") < 1:
            raise UsageError(f"p must be >= 1, got {self.p}", "p")
        if self.spec and self.builtin:
            raise UsageError("give either --spec or --builtin, not both", "spec")

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None and k not in ("out", "candidate_out")}


CONFIG_FIELDS = {f.name for f in fields(RunConfig)} - {"command", "target"}


def _rational(text: Any, name: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{name} must be a number, got {text!r}", name) from None


def _p(cfg: RunConfig):
    q = _rational(cfg.p or "1", "p")
    return int(q) if q.denominator == 1 else float(q)


def _float(cfg: RunConfig, name: str, default: str) -> float:
    v = getattr(cfg, name)
    return float(_rational(v if v is not None else default, name))


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("weight spec")
    src.add_argument("--spec", help="path of a JSON weight-spec file")
    src.add_argument("--builtin", help="builtin spec: menet, block4-geometric (alias example8)")
    src.add_argument("--base", type=int, help="base of the block4-geometric markers (default 3)")
    num = common.add_argument_group("parameters")
    num.add_argument("--p", help="exponent p >= 1 of l^p (default 1)")
    num.add_argument("--horizon", type=int, help=f"prefix-table / criterion horizon K (default {DEFAULT_K})")
    num.add_argument("--N", type=int, help=f"orbit horizon (default {DEFAULT_N})")
    num.add_argument("--K", type=int, help="number of weights listed by 'weights' (default 20)")
    num.add_argument("--horizon-n", dest="horizon_n", type=int, help="hc-subspace: largest n (default 200)")
    num.add_argument("--horizon-k", dest="horizon_k", type=int, help="hc-subspace: largest k (default 200)")
    num.add_argument("--n-max", dest="n_max", type=int, help="repro: identity range")
    num.add_argument("--C", help="C-rule ('menet' or a constant) for no-fhc-subspace; constant C for fhc-subspace")
    num.add_argument("--k-seq", dest="k_seq", help="fhc-subspace indices: 'block4-markers' or comma list")
    num.add_argument("--delta", help="no-fhc-subspace ratio gap (default 0.05)")
    num.add_argument("--rho", help="fhc-subspace minimum density (default 0.1)")
    num.add_argument("--tau", help="borderline tolerance recorded with the run (default 1e-9)")
    num.add_argument("--epsilon", help="visit radius (default 0.1)")
    num.add_argument("--L", type=int, help="fhc-vector: number of targets (default 3)")
    num.add_argument("--spacing", type=int, help=f"fhc-vector: family stride multiplier (default {DEFAULT_SPACING})")
    num.add_argument("--block-length", dest="block_length", type=int, help="fhc-vector: family block length")
    num.add_argument("--seed", type=int, help="seed for randomized sweeps (recorded)")
    io = common.add_argument_group("output")
    io.add_argument("--format", choices=("json", "csv", "text"))
    io.add_argument("--exact", action=argparse.BooleanOptionalAction, default=None,
                    help="exact prefix tables for non-power-of-two specs (default on)")
    io.add_argument("--out", help="write the report here instead of stdout")
    io.add_argument("--candidate-out", dest="candidate_out", help="fhc-vector: export the candidate vector")
    io.add_argument("--config", help="JSON file with the same fields as the flags")

    parser = argparse.ArgumentParser(prog="wshift", description="Dynamics of weighted backward shifts on l^p.")
    parser.add_argument("--version", action="version", version=f"wshift {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weights", parents=[common], help="list weights, runs and prefix products")
    chk = sub.add_parser("check", parents=[common], help="run a criterion checker")
    chk.add_argument("target", choices=CRITERIA)
    rep = sub.add_parser("repro", parents=[common], help="reproduce a construction")
    rep.add_argument("target", choices=("menet", "example8"))
    sub.add_parser("fhc-vector", parents=[common], help="build a candidate vector and measure visits")
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    values = {k: getattr(ns, k, None) for k in CONFIG_FIELDS | {"command", "target"}}
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}", "config") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object", "config")
        unknown = sorted(set(data) - CONFIG_FIELDS)
        if unknown:
            raise UsageError(f"unknown config fields {unknown}", unknown[0])
        for k, v in data.items():
            if values.get(k) is None:
                values[k] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# -- spec and tables ---------------------------------------------------------


def resolve_spec(cfg: RunConfig, default: Optional[str] = None) -> WeightSpec:
    if cfg.spec:
        try:
            return load_spec(cfg.spec)
        except OSError as exc:
            raise UsageError(f"cannot read spec: {exc}", "spec") from None
    name = cfg.builtin or default
    if not name:
        raise UsageError("a weight spec is required: --spec FILE or --builtin NAME", "spec")
    params = {"base": cfg.base} if cfg.base is not None and name != "menet" else {}
    return builtin_spec(name, params)


def make_table(spec: WeightSpec, horizon: int, cfg: RunConfig) -> PrefixTable:
    return PrefixTable(spec, horizon, exact=cfg.exact is not False)


def resolve_c_rule(cfg: RunConfig, spec: WeightSpec) -> CRule:
    if cfg.C is None:
        if spec.name == "menet":
            return menet_c_rule()
        raise UsageError("no-fhc-subspace needs a C-rule: --C menet or --C <constant>", "C")
    if cfg.C == "menet":
        return menet_c_rule()
    return constant_c_rule(_rational(cfg.C, "C"))


def resolve_k_seq(cfg: RunConfig, spec: WeightSpec) -> KSequence:
    if cfg.k_seq is None or cfg.k_seq == "block4-markers":
        if spec.name == "block4-geometric":
            return example8_k_sequence(spec.params["base"])
        if cfg.k_seq is None:
            raise UsageError("fhc-subspace needs a k-sequence: --k-seq block4-markers or --k-seq 3,7,12", "k_seq")
        raise UsageError("k-sequence 'block4-markers' needs the block4-geometric spec", "k_seq")
    try:
        ks = [int(t) for t in cfg.k_seq.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"k-seq must be a comma-separated list of integers, got {cfg.k_seq!r}", "k_seq") from None
    if not ks:
        raise UsageError("k-seq must name at least one index", "k_seq")
    return explicit_k_sequence(ks)


# -- commands ----------------------------------------------------------------


@dataclass
class Outcome:
    report: Any
    exit_code: int = EXIT_OK
    csv: Optional[str] = None


def _envelope(cfg: RunConfig, result: Any) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": cfg.command,
            "target": cfg.target, "config": cfg.echo(), "result": result}


def cmd_weights(cfg: RunConfig) -> Outcome:
    spec = resolve_spec(cfg)
    count = cfg.K or 20
    table = make_table(spec, count, cfg)
    weights = spec.weights_between(1, count + 1)
    runs = [[v, a, b - 1] for v, a, b in spec.iter_runs(1, count + 1)]
    marks = []
    for v, a, b in spec.iter_runs(1, count + 1):
        k = a - 1
        mag = table.prefix(k)
        marks.append({"k": k, "log2_P": mag.log2,
                      "P": mag.exact_value() if mag.is_exact else None})
    result = {"spec": spec.to_config(), "count": count, "weights": weights,
              "runs": [{"value": v, "first": a, "last": b} for v, a, b in runs],
              "prefix_before_runs": marks}
    csv = csv_table(("k", "weight"), [(k, w) for k, w in enumerate(weights, start=1)])
    return Outcome(_envelope(cfg, result), EXIT_OK, csv)


def run_check(cfg: RunConfig) -> Verdict:
    crit = cfg.target
    spec = resolve_spec(cfg)
    p = _p(cfg)
    if crit == "no-fhc-subspace":
        h = cfg.horizon or DEFAULT_NO_FHC_HORIZON
        rule = resolve_c_rule(cfg, spec)
        return check_no_fhc_subspace(make_table(spec, h, cfg), rule, p, h, _float(cfg, "delta", "0.05"))
    h = cfg.horizon or DEFAULT_K
    if crit == "hc-subspace":
        hn, hk = cfg.horizon_n or 200, cfg.horizon_k or 200
        return check_hypercyclic_subspace(make_table(spec, max(h, hn + hk), cfg), hn, hk)
    table = make_table(spec, h, cfg)
    if crit == "fhc":
        return check_frequent_hypercyclicity(table, p, h)
    if crit == "hypercyclic":
        return check_hypercyclic(table, h)
    kseq = resolve_k_seq(cfg, spec)
    c = _rational(cfg.C, "C") if cfg.C is not None else Fraction(1)
    return check_fhc_subspace(table, kseq, c, p, h, _float(cfg, "rho", "0.1"))


def cmd_check(cfg: RunConfig) -> Outcome:
    v = run_check(cfg)
    return Outcome(v.to_dict(), STATUS_EXIT.get(v.status, EXIT_INCONCLUSIVE))


def _verdict_summary(v: Verdict) -> dict:
    return {"status": v.status, "warnings": v.warnings, "verdict": v.to_dict()}


def repro_menet(p=1, n_max: int = 1000, horizon: int = DEFAULT_K,
                no_fhc_horizon: int = DEFAULT_NO_FHC_HORIZON, delta: float = 0.05) -> dict:
    """Every displayed identity of the Menet construction plus the three checkers."""
    spec = menet_weights()
    ident = verify_menet_identities(n_max, p)

    # the weight changes value exactly at the markers a_1 .. a_200
    top = menet_marker(200)
    w = np.array([int(x) for x in spec.weights_between(1, top + 1)])
    changes = (np.flatnonzero(w[1:] != w[:-1]) + 2).tolist()
    boundaries_ok = changes == [menet_marker(n) for n in range(1, 201)]

    # #{m : ||B^m e_l|| >= C_l} >= a_2n for every l in [a_3, a_17)
    lo, hi = menet_marker(3), menet_marker(17)
    rule = menet_c_rule()
    table = PrefixTable(spec, max(horizon, no_fhc_horizon))
    counts, border = orbit_counts(table, rule, lo, hi - 1)
    bounds = np.array([rule.count_bound(l) for l in range(lo, hi)])
    bad = np.flatnonzero(counts < bounds)
    count_check = {"range": [lo, hi - 1], "checked": int(counts.size), "borderline": border,
                   "violations": int(bad.size), "min_slack": int((counts - bounds).min()),
                   "pass": bool(not bad.size and not border)}

    fhc = check_frequent_hypercyclicity(table, p, horizon)
    hcs = check_hypercyclic_subspace(table)
    nofhc = check_no_fhc_subspace(PrefixTable(spec, no_fhc_horizon), rule, p, no_fhc_horizon, delta)
    hyp = check_hypercyclic(table, horizon)
    checks = {
        "marker_identities": ident["difference_identities"]["pass"],
        "ratio_trend": ident["ratio_a2n_over_a2n3"]["pass"],
        "series_brackets": all(s["bracket_holds"] for s in ident["series"]),
        "run_boundaries_at_markers": boundaries_ok,
        "orbit_count_bound": count_check["pass"],
        "fhc_certified": fhc.status == CERTIFIED_TRUE,
        "hc_subspace_certified": hcs.status == CERTIFIED_TRUE,
        "no_fhc_subspace_certified": nofhc.status == CERTIFIED_TRUE,
    }
    return {
        "construction": "menet",
        "identities": ident,
        "run_boundaries": {"checked_markers": 200, "pass": boundaries_ok},
        "orbit_counts": count_check,
        "verdicts": {"fhc": _verdict_summary(fhc), "hc-subspace": _verdict_summary(hcs),
                     "no-fhc-subspace": _verdict_summary(nofhc), "hypercyclic": _verdict_summary(hyp)},
        "checks": checks,
        "pass": all(checks.values()),
    }


def repro_example8(base: int = 3, p=1, n_max: int = 12, horizon: int = DEFAULT_K, rho: float = 0.3,
                   markers: int = 8) -> dict:
    """The displayed computations of the block-4 example for ``a_n = base^(n-1)``."""
    a = geometric_markers(base)
    spec = example8_weights(base)
    kseq = example8_k_sequence(base)
    ks = [kseq.index(l) for l in range(1, markers + 1)]
    window = a(markers)
    table = PrefixTable(spec, max(horizon, ks[-1] + 1))
    inter = intersect_g_sets(table, ks, 1)
    closed = example_a_set(a, window)
    agrees = inter.restrict(0, window) == closed
    g_ok = all(intersect_g_sets(table, [k], 1) == kseq.g_closed_form(l) for l, k in enumerate(ks, start=1))

    conditions = verify_example8_conditions(a, p, n_max)
    dens_n = base ** 12
    a_set = example_a_set(a, dens_n)
    small = density_profile(example_a_set(a, 44), 44, window_start=2)
    big = density_profile(a_set, dens_n)

    fhc = check_frequent_hypercyclicity(table, p)
    hcs = check_hypercyclic_subspace(table)
    fhcs = check_fhc_subspace(table, kseq, 1, p, None, rho, fhc_verdict=fhc)
    claimed = base == 3
    checks = {
        "closed_form_matches_intersection": agrees,
        "g_sets_match_closed_form": g_ok,
        "fhc_certified": fhc.status == CERTIFIED_TRUE,
    }
    if claimed:
        r = conditions["lpd_limit"]
        checks.update(
            summability_bracket=conditions["summability"]["bracket_holds"] is True,
            lpd_ratio_near_one_third=r["deviation_at_n_max"] < Fraction(1, 10 ** 4) and r["matches_simplified_display"],
            density_estimate_at_least_rho=big.lower >= Fraction(str(rho)),
            fhc_subspace_certified=fhcs.status == CERTIFIED_TRUE,
        )
    return {
        "construction": "block4-geometric",
        "base": base,
        "reference_values_checked": claimed,
        "markers": {"a": [a(n) for n in range(1, markers + 1)], "k": ks},
        "intersection": {"window": [0, window], "computed": inter.restrict(0, window).to_dict(),
                         "closed_form": closed.to_dict(), "equal": agrees, "g_sets_equal": g_ok},
        "conditions": conditions,
        "density": {"window_2_44": small.to_dict(), "at_base_pow_12": big.to_dict(),
                    "truncated_at_horizon": a_set_truncated(a, dens_n)},
        "verdicts": {"fhc": _verdict_summary(fhc), "hc-subspace": _verdict_summary(hcs),
                     "fhc-subspace": _verdict_summary(fhcs)},
        "checks": checks,
        "pass": all(checks.values()),
    }


def cmd_repro(cfg: RunConfig) -> Outcome:
    p = _p(cfg)
    if cfg.target == "menet":
        res = repro_menet(p, cfg.n_max or 1000, cfg.horizon or DEFAULT_K,
                          delta=_float(cfg, "delta", "0.05"))
    else:
        res = repro_example8(cfg.base or 3, p, cfg.n_max or 12, cfg.horizon or DEFAULT_K,
                             _float(cfg, "rho", "0.3"))
    return Outcome(_envelope(cfg, res), EXIT_OK if res["pass"] else EXIT_FALSE)


def run_fhc_vector(spec: WeightSpec, L: int, n: int, eps, p=1, spacing: int = DEFAULT_SPACING,
                   block_length: Optional[int] = None, exact: bool = True):
    """Build the candidate and measure visits; returns ``(result, profiles, candidate)``."""
    table = PrefixTable(spec, n + L + 1, exact=exact)
    fhc = check_frequent_hypercyclicity(table, p)
    if fhc.status != CERTIFIED_TRUE:
        raise PreconditionError("frequent hypercyclicity of the shift is not certified", fhc)
    params = {"spacing": spacing}
    if block_length is not None:
        params["block_length"] = block_length
    family = build_separated_family(L, n, params)
    cand = build_fhc_candidate(table, TargetSet(), family, L, n, p, fhc=fhc)
    targets = []
    profiles = []
    for l, y in enumerate(cand.targets, start=1):
        vr = visit_report(table, cand.x, y, eps, p, n)
        profiles.append(vr.profile)
        targets.append({"class": l, "target": y.to_json(),
                        "criterion_conditions": criterion_conditions_check(table, y, p, fhc=fhc),
                        "visits": vr.to_dict()})
    result = {"spec": spec.to_config(), "p": p, "epsilon": str(eps), "N": n,
              "precondition": _verdict_summary(fhc), "candidate": cand.to_dict(), "targets": targets}
    return result, profiles, cand


def cmd_fhc_vector(cfg: RunConfig) -> Outcome:
    spec = resolve_spec(cfg)
    eps = _rational(cfg.epsilon or "0.1", "epsilon")
    try:
        res, profiles, cand = run_fhc_vector(spec, cfg.L or 3, cfg.N or DEFAULT_N, eps, _p(cfg),
                                             cfg.spacing or DEFAULT_SPACING, cfg.block_length,
                                             cfg.exact is not False)
    except PreconditionError as exc:
        rep = _envelope(cfg, {"error": "precondition", "message": str(exc),
                              "verdict": exc.verdict.to_dict() if exc.verdict else None})
        return Outcome(rep, EXIT_FALSE)
    if cfg.candidate_out:
        Path(cfg.candidate_out).write_text(dumps({"schema_version": SCHEMA_VERSION, "candidate": cand.export()}))
    rows = []
    for l, prof in enumerate(profiles, start=1):
        rows.extend((l,) + tuple(r) for r in prof.csv_rows())
    csv = csv_table(("class",) + CSV_HEADER, rows)
    return Outcome(_envelope(cfg, res), EXIT_OK, csv)


COMMANDS = {"weights": cmd_weights, "check": cmd_check, "repro": cmd_repro, "fhc-vector": cmd_fhc_vector}


# -- rendering ---------------------------------------------------------------


def render(outcome: Outcome, fmt: str) -> str:
    plain_report = plain(outcome.report)
    if fmt == "json":
        return dumps(plain_report)
    if fmt == "csv":
        if outcome.csv is not None:
            return outcome.csv
        return csv_table(("field", "value"), flatten(plain_report))
    return "".join(f"{k} = {v}\n" for k, v in flatten(plain_report))


def _diagnostic(kind: str, message: str, field: Optional[str] = None) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "error": kind, "message": message, "field": field},
                      sort_keys=True) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    except UsageError as exc:
        sys.stderr.write(_diagnostic("usage", str(exc), exc.field))
        return EXIT_USAGE
    try:
        outcome = COMMANDS[cfg.command](cfg)
    except SpecParseError as exc:
        sys.stderr.write(_diagnostic("spec-parse", str(exc), exc.field))
        return EXIT_USAGE
    except UsageError as exc:
        sys.stderr.write(_diagnostic("usage", str(exc), exc.field))
        return EXIT_USAGE
    except WShiftError as exc:
        sys.stderr.write(_diagnostic(type(exc).__name__, str(exc)))
        return EXIT_USAGE
    text = render(outcome, cfg.format or "json")
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if outcome.exit_code != EXIT_OK:
        sys.stderr.write(_diagnostic("status", f"exit {outcome.exit_code}",
                                     outcome.report.get("status") if isinstance(outcome.report, dict) else None))
    return outcome.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
