"""Finite-horizon certification of the dynamical properties of a weighted shift.

Each checker returns a :class:`Verdict`. ``certified-true`` and
``certified-false`` are only issued on structural grounds (an exact tail
formula, or a declared closed form validated against every computed
term); anything else is ``inconclusive`` and reports what was computed.

Properties, for ``B_w`` on l^p with prefix products ``P``:

* frequently hypercyclic  iff  ``sum_k P(k)**-p < oo``;
* hypercyclic subspace (for hypercyclic ``B_w``)  iff
  ``sup_n inf_k w_{k+1} ... w_{k+n} <= 1``;
* no frequently hypercyclic subspace if some positive ``C_k`` has
  ``sum (1/C_k)**p < oo`` and ``#{n : ||B^n e_k|| >= C_k} / (k+1) -> 1``;
* a frequently hypercyclic subspace if ``B_w`` is frequently hypercyclic
  and some ``G(k_l, C)`` intersection has positive lower density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .density import IntSet, density_profile, g_set
from .errors import DomainError, HorizonError
from .magnitude import TAU, ceil_log2, log2_fraction
from .report import SCHEMA_VERSION, decode_num, dumps, frac_str, plain
from .series import BlockBound, SeriesCheck, inverse_power, normalize_p, validate_blocks
from .weights import PrefixTable

CERTIFIED_TRUE = "certified-true"
CERTIFIED_FALSE = "certified-false"
INCONCLUSIVE = "inconclusive"

ONE_DIRECTIONAL = "sufficient condition only: this checker never issues certified-false"


@dataclass
class Verdict:
    criterion: str
    status: str
    evidence: dict
    warnings: List[str] = field(default_factory=list)
    horizons: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status in (CERTIFIED_TRUE, CERTIFIED_FALSE)

    def to_dict(self) -> dict:
        return plain({
            "schema_version": SCHEMA_VERSION,
            "criterion": self.criterion,
            "status": self.status,
            "evidence": self.evidence,
            "warnings": list(self.warnings),
            "horizons": self.horizons,
            "parameters": self.parameters,
        })

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        return cls(d["criterion"], d["status"], d["evidence"], list(d.get("warnings", [])),
                   d.get("horizons", {}), d.get("parameters", {}))


@dataclass(frozen=True)
class CRule:
    """Thresholds ``C_k > 0`` for ``k >= k_min``.

    ``tail`` declares a block bound on ``sum (1/C_k)**p``. ``count_bound``
    declares a lower bound on ``#{n : ||B^n e_k|| >= C_k}``, constant on
    the blocks given by ``count_blocks``.
    """

    name: str
    value: Callable[[int], Fraction]
    k_min: int
    tail: Optional[BlockBound] = None
    count_bound: Optional[Callable[[int], int]] = None
    count_blocks: Optional[Callable[[int], Tuple[int, int]]] = None
    count_first_block: int = 0
    params: dict = field(default_factory=dict)
    description: str = ""
    replayable: bool = True

    def __call__(self, k: int) -> Fraction:
        if k < self.k_min:
            raise DomainError(f"C_{k} undefined below k_min={self.k_min}")
        c = Fraction(self.value(k))
        if c <= 0:
            raise DomainError(f"C_{k} = {c} is not positive")
        return c

    def to_config(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "replayable": self.replayable}


def constant_c_rule(c, k_min: int = 0) -> CRule:
    c = Fraction(c)
    return CRule(f"constant-{frac_str(c)}", lambda k: c, k_min, params={"C": frac_str(c)},
                 description=f"C_k = {frac_str(c)}")


@dataclass(frozen=True)
class KSequence:
    """Strictly increasing indices ``k_l`` (``l >= 1``) spanning a subspace.

    A declared ``closed_form(N)`` gives the infinite intersection of the
    ``G(k_l, c_value)`` restricted to ``[0, N]``; the intersection over the
    first ``L`` indices is declared to agree with it on ``[0, agreement(L)]``,
    and ``g_closed_form(l)`` declares each ``G(k_l, c_value)``.
    """

    name: str
    index: Callable[[int], int]
    c_value: Optional[Fraction] = None
    closed_form: Optional[Callable[[int], IntSet]] = None
    agreement: Optional[Callable[[int], int]] = None
    g_closed_form: Optional[Callable[[int], IntSet]] = None
    params: dict = field(default_factory=dict)
    description: str = ""
    replayable: bool = True

    def indices_upto(self, horizon: int) -> List[int]:
        out: List[int] = []
        l = 1
        while True:
            k = self.index(l)
            if out and k <= out[-1]:
                raise DomainError(f"k-sequence {self.name!r} is not strictly increasing at l={l}")
            if k > horizon:
                return out
            out.append(k)
            l += 1

    def to_config(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "replayable": self.replayable}


def explicit_k_sequence(ks: Sequence[int]) -> KSequence:
    ks = [int(k) for k in ks]
    if not ks:
        raise DomainError("at least one index is required")

    def index(l):
        return ks[l - 1] if l <= len(ks) else math.inf

    return KSequence("explicit", index, params={"ks": ks}, description="caller-supplied indices")


# -- helpers -------------------------------------------------------------


def _base_parameters(table: PrefixTable, **extra) -> dict:
    params = {"spec": table.spec.to_config(), "table_horizon": table.horizon,
              "table_mode": table.mode, "stride": table.stride}
    params.update(extra)
    return params


def _inverse_power_prefix(table: PrefixTable, k: int, p):
    """``P(k)**-p``: exact for integer p on exact tables."""
    if isinstance(p, int) and table.is_exact:
        if table.mode == "pow2":
            e = table.exponent(k) * p
            return Fraction(1, 2 ** e) if e >= 0 else Fraction(2 ** -e)
        return Fraction(1) / table.exact(k) ** p
    e = -p * table.log2(k)
    return math.inf if e > 1023 else 2.0 ** e


def _run_sum(table: PrefixTable, lo: int, hi: int, p):
    """``sum_{k=lo}^{hi-1} P(k)**-p`` aggregated run by run."""
    total = 0
    for v, a, b in table.spec.iter_runs(lo, hi):
        base = _inverse_power_prefix(table, a - 1, p)
        r = inverse_power(v, p)
        length = b - a
        if r == 1:
            geo = length
        else:
            geo = r * (1 - r ** length) / (1 - r)
        total = total + base * geo
    return total


def _series_evidence(chk: SeriesCheck) -> dict:
    return {
        "partial_sum": chk.partial_sum,
        "partial_sum_through_index": chk.last_index,
        "blocks_validated": chk.blocks_validated,
        "last_block": chk.last_block,
        "tail_bound": chk.tail_bound,
        "upper_bound": chk.upper_bound,
        "declared_bound_valid": chk.valid,
        "reason": chk.reason,
        "partial_sum_trend": [[i, s] for i, s in chk.checkpoints],
    }


def _plain_partial_sums(table: PrefixTable, horizon: int, p, marks: int = 12) -> dict:
    total = 0
    trend = []
    step = max(1, horizon // marks)
    lo = 1
    while lo <= horizon:
        hi = min(lo + step, horizon + 1)
        total = total + _run_sum(table, lo, hi, p)
        trend.append([hi - 1, total])
        lo = hi
    last = _inverse_power_prefix(table, horizon, p) if horizon >= 1 else 1
    return {"partial_sum": total, "partial_sum_through_index": horizon, "last_term": last,
            "partial_sum_trend": trend}


def _check_p(p):
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return p


def _horizon(table: PrefixTable, horizon: Optional[int]) -> int:
    h = table.horizon if horizon is None else int(horizon)
    if h < 1:
        raise DomainError("horizon must be >= 1")
    if h > table.horizon:
        raise HorizonError(h, table.horizon)
    return h


# -- frequent hypercyclicity ---------------------------------------------


def check_frequent_hypercyclicity(table: PrefixTable, p=1, horizon: Optional[int] = None) -> Verdict:
    """Convergence of ``sum_{k>=1} P(k)**-p``."""
    p = _check_p(p)
    h = _horizon(table, horizon)
    spec = table.spec
    params = _base_parameters(table, p=p, horizon=h)
    horizons = {"K": h}
    warnings: List[str] = []

    tail = spec.tail_run
    if tail is not None:
        s = tail.start
        if s - 1 > table.horizon:
            raise HorizonError(s - 1, table.horizon)
        finite = _run_sum(table, 1, s, p) if s > 1 else 0
        base = _inverse_power_prefix(table, s - 1, p)
        r = inverse_power(tail.value, p)
        ev = {"method": "explicit runs: exact geometric tail",
              "finite_part": finite, "finite_part_through_index": s - 1,
              "tail_start": s, "tail_weight": tail.value, "tail_term_ratio": r}
        if r < 1:
            tail_sum = base * r / (1 - r)
            ev.update(tail_sum=tail_sum, series_value=finite + tail_sum)
            return Verdict("fhc", CERTIFIED_TRUE, ev, warnings, horizons, params)
        ev.update(witness=f"terms P(k)^-p >= P({s - 1})^-p > 0 for all k >= {s}: they do not tend to 0",
                  term_lower_bound=base)
        return Verdict("fhc", CERTIFIED_FALSE, ev, warnings, horizons, params)

    if spec.series is not None:
        decl = spec.series()
        blocks = []
        n = decl.first
        offset = 0
        lo0 = decl.block(n)[0]
        if lo0 > 1:
            offset = _run_sum(table, 1, lo0, p)
        while True:
            lo, hi = decl.block(n)
            if hi - 1 > h:
                break
            blocks.append((n, hi, _run_sum(table, lo, hi, p)))
            n += 1
        chk = validate_blocks(decl, blocks, p, offset=offset)
        ev = {"method": "declared block bound, validated on every computed block",
              "declaration": decl.description}
        ev.update(_series_evidence(chk))
        status = CERTIFIED_TRUE if chk.valid else INCONCLUSIVE
        if not chk.valid:
            warnings.append(f"declared bound not usable: {chk.reason}")
        return Verdict("fhc", status, ev, warnings, horizons, params)

    ev = {"method": "finite partial sums only (no structural declaration)"}
    ev.update(_plain_partial_sums(table, h, p))
    warnings.append("partial sums alone cannot certify convergence")
    return Verdict("fhc", INCONCLUSIVE, ev, warnings, horizons, params)


# -- hypercyclicity (precondition helper) --------------------------------


def check_hypercyclic(table: PrefixTable, horizon: Optional[int] = None) -> Verdict:
    """Unbounded prefix products, certified from run structure."""
    h = _horizon(table, horizon)
    spec = table.spec
    params = _base_parameters(table, horizon=h)
    horizons = {"K": h}
    tail = spec.tail_run
    if tail is not None:
        ev = {"method": "explicit runs", "tail_start": tail.start, "tail_weight": tail.value}
        if tail.value > 1:
            ev["witness"] = "P(k) grows geometrically along the tail"
            return Verdict("hypercyclic", CERTIFIED_TRUE, ev, [], horizons, params)
        ev["reason"] = "eventually non-increasing prefix products; not certified here"
        return Verdict("hypercyclic", INCONCLUSIVE, ev, [], horizons, params)
    if spec.growth is not None:
        g = spec.growth
        witnesses = []
        n = g.first
        prev = None
        ok = True
        while g.index(n) <= h:
            k, e = g.index(n), g.exponent(n)
            lg = table.prefix(k)
            sign, border = lg.compare(Fraction(2) ** e if e >= 0 else Fraction(1, 2 ** -e))
            if sign < 0 or border or (prev is not None and e <= prev):
                ok = False
                break
            witnesses.append([k, e])
            prev = e
            n += 1
        ev = {"method": "declared growth witnesses validated against prefix products",
              "declaration": g.description, "witnesses_validated": len(witnesses),
              "witnesses": witnesses[:6] + (witnesses[-2:] if len(witnesses) > 8 else witnesses[6:])}
        status = CERTIFIED_TRUE if ok and len(witnesses) >= 2 else INCONCLUSIVE
        return Verdict("hypercyclic", status, ev, [], horizons, params)
    logs, _ = table.log2s(0, h)
    ev = {"method": "finite horizon only", "max_log2_prefix": float(logs.max())}
    return Verdict("hypercyclic", INCONCLUSIVE, ev, [], horizons, params)


# -- hypercyclic subspace ------------------------------------------------


def check_hypercyclic_subspace(table: PrefixTable, horizon_n: int = 200, horizon_k: int = 200) -> Verdict:
    """``sup_n inf_k w_{k+1} ... w_{k+n} <= 1`` for a hypercyclic shift."""
    spec = table.spec
    params = _base_parameters(table, horizon_n=horizon_n, horizon_k=horizon_k)
    horizons = {"N": horizon_n, "K": horizon_k}
    pre = check_hypercyclic(table)
    warnings: List[str] = []
    if pre.status != CERTIFIED_TRUE:
        warnings.append("hypercyclicity precondition not certified; characterization assumes it")
    base_ev = {"precondition_hypercyclic": pre.status}

    tail = spec.tail_run
    if tail is not None:
        s = tail.start
        if tail.value <= 1:
            ev = dict(base_ev, method="explicit runs",
                      witness=f"for every n, k={s - 1} gives a window inside the tail with product "
                              f"{frac_str(tail.value)}^n <= 1")
            return Verdict("hc-subspace", CERTIFIED_TRUE, ev, warnings, horizons, params)
        # windows starting at k >= s-1 lie in the tail and have product v^n > 1
        for n in range(1, horizon_n + 1):
            if s - 1 + n > table.horizon:
                break
            vals = [table.ratio(k + n, k) for k in range(0, s)]
            signs = [v.compare(1) for v in vals]
            if any(b for _, b in signs):
                continue
            if all(sg > 0 for sg, _ in signs):
                low = min(range(len(vals)), key=lambda i: vals[i].log2)
                ev = dict(base_ev, method="explicit runs: exact window minimum",
                          witness_n=n, minimizing_k=low,
                          inf_window_product=vals[low].exact_value() if vals[low].is_exact else vals[low].log2,
                          tail_window_product=tail.value ** n)
                return Verdict("hc-subspace", CERTIFIED_FALSE, ev, warnings, horizons, params)
        ev = dict(base_ev, method="explicit runs", reason=f"no witness n <= {horizon_n}")
        return Verdict("hc-subspace", INCONCLUSIVE, ev, warnings, horizons, params)

    if spec.low_runs is not None:
        decl = spec.low_runs
        n = decl.first
        runs = []
        ok = True
        while True:
            a, b = decl.run(n)
            if b - 1 > table.horizon:
                break
            if any(v > 1 for v, _, _ in spec.iter_runs(a, b)) or (runs and b - a <= runs[-1][2]):
                ok = False
                break
            runs.append([a, b - 1, b - a])
            n += 1
        ev = dict(base_ev, method="declared runs of weights <= 1 with strictly increasing lengths",
                  declaration=decl.description, runs_validated=len(runs),
                  runs=runs[:5] + runs[-2:] if len(runs) > 7 else runs)
        status = CERTIFIED_TRUE if ok and len(runs) >= 2 else INCONCLUSIVE
        return Verdict("hc-subspace", status, ev, warnings, horizons, params)

    need = horizon_n + horizon_k
    if need > table.horizon:
        raise HorizonError(need, table.horizon)
    logs, _ = table.log2s(0, need)
    best = -math.inf
    for n in range(1, horizon_n + 1):
        m = float((logs[n:n + horizon_k + 1] - logs[:horizon_k + 1]).min())
        best = max(best, m)
    ev = dict(base_ev, method="finite horizon matrix",
              max_n_min_k_log2_window_product=best)
    warnings.append("infimum over all k cannot be certified at a finite horizon")
    return Verdict("hc-subspace", INCONCLUSIVE, ev, warnings, horizons, params)


# -- no frequently hypercyclic subspace ----------------------------------


def orbit_counts(table: PrefixTable, c_rule: CRule, lo: int, hi: int) -> Tuple[np.ndarray, int]:
    """``#{n >= 0 : ||B^n e_k|| >= C_k}`` for ``lo <= k <= hi`` and the borderline count.

    Only ``n <= k`` can contribute. Approximate comparisons within tolerance
    are left out of the count.
    """
    table._check(hi)
    out = np.zeros(hi - lo + 1, dtype=np.int64)
    border_total = 0
    if table.mode == "pow2":
        e = table.exponents(0, hi)
        monotone = table.is_nondecreasing(hi)
        for i, k in enumerate(range(lo, hi + 1)):
            t = e[k] - ceil_log2(c_rule(k))
            if monotone:
                out[i] = np.searchsorted(e[:k + 1], t, side="right")
            else:
                out[i] = int(np.count_nonzero(e[:k + 1] <= t))
        return out, 0
    if table.mode == "rational":
        vals = table.exact_values(0, hi)
        for i, k in enumerate(range(lo, hi + 1)):
            lim = vals[k] / c_rule(k)
            out[i] = sum(1 for j in range(k + 1) if vals[j] <= lim)
        return out, 0
    logs, errs = table.log2s(0, hi)
    for i, k in enumerate(range(lo, hi + 1)):
        d = logs[k] - logs[:k + 1] - log2_fraction(c_rule(k))
        border = np.abs(d) <= TAU + errs[:k + 1] + errs[k]
        out[i] = int(np.count_nonzero((d >= 0) & ~border))
        border_total += int(border.sum())
    return out, border_total


def check_no_fhc_subspace(table: PrefixTable, c_rule: CRule, p=1, horizon: Optional[int] = None,
                          delta: float = 0.05) -> Verdict:
    """Sufficient condition for the absence of frequently hypercyclic subspaces."""
    p = _check_p(p)
    h = _horizon(table, horizon)
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    params = _base_parameters(table, p=p, horizon=h, delta=delta, c_rule=c_rule.to_config())
    horizons = {"K": h}
    warnings: List[str] = []
    k0 = c_rule.k_min
    if h < k0:
        raise DomainError(f"horizon {h} below k_min {k0}")

    # (i) summability of (1/C_k)^p
    if c_rule.tail is not None:
        decl = c_rule.tail
        blocks = []
        n = decl.first
        lo0 = decl.block(n)[0]
        offset = sum((inverse_power(c_rule(k), p) for k in range(k0, lo0)), 0)
        while True:
            lo, hi = decl.block(n)
            if hi - 1 > h:
                break
            blocks.append((n, hi, sum((inverse_power(c_rule(k), p) for k in range(lo, hi)), 0)))
            n += 1
        chk = validate_blocks(decl, blocks, p, offset=offset)
        summable = {"declaration": decl.description}
        summable.update(_series_evidence(chk))
        hyp_i = chk.valid
        if not chk.valid:
            warnings.append(f"hypothesis (i) not certified: {chk.reason}")
    else:
        total = sum((inverse_power(c_rule(k), p) for k in range(k0, h + 1)), 0)
        summable = {"declaration": None, "partial_sum": total, "partial_sum_through_index": h}
        hyp_i = False
        warnings.append("hypothesis (i) not certified: no declared tail for sum (1/C_k)^p")

    # (ii) counting ratios
    counts, border = orbit_counts(table, c_rule, k0, h)
    if border:
        warnings.append(f"{border} borderline comparisons excluded from the counts")
    ks = np.arange(k0, h + 1)
    w0 = max(k0, h - h // 10)
    sel = slice(w0 - k0, None)
    ratios = counts[sel] / (ks[sel] + 1)
    i_min = int(np.argmin(ratios))
    k_min_ratio = int(ks[sel][i_min])
    min_ratio = Fraction(int(counts[sel][i_min]), k_min_ratio + 1)
    ratio_ok = min_ratio > 1 - Fraction(delta).limit_denominator(10 ** 12)

    bound_ev: dict = {"declared": c_rule.count_bound is not None}
    bound_ok = False
    if c_rule.count_bound is not None:
        lbs = np.fromiter((c_rule.count_bound(int(k)) for k in ks), dtype=np.int64, count=len(ks))
        bad = np.flatnonzero(counts < lbs)
        floors = []
        if c_rule.count_blocks is not None:
            n = c_rule.count_first_block
            while True:
                lo, hi = c_rule.count_blocks(n)
                if hi - 1 > h:
                    break
                if lo >= k0:
                    floors.append(min(Fraction(c_rule.count_bound(k), k + 1) for k in range(lo, hi)))
                n += 1
        monotone = all(a <= b for a, b in zip(floors, floors[1:]))
        bound_ok = not bad.size and bool(floors) and monotone
        bound_ev.update(
            violations=int(bad.size), first_violation=int(ks[bad[0]]) if bad.size else None,
            blocks_validated=len(floors), floors_nondecreasing=monotone,
            last_block_ratio_floor=floors[-1] if floors else None,
            description=c_rule.description,
        )
    else:
        warnings.append("hypothesis (ii) has no declared structural lower bound")

    sample = list(range(0, min(6, len(ks)))) + list(range(max(6, len(ks) - 3), len(ks)))
    ev = {
        "direction": ONE_DIRECTIONAL,
        "hypothesis_summable": summable,
        "hypothesis_ratio": {
            "final_window": [w0, h],
            "min_ratio": min_ratio,
            "min_ratio_at": k_min_ratio,
            "threshold": 1 - delta,
            "exceeds_threshold": bool(ratio_ok),
            "sample_counts": [[int(ks[i]), int(counts[i])] for i in sample],
            "structural_bound": bound_ev,
        },
    }
    status = CERTIFIED_TRUE if (hyp_i and ratio_ok and bound_ok) else INCONCLUSIVE
    return Verdict("no-fhc-subspace", status, ev, warnings, horizons, params)


# -- frequently hypercyclic subspace -------------------------------------


def check_fhc_subspace(table: PrefixTable, k_seq: KSequence, c=1, p=1, horizon: Optional[int] = None,
                       rho: float = 0.1, fhc_verdict: Optional[Verdict] = None) -> Verdict:
    """Positive lower density of ``intersection_l G(k_l, C)`` for a frequently hypercyclic shift."""
    p = _check_p(p)
    h = _horizon(table, horizon)
    c = Fraction(c)
    if c <= 0:
        raise DomainError("C must be positive")
    ks = k_seq.indices_upto(h)
    if not ks:
        raise DomainError("at least one index k_l within the horizon is required")
    params = _base_parameters(table, p=p, horizon=h, rho=rho, C=frac_str(c), k_seq=k_seq.to_config())
    warnings: List[str] = []
    if fhc_verdict is None:
        fhc_verdict = check_frequent_hypercyclicity(table, p)
    pre_ok = fhc_verdict.status == CERTIFIED_TRUE
    if not pre_ok:
        warnings.append("frequent hypercyclicity precondition not certified")

    gs = [g_set(table, k, c) for k in ks]
    inter = gs[0]
    for g in gs[1:]:
        inter = inter & g
    L = len(ks)
    ev = {"direction": ONE_DIRECTIONAL, "precondition_fhc": fhc_verdict.status,
          "indices": ks if L <= 12 else ks[:6] + ["..."] + ks[-3:], "index_count": L}

    structural = (k_seq.closed_form is not None and k_seq.agreement is not None
                  and k_seq.c_value is not None and Fraction(k_seq.c_value) == c)
    if structural:
        n_agree = k_seq.agreement(L)
        closed = k_seq.closed_form(n_agree).restrict(0, n_agree)
        agrees = inter.restrict(0, n_agree) == closed
        g_ok = True
        if k_seq.g_closed_form is not None:
            g_ok = all(g == k_seq.g_closed_form(l) for l, g in enumerate(gs, start=1))
        nested = all(k_seq.agreement(l) <= k_seq.agreement(l + 1) for l in range(1, L + 1))
        prof = density_profile(closed, n_agree)
        dense = prof.lower >= Fraction(rho).limit_denominator(10 ** 12)
        ev.update(method="declared closed form of the infinite intersection",
                  declaration=k_seq.description, agreement_window=[0, n_agree],
                  computed_matches_closed_form=agrees, g_sets_match_declared=g_ok,
                  lower_parts_nested=nested, density=prof.to_dict(), rho=rho)
        horizons = {"K": h, "N": n_agree}
        status = CERTIFIED_TRUE if (pre_ok and agrees and g_ok and nested and dense) else INCONCLUSIVE
        return Verdict("fhc-subspace", status, ev, warnings, horizons, params)

    n_top = ks[-1]
    prof = density_profile(inter.restrict(0, n_top), n_top)
    ev.update(method="finite intersection only", density=prof.to_dict(), rho=rho,
              intersection_head=str(inter.restrict(0, min(n_top, 200))))
    warnings.append("finite intersection over-approximates the infinite one; no closed form declared")
    return Verdict("fhc-subspace", INCONCLUSIVE, ev, warnings, {"K": h, "N": n_top}, params)


# -- replay --------------------------------------------------------------


def run_criterion(name: str, table: PrefixTable, params: dict) -> Verdict:
    from . import specfile

    params = {k: decode_num(v) if k in ("p", "delta", "rho") else v for k, v in params.items()}

    if name == "fhc":
        return check_frequent_hypercyclicity(table, params["p"], params["horizon"])
    if name == "hypercyclic":
        return check_hypercyclic(table, params["horizon"])
    if name == "hc-subspace":
        return check_hypercyclic_subspace(table, params["horizon_n"], params["horizon_k"])
    if name == "no-fhc-subspace":
        rule = specfile.c_rule_from_config(params["c_rule"])
        return check_no_fhc_subspace(table, rule, params["p"], params["horizon"], params["delta"])
    if name == "fhc-subspace":
        kseq = specfile.k_sequence_from_config(params["k_seq"])
        return check_fhc_subspace(table, kseq, Fraction(params["C"]), params["p"], params["horizon"],
                                  params["rho"])
    raise DomainError(f"unknown criterion {name!r}")


def replay_verdict(record: dict) -> Verdict:
    """Re-run the checker described by a serialized verdict's parameters."""
    from . import specfile

    params = record["parameters"]
    spec = specfile.spec_from_config(params["spec"])
    table = PrefixTable(spec, params["table_horizon"], stride=params["stride"], mode=params["table_mode"])
    return run_criterion(record["criterion"], table, params)


def replays_identically(record_json: str) -> bool:
    import json

    record = json.loads(record_json)
    return replay_verdict(record).to_json() == record_json
