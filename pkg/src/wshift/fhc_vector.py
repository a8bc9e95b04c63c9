"""Constructive frequently hypercyclic candidates for weighted shifts.

``x = sum_l sum_{n in A_l, n <= H} S^n y_l`` where the ``A_l`` form a
separated family and the ``y_l`` are finitely supported targets. The
orbit of ``x`` is computed exactly; visits to the open ``eps``-balls
around the targets are summarized as density profiles.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .criteria import CERTIFIED_FALSE, CERTIFIED_TRUE, Verdict, check_frequent_hypercyclicity
from .density import DensityProfile, IntSet, default_window_start, density_profile, profile_from_membership
from .errors import ConstructionError, DomainError, HorizonError, InterferenceError, PreconditionError
from .magnitude import EPS
from .series import normalize_p
from .weights import PrefixTable, SparseVector, _window_product, exact_sum, power_sum, right_inverse_apply, shift_apply

log = logging.getLogger(__name__)

FAMILY_PARAMS = ("block_length", "spacing", "slack")


# -- separated family ------------------------------------------------------


def _block_type(b):
    """``v2(b + 1) + 1``: type ``t`` recurs every ``2^t`` blocks, first at block ``2^(t-1) - 1``."""
    if isinstance(b, np.ndarray):
        low = (b + 1) & -(b + 1)
        return np.log2(low).astype(np.int64) + 1
    return ((b + 1) & -(b + 1)).bit_length()


@dataclass(frozen=True)
class SeparatedFamily:
    """Disjoint sets ``A_1..A_L`` with ``|n - n'| >= l + l'`` across distinct members.

    The integers are cut into blocks of length ``block_length``; a block of
    type ``l`` (frequency ``2^-l``) hosts ``A_l`` at every
    ``2 l spacing``-th point of its middle part, leaving ``block_length // 4``
    unused points at both ends.
    """

    L: int
    block_length: int
    spacing: int = 1
    slack: Fraction = Fraction(1, 2)
    horizon: int = 0
    report: dict = field(default_factory=dict, compare=False)

    @property
    def padding(self) -> int:
        return self.block_length // 4

    @property
    def middle(self) -> int:
        return self.block_length - 2 * self.padding

    def stride(self, l: int) -> int:
        return 2 * l * self.spacing

    def per_block(self, l: int) -> int:
        return -(-self.middle // self.stride(l))

    def declared_density(self, l: int) -> Fraction:
        return Fraction(1, 2 ** l * 4 * l * self.spacing)

    def separation(self, l: int, m: int) -> int:
        return l + m

    def _check_class(self, l: int) -> None:
        if not 1 <= l <= self.L:
            raise DomainError(f"class index must lie in [1, {self.L}], got {l}")

    def class_of(self, n: int) -> Optional[int]:
        """Membership oracle: the class containing ``n``, or None."""
        if n < 0:
            return None
        b, off = divmod(n, self.block_length)
        t = _block_type(b)
        if t > self.L:
            return None
        off -= self.padding
        if 0 <= off < self.middle and off % self.stride(t) == 0:
            return t
        return None

    def members(self, l: int, hi: int) -> np.ndarray:
        """Sorted members of ``A_l`` in ``[0, hi]``."""
        self._check_class(l)
        lam = self.block_length
        blocks = np.arange(2 ** (l - 1) - 1, hi // lam + 1, 2 ** l, dtype=np.int64)
        offs = self.padding + self.stride(l) * np.arange(self.per_block(l), dtype=np.int64)
        pts = (blocks[:, None] * lam + offs[None, :]).ravel()
        return pts[pts <= hi]

    def labels(self, hi: int) -> np.ndarray:
        """Class of every ``n <= hi`` (0 for none), evaluated from the block formula."""
        n = np.arange(hi + 1, dtype=np.int64)
        b, off = np.divmod(n, self.block_length)
        t = _block_type(b)
        off = off - self.padding
        ok = (t <= self.L) & (off >= 0) & (off < self.middle)
        strides = 2 * t * self.spacing
        ok &= np.where(ok, off % np.maximum(strides, 1), 1) == 0
        return np.where(ok, t, 0)

    def to_dict(self) -> dict:
        return {
            "L": self.L, "block_length": self.block_length, "spacing": self.spacing,
            "padding": self.padding, "slack": self.slack, "horizon": self.horizon,
            "classes": [{"class": l, "stride": self.stride(l), "per_block": self.per_block(l),
                         "declared_density": self.declared_density(l)} for l in range(1, self.L + 1)],
            "invariants": self.report,
        }


def verify_family(family: SeparatedFamily, horizon: int) -> dict:
    """Exhaustive check of disjointness, separation and density up to ``horizon``."""
    L = family.L
    cover = np.zeros(horizon + 1, dtype=np.int64)
    label = np.zeros(horizon + 1, dtype=np.int64)
    members = {}
    for l in range(1, L + 1):
        m = family.members(l, horizon)
        members[l] = m
        cover[m] += 1
        label[m] = l
    disjoint = int(cover.max(initial=0)) <= 1
    oracle_agrees = bool(np.array_equal(label, family.labels(horizon)))

    # separation: gaps between consecutive members suffice, since l + l'' <= (l + l') + (l' + l'')
    pts = np.flatnonzero(label)
    cls = label[pts]
    gaps = np.diff(pts)
    need = cls[:-1] + cls[1:]
    bad = np.flatnonzero(gaps < need)
    separated = bad.size == 0
    first_bad = [int(pts[bad[0]]), int(pts[bad[0] + 1])] if bad.size else None

    pair_gaps = {}
    for l in range(1, L + 1):
        for m in range(l, L + 1):
            pair_gaps[f"{l}-{m}"] = _min_gap(members[l], members[m], same=(l == m))

    classes = []
    dense = True
    for l in range(1, L + 1):
        entry = {"class": l, "members": int(members[l].size), "declared_density": family.declared_density(l)}
        # the type-l schedule has period 2^l blocks; the estimate starts after one full period
        start = max(default_window_start(horizon), 2 ** l * family.block_length)
        if members[l].size and start <= horizon // 2:
            prof = density_profile(IntSet.from_members(members[l].tolist()), horizon, window_start=start)
            target = family.declared_density(l) * (1 - family.slack)
            ok = prof.lower >= target
            entry.update(lower_estimate=prof.lower, lower_attained_at=prof.lower_at,
                         window=[prof.window_start, horizon], required=target, pass_=ok)
        else:
            ok = False
            entry.update(lower_estimate=None, required=family.declared_density(l) * (1 - family.slack),
                         pass_=False)
        entry["pass"] = entry.pop("pass_")
        dense &= ok
        classes.append(entry)
    return {
        "horizon": horizon,
        "disjoint": disjoint,
        "oracle_agrees_with_members": oracle_agrees,
        "separated": separated,
        "first_separation_violation": first_bad,
        "min_gaps": pair_gaps,
        "classes": classes,
        "pass": disjoint and oracle_agrees and separated and dense,
    }


def _min_gap(a: np.ndarray, b: np.ndarray, same: bool) -> Optional[int]:
    if same:
        return int(np.diff(a).min()) if a.size > 1 else None
    if not a.size or not b.size:
        return None
    idx = np.searchsorted(b, a)
    best = None
    for side in (idx - 1, idx):
        ok = (side >= 0) & (side < b.size)
        if ok.any():
            d = np.abs(a[ok] - b[side[ok]]).min()
            best = int(d) if best is None else min(best, int(d))
    return best


def build_separated_family(L: int, horizon: int, params: Optional[dict] = None) -> SeparatedFamily:
    """A family meeting every separated-family invariant up to ``horizon``."""
    if isinstance(L, bool) or not isinstance(L, int) or L < 1:
        raise DomainError(f"L must be a positive integer, got {L!r}")
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    params = dict(params or {})
    unknown = set(params) - set(FAMILY_PARAMS)
    if unknown:
        raise DomainError(f"unknown family parameters {sorted(unknown)}")
    g = int(params.get("spacing", 1))
    if g < 1:
        raise DomainError("spacing must be >= 1")
    lam = int(params.get("block_length", 8 * L * g + 2))
    slack = Fraction(str(params.get("slack", "1/2")))
    if not 0 <= slack < 1:
        raise DomainError("slack must lie in [0, 1)")
    stride_top = 2 * L * g
    if lam < 4 * stride_top:
        raise ConstructionError(f"block length {lam} too small: need >= 4 * stride_L = {4 * stride_top}")
    fam = SeparatedFamily(L, lam, g, slack, horizon)
    rep = verify_family(fam, horizon)
    if not rep["pass"]:
        raise ConstructionError(f"family invariants fail at horizon {horizon}: "
                                f"{[c for c in rep['classes'] if not c['pass']] or rep}")
    return SeparatedFamily(L, lam, g, slack, horizon, rep)


# -- targets ---------------------------------------------------------------


def _signed(n: int) -> Iterator[int]:
    yield 0
    for j in range(1, n + 1):
        yield j
        yield -j


class TargetSet:
    """Deterministic enumeration of non-zero finitely supported rational vectors.

    Level ``t`` lists vectors supported in ``[0, t)`` with coefficients
    ``j/t``, ``|j| <= t*t``, skipping vectors seen at earlier levels. The
    union over all levels is dense in every finite-dimensional truncation.
    """

    def __init__(self, max_level: Optional[int] = None):
        self.max_level = max_level

    def __iter__(self) -> Iterator[SparseVector]:
        seen = set()
        t = 1
        while self.max_level is None or t <= self.max_level:
            for js in itertools.product(list(_signed(t * t)), repeat=t):
                if not any(js):
                    continue
                v = SparseVector({i: Fraction(j, t) for i, j in enumerate(js) if j})
                if v in seen:
                    continue
                seen.add(v)
                yield v
            t += 1

    def first(self, count: int) -> List[SparseVector]:
        return list(itertools.islice(iter(self), count))

    def to_dict(self) -> dict:
        return {"enumeration": "level t: support [0,t), grid j/t, |j| <= t^2", "max_level": self.max_level}


# -- criterion conditions ----------------------------------------------------


def _exact_prefix(table: PrefixTable, k: int) -> Optional[Fraction]:
    if table.mode == "pow2":
        e = table.exponent(k)
        return Fraction(2 ** e) if e >= 0 else Fraction(1, 2 ** -e)
    if table.mode == "rational":
        return table.exact(k)
    return None


def inverse_prefix_tail(table: PrefixTable, m: int, p, fhc: Optional[Verdict] = None):
    """Upper bound for ``sum_{k > m} P(k)**-p``, or None when not certified."""
    p = normalize_p(p)
    spec = table.spec
    fhc = fhc or check_frequent_hypercyclicity(table, p)
    if fhc.status != CERTIFIED_TRUE:
        return None
    run = spec.tail_run
    if run is not None and run.length is None:
        # sum_{k >= s} P(k)^-p = P(s-1)^-p r/(1-r) with r = w^-p
        s = max(run.start, m + 1)
        from .criteria import _inverse_power_prefix, _run_sum
        from .series import inverse_power

        r = inverse_power(run.value, p)
        head = _run_sum(table, m + 1, s, p) if s > m + 1 else 0
        return head + _inverse_power_prefix(table, s - 1, p) * r / (1 - r)
    if spec.series is not None:
        decl = spec.series()
        n = decl.first
        while decl.block(n)[1] <= m + 1:
            n += 1
        if decl.block(n)[0] > m + 1:
            return None
        return decl.tail(n, p)
    return None


def criterion_conditions_check(table: PrefixTable, x: SparseVector, p=1, horizon: Optional[int] = None,
                               fhc: Optional[Verdict] = None) -> dict:
    """The three criterion conditions for a finitely supported ``x``.

    (1) ``sum_n B^n x`` is a finite sum; (2) ``sum_n ||S^n x||_p^p`` partial
    sums with a tail bound; (3) ``B S x = x`` exactly.
    """
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    h = table.horizon if horizon is None else int(horizon)
    if h > table.horizon:
        raise HorizonError(h, table.horizon)
    top = x.max_index() if x else -1
    if top > h:
        raise HorizonError(top, h)

    # (1)
    vanish = not shift_apply(table, x, top + 1) if x else True
    cond1 = {"nonzero_terms": top + 1, "B^(max_index+1) x == 0": vanish, "pass": vanish}

    # (2): ||S^n x||^p = sum_j |x_j P(j)|^p P(n+j)^-p
    m_max = h - max(top, 0)
    logs, _ = table.log2s(0, h)
    inv = np.exp2(-float(p) * logs)
    weights = [(j, float(abs(v)) ** p * 2.0 ** (float(p) * logs[j])) for j, v in x.items()]
    terms = np.zeros(m_max + 1)
    for j, c in weights:
        terms += c * inv[j:j + m_max + 1]
    partial = np.cumsum(terms)
    marks = sorted({max(0, m_max >> i) for i in range(8)})
    fhc = fhc or check_frequent_hypercyclicity(table, p)
    coeff = math.fsum(c for _, c in weights)
    tail = None
    if fhc.status == CERTIFIED_TRUE:
        t = inverse_prefix_tail(table, m_max, p, fhc)
        tail = None if t is None else coeff * float(t) * (1 + 1e-12)
    if not x:
        status2, ok2 = "finite", True
    elif tail is not None:
        status2, ok2 = "converges", True
    elif fhc.status == CERTIFIED_FALSE:
        status2, ok2 = "diverges", False
    else:
        status2, ok2 = "undetermined", False
    cond2 = {
        "partial_sums": [[int(n), float(partial[n])] for n in marks] if m_max >= 0 else [],
        "through_n": m_max,
        "tail_bound": tail,
        "upper_bound": None if tail is None else float(partial[-1]) + tail,
        "fhc_series_status": fhc.status,
        "status": status2,
        "pass": ok2,
    }

    # (3)
    if x and top + 1 <= table.horizon:
        ok3 = shift_apply(table, right_inverse_apply(table, x, 1), 1) == x
    else:
        ok3 = True
    cond3 = {"B(Sx) == x": ok3, "pass": ok3}
    return {"vector": x.to_json(), "p": p, "condition_1": cond1, "condition_2": cond2,
            "condition_3": cond3, "pass": cond1["pass"] and ok2 and ok3}


# -- candidate -------------------------------------------------------------


@dataclass
class FHCCandidate:
    x: SparseVector
    targets: List[SparseVector]
    family: SeparatedFamily
    horizon: int
    p: object
    ledger: dict
    classes: Dict[int, np.ndarray]

    def export(self) -> dict:
        return self.x.to_json()

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "p": self.p, "support_size": len(self.x),
                "max_index": self.x.max_index() if self.x else None,
                "targets": [y.to_json() for y in self.targets],
                "family": self.family.to_dict(), "ledger": self.ledger}


def _width(y: SparseVector) -> int:
    return y.max_index() + 1 if y else 0


def build_fhc_candidate(table: PrefixTable, targets, family: SeparatedFamily, L: int, horizon: int,
                        p=1, fhc: Optional[Verdict] = None) -> FHCCandidate:
    """``x = sum_{l <= L} sum_{n in A_l, n <= horizon} S^n y_l``, exactly."""
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if L > family.L:
        raise DomainError(f"family has {family.L} classes, {L} requested")
    fhc = fhc or check_frequent_hypercyclicity(table, p)
    if fhc.status != CERTIFIED_TRUE:
        raise PreconditionError("frequent hypercyclicity of the shift is not certified", fhc)
    ys = targets.first(L) if isinstance(targets, TargetSet) else list(targets)[:L]
    if len(ys) < L:
        raise DomainError(f"{L} targets required, got {len(ys)}")
    for l, y in enumerate(ys, start=1):
        if not y:
            raise DomainError(f"target y_{l} is zero")
        if _width(y) > l + 1:
            raise DomainError(f"target y_{l} has support width {_width(y)} > {l + 1}, "
                              "wider than the class separation")
    need = horizon + max(_width(y) for y in ys) - 1
    if need > table.horizon:
        raise HorizonError(need, table.horizon)

    entries: Dict[int, Fraction] = {}
    classes: Dict[int, np.ndarray] = {}
    per_class = []
    tail_beyond = inverse_prefix_tail(table, horizon, p, fhc)
    for l, y in enumerate(ys, start=1):
        members = family.members(l, horizon)
        classes[l] = members
        scaled = []  # (j, y_j P(j))
        for j, v in y.items():
            pj = _exact_prefix(table, j)
            scaled.append((j, v * pj if pj is not None else None, v))
        # mass of S^n y is sum_j |y_j P(j)|^p P(n+j)^-p
        mass_terms = []
        for n in members.tolist():
            parts = []
            for j, c, v in scaled:
                s = n + j
                if s in entries:
                    raise InterferenceError(f"supports of S^n y overlap at index {s} (class {l}, n={n})")
                val = c / _exact_prefix(table, s) if c is not None else v / _window_product(table, j, s)
                entries[s] = val
                parts.append(abs(val) ** p if isinstance(p, int) else float(abs(val)) ** p)
            mass_terms.append(exact_sum(parts) if isinstance(p, int) else math.fsum(parts))
        mass = exact_sum(mass_terms) if isinstance(p, int) else math.fsum(mass_terms)
        coeff = sum(((abs(c) ** p if isinstance(p, int) else float(abs(c)) ** p) if c is not None
                     else float(abs(v)) ** p * 2.0 ** (p * table.log2(j)) for j, c, v in scaled), 0)
        tail = None if tail_beyond is None else coeff * tail_beyond
        # tail mass beyond N0 at geometric checkpoints: constructed terms past N0 plus the truncation tail
        marks = sorted({horizon >> i for i in range(1, 6)} | {horizon})
        coherence = []
        for n0 in marks:
            idx = int(np.searchsorted(members, n0, side="right"))
            beyond = exact_sum(mass_terms[idx:]) if isinstance(p, int) else math.fsum(mass_terms[idx:])
            coherence.append([n0, beyond + tail if tail is not None else beyond])
        monotone = all(float(b[1]) <= float(a[1]) for a, b in zip(coherence, coherence[1:]))
        per_class.append({
            "class": l, "target": y.to_json(), "members": int(members.size),
            "first_member": int(members[0]) if members.size else None,
            "last_member": int(members[-1]) if members.size else None,
            "mass": mass, "truncation_tail_estimate": tail,
            "tail_mass_checkpoints": coherence, "tail_mass_nonincreasing": monotone,
            "target_conditions": criterion_conditions_check(table, y, p, fhc=fhc)["pass"],
        })
    x = SparseVector._trusted(entries)
    norm = power_sum(x, p)
    total = (exact_sum(c["mass"] for c in per_class) if isinstance(p, int)
             else math.fsum(c["mass"] for c in per_class))
    if isinstance(p, int):
        consistent = norm == total
    else:
        consistent = math.isclose(norm, total, rel_tol=1e-12)
    ledger = {"classes": per_class, "total_mass": total, "norm_p_power": norm,
              "interference_corrections": 0, "consistent": consistent,
              "mass_arithmetic": "exact" if isinstance(p, int) else "binary64",
              "fhc_precondition": fhc.status}
    return FHCCandidate(x, ys, family, horizon, p, ledger, classes)


# -- visits ----------------------------------------------------------------


def _as_fraction(eps) -> Fraction:
    if isinstance(eps, float):
        return Fraction(repr(eps))
    return Fraction(eps)


def _correlate(a: np.ndarray, k: np.ndarray, m_count: int) -> Tuple[np.ndarray, int]:
    """``out[m] = sum_d k[d] a[m + d]`` for ``0 <= m < m_count``."""
    size = len(a) + len(k)
    nfft = 1 << max(1, (size - 1).bit_length())
    fa = np.fft.rfft(a, nfft)
    fk = np.fft.rfft(k[::-1], nfft)
    full = np.fft.irfft(fa * fk, nfft)
    # full[m + len(k) - 1] = sum_d k[d] a[m + d]
    return full[len(k) - 1:len(k) - 1 + m_count], nfft


def _exact_distance(table: PrefixTable, x: SparseVector, y: SparseVector, m: int, p):
    """``||B^m x - y||_p^p``; exact for integer p."""
    diff: Dict[int, object] = {}
    for s, v in x.items():
        if s >= m:
            diff[s - m] = v * _window_product(table, s - m, s)
    for i, v in y.items():
        diff[i] = diff.get(i, 0) - v
    if isinstance(p, int):
        return sum((abs(v) ** p for v in diff.values()), Fraction(0))
    return math.fsum(float(abs(v)) ** p for v in diff.values())


@dataclass
class VisitReport:
    mask: np.ndarray
    profile: DensityProfile
    rechecked: int
    margin: float

    def to_dict(self) -> dict:
        return {"visits": int(self.mask.sum()), "exact_rechecks": self.rechecked,
                "float_margin": self.margin, "profile": self.profile.to_dict()}


def visit_report(table: PrefixTable, x: SparseVector, y: SparseVector, eps, p, n: int,
                 checkpoints: Optional[Sequence[int]] = None) -> VisitReport:
    """Membership of ``{m <= n : ||B^m x - y||_p < eps}``.

    Distances are evaluated in binary64 with an FFT correlation for the part
    of ``B^m x`` outside the support of ``y``; every ``m`` whose float
    distance lies within the rounding margin of ``eps`` is recomputed
    exactly, so the membership sequence is exact for integer ``p``.
    """
    p = normalize_p(p)
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    eps_q = _as_fraction(eps)
    if eps_q <= 0:
        raise DomainError("eps must be positive")
    if n < 0:
        raise DomainError("N must be >= 0")
    top = x.max_index() if x else -1
    if top > table.horizon:
        raise HorizonError(top, table.horizon)
    w = _width(y)
    if w - 1 > table.horizon:
        raise HorizonError(w - 1, table.horizon)
    eps_p = float(eps_q) ** p

    # c_s = x_s P(s); a_s = |c_s|^p
    length = max(top + 1, n + w + 1, 1)
    c = np.zeros(length)
    for s, v in x.items():
        pref = _exact_prefix(table, s)
        c[s] = float(v * pref) if pref is not None else float(v) * 2.0 ** table.log2(s)
    a = np.abs(c) ** p
    span = max(top, w - 1, 0)
    logs, _ = table.log2s(0, span) if span <= table.horizon else table.log2s(0, table.horizon)
    kern = np.exp2(-float(p) * logs)
    kern[:w] = 0.0
    outside, nfft = _correlate(a, kern, n + 1)
    outside = np.maximum(outside, 0.0)
    inside = np.zeros(n + 1)
    ms = np.arange(n + 1)
    for i in range(w):
        yi = float(y[i])
        inside += np.abs(c[ms + i] * 2.0 ** -logs[i] - yi) ** p
    dist = inside + outside
    margin = max(32 * EPS * math.log2(nfft) * float(np.linalg.norm(a)) * float(np.linalg.norm(kern)),
                 1e-9 * eps_p)
    mask = dist < eps_p
    border = np.flatnonzero(np.abs(dist - eps_p) <= margin + 1e-12 * np.abs(inside))
    threshold = eps_q ** p if isinstance(p, int) else eps_p
    for m in border.tolist():
        mask[m] = _exact_distance(table, x, y, m, p) < threshold
    prof = profile_from_membership(mask, checkpoints)
    log.debug("visits: %d of %d, %d exact rechecks", int(mask.sum()), n + 1, border.size)
    return VisitReport(mask, prof, int(border.size), margin)


def measure_visit_density(table: PrefixTable, x: SparseVector, y: SparseVector, eps, p, n: int,
                          checkpoints: Optional[Sequence[int]] = None) -> DensityProfile:
    """Density profile of the visits of the orbit of ``x`` to the open ``eps``-ball at ``y``."""
    return visit_report(table, x, y, eps, p, n, checkpoints).profile
