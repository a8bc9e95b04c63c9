"""Weight-spec files and the configs that rebuild rules for replay.

A spec file is JSON::

    {"kind": "blocks", "runs": [["2", 3], ["1", "inf"]]}
    {"kind": "builtin", "name": "block4-geometric", "params": {"base": 3}}

Run values are decimal or ``p/q`` strings parsed as exact rationals; the
length ``"inf"`` is allowed only in the final run.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Union

from .constructions import example8_k_sequence, example8_weights, menet_c_rule, menet_weights
from .criteria import CRule, KSequence, constant_c_rule, explicit_k_sequence
from .errors import DomainError, SpecParseError
from .weights import WeightSpec, explicit_runs

BUILTIN_ALIASES = {"menet": "menet", "block4-geometric": "block4-geometric", "example8": "block4-geometric"}
BUILTIN_PARAMS = {"menet": {}, "block4-geometric": {"base": 3}}


def _rational(text: Any, field: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise SpecParseError(f"expected a decimal string, got {text!r}", field)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise SpecParseError(f"not a rational number: {text!r}", field) from None


def builtin_spec(name: str, params: Mapping | None = None) -> WeightSpec:
    key = BUILTIN_ALIASES.get(name)
    if key is None:
        raise SpecParseError(f"unknown builtin {name!r}; known: {sorted(BUILTIN_PARAMS)}", "name")
    merged = dict(BUILTIN_PARAMS[key])
    for k, v in (params or {}).items():
        if k not in merged:
            raise SpecParseError(f"builtin {key!r} has no parameter {k!r}", f"params.{k}")
        merged[k] = v
    if key == "menet":
        return menet_weights()
    base = merged["base"]
    if isinstance(base, bool) or not isinstance(base, int) or base < 2:
        raise SpecParseError(f"base must be an integer >= 2, got {base!r}", "params.base")
    return example8_weights(base)


def spec_from_config(cfg: Any) -> WeightSpec:
    if not isinstance(cfg, Mapping):
        raise SpecParseError("spec must be a JSON object", "")
    kind = cfg.get("kind")
    if kind == "builtin":
        extra = set(cfg) - {"kind", "name", "params"}
        if extra:
            raise SpecParseError(f"unknown fields {sorted(extra)}", sorted(extra)[0])
        params = cfg.get("params", {})
        if not isinstance(params, Mapping):
            raise SpecParseError("params must be an object", "params")
        return builtin_spec(cfg.get("name", ""), params)
    if kind == "blocks":
        extra = set(cfg) - {"kind", "runs", "name"}
        if extra:
            raise SpecParseError(f"unknown fields {sorted(extra)}", sorted(extra)[0])
        runs = cfg.get("runs")
        if not isinstance(runs, list) or not runs:
            raise SpecParseError("runs must be a non-empty list", "runs")
        parsed = []
        for i, run in enumerate(runs):
            if not isinstance(run, (list, tuple)) or len(run) != 2:
                raise SpecParseError("each run must be [value, length]", f"runs[{i}]")
            value = _rational(run[0], f"runs[{i}].value")
            length = run[1]
            if length == "inf":
                length = None
            elif isinstance(length, str):
                try:
                    length = int(length)
                except ValueError:
                    raise SpecParseError(f"length must be an integer or \"inf\", got {length!r}",
                                         f"runs[{i}].length") from None
            parsed.append((value, length))
        for i, (value, _) in enumerate(parsed):
            if value <= 0:
                raise SpecParseError(f"weight must be positive, got {value}", f"runs[{i}].value")
        return explicit_runs(parsed, name=str(cfg.get("name", "blocks")))
    raise SpecParseError(f"kind must be \"blocks\" or \"builtin\", got {kind!r}", "kind")


def parse_spec(text: str) -> WeightSpec:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                             f"line {exc.lineno}") from None
    return spec_from_config(cfg)


def load_spec(path: Union[str, Path]) -> WeightSpec:
    return parse_spec(Path(path).read_text())


# -- rule configs --------------------------------------------------------


def _replayable(cfg: Mapping, what: str) -> None:
    if not cfg.get("replayable", True):
        raise DomainError(f"{what} {cfg.get('name')!r} was caller-supplied and cannot be rebuilt")


def c_rule_from_config(cfg: Mapping) -> CRule:
    _replayable(cfg, "C-rule")
    name = cfg["name"]
    if name == "menet":
        return menet_c_rule()
    if name.startswith("constant-"):
        return constant_c_rule(Fraction(cfg["params"]["C"]))
    raise DomainError(f"unknown C-rule {name!r}")


def k_sequence_from_config(cfg: Mapping) -> KSequence:
    _replayable(cfg, "k-sequence")
    name = cfg["name"]
    if name == "block4-markers":
        return example8_k_sequence(int(cfg["params"].get("base", 3)))
    if name == "explicit":
        return explicit_k_sequence(cfg["params"]["ks"])
    raise DomainError(f"unknown k-sequence {name!r}")
