"""JSON documents: schemas, parsing into exact objects, and canonical output.

Every rational crosses the boundary as a ``"p/q"`` string.  Output is
serialized with sorted keys so identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping

import jsonschema

from .choicecore import ChoiceError, Universe
from .linalg import format_rational, parse_rational

RATIONAL = {"type": "string", "pattern": r"^\s*-?\d+(/\d+)?\s*$"}
LABEL = {"type": "string", "minLength": 1, "maxLength": 1}
ALTERNATIVES = {"type": "array", "items": LABEL, "minItems": 1, "uniqueItems": True}
MASS = {"type": "object", "additionalProperties": RATIONAL}
PROBS = {"type": "object", "additionalProperties": {"type": "object", "additionalProperties": RATIONAL}}
KEYS = {"type": "array", "items": {"type": "string"}, "minItems": 1}
NUMBERS = {"type": "array", "items": {"type": "number"}, "minItems": 1}

_distribution = {
    "type": "object",
    "required": ["alternatives", "mass"],
    "properties": {
        "alternatives": ALTERNATIVES,
        "mass": MASS,
        "menus": KEYS,
        "T": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

_choice_rule = {
    "type": "object",
    "required": ["alternatives", "probabilities"],
    "properties": {"alternatives": ALTERNATIVES, "probabilities": PROBS, "menus": KEYS},
    "additionalProperties": False,
}

_ddc = {
    "type": "object",
    "required": ["alternatives", "T", "rho1", "cond"],
    "properties": {
        "alternatives": ALTERNATIVES,
        "T": {"type": "integer", "minimum": 1},
        "rho1": MASS,
        "cond": {"type": "array", "items": PROBS},
    },
    "additionalProperties": False,
}

SCHEMAS: dict[str, dict] = {
    "distribution": _distribution,
    "choice-rule": _choice_rule,
    "ddc": _ddc,
    "dag": {
        "type": "object",
        "required": ["nodes", "edges", "source", "sink"],
        "properties": {
            "nodes": {"type": "array", "items": {"type": "string"}},
            "edges": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "tail", "head"],
                    "properties": {"id": {"type": "integer"}, "tail": {"type": "string"}, "head": {"type": "string"}},
                    "additionalProperties": False,
                },
            },
            "source": {"type": "string"},
            "sink": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "quasiflow": {"type": "object", "propertyNames": {"pattern": r"^\d+$"}, "additionalProperties": RATIONAL},
    "bounds-query": {
        "type": "object",
        "required": ["functional"],
        "properties": {
            "functional": MASS,
            "base": _distribution,
            "rule": {"oneOf": [_choice_rule, _ddc]},
            "support": KEYS,
            "method": {"enum": ["ryser", "simplex"]},
        },
        "oneOf": [{"required": ["base"]}, {"required": ["rule"]}],
        "additionalProperties": False,
    },
    "order": {
        "type": "object",
        "required": ["order"],
        "properties": {"order": ALTERNATIVES},
        "additionalProperties": False,
    },
    "support": {
        "type": "object",
        "required": ["support"],
        "properties": {"alternatives": ALTERNATIVES, "support": KEYS},
        "additionalProperties": False,
    },
    "model-spec": {
        "type": "object",
        "required": ["model", "n"],
        "properties": {"model": {"enum": ["luce", "habit-submodel", "habit-full"]}, "n": {"type": "integer", "minimum": 1}},
        "additionalProperties": False,
    },
    "probe-config": {
        "type": "object",
        "properties": {
            "grid": {
                "type": "object",
                "required": ["lower", "upper", "points"],
                "properties": {
                    "lower": NUMBERS,
                    "upper": NUMBERS,
                    "points": {"oneOf": [{"type": "integer", "minimum": 1}, {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
                },
                "additionalProperties": False,
            },
            "points": {"type": "array", "items": NUMBERS},
            "tolerance": {"type": "number", "exclusiveMinimum": 0},
            "rays": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "from", "to"],
                    "properties": {"name": {"type": "string"}, "from": NUMBERS, "to": NUMBERS},
                    "additionalProperties": False,
                },
            },
            "auto_rays": {"type": "boolean"},
            "habit_curve_ray": {
                "type": "object",
                "properties": {"start": {"type": "number", "exclusiveMinimum": 1}, "variant": {"enum": ["consistent", "printed"]}},
                "additionalProperties": False,
            },
            "steps": {"type": "integer", "minimum": 2},
            "accumulation_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "match_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "margin": {"type": "number", "exclusiveMinimum": 0},
            "seed": {"type": "integer"},
            "collision": {
                "oneOf": [
                    {"type": "null"},
                    {
                        "type": "object",
                        "properties": {
                            "attempts": {"type": "integer", "minimum": 0},
                            "tolerance": {"type": "number", "exclusiveMinimum": 0},
                            "target": {"enum": ["submodel", "full"]},
                            "separation": {"type": "number", "exclusiveMinimum": 0},
                            "seed": {"type": "integer"},
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "additionalProperties": False,
    },
    "swap": {
        "type": "object",
        "required": ["plus", "minus"],
        "properties": {"plus": KEYS, "minus": KEYS, "k": {"type": "integer"}, "node": {"type": "string"}},
    },
    "error": {
        "type": "object",
        "required": ["error"],
        "properties": {
            "error": {
                "type": "object",
                "required": ["reason", "message"],
                "properties": {"reason": {"type": "string"}, "message": {"type": "string"}},
            }
        },
    },
}


class InputError(ValueError):
    """Malformed input document (CLI exit code 2)."""

    def __init__(self, message: str, reason: str = "malformed-input") -> None:
        super().__init__(message)
        self.reason = reason


def schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise InputError(f"unknown schema {name!r}; known: {', '.join(sorted(SCHEMAS))}", "unknown-schema")
    return SCHEMAS[name]


def check(doc: Any, name: str) -> Any:
    try:
        jsonschema.validate(doc, schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise InputError(f"{name} document invalid at {where}: {exc.message}", "schema-violation") from None
    return doc


def load(path: str, name: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}", "unreadable-input") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})", "invalid-json") from None
    return check(doc, name)


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# conversions


def rationals(m: Mapping[str, str]) -> dict[str, Fraction]:
    return {k: parse_rational(v) for k, v in m.items()}


def emit_rationals(m: Mapping[Any, Fraction], drop_zero: bool = False) -> dict[str, str]:
    return {str(k): format_rational(v) for k, v in m.items() if not (drop_zero and v == 0)}


def universe_of(doc: Mapping, max_size: int | None = None) -> Universe:
    kwargs = {} if max_size is None else {"max_size": max_size}
    return Universe.of(doc["alternatives"], **kwargs)


def read_distribution(doc: Mapping, max_size: int | None = None) -> tuple[Universe, dict[str, Fraction]]:
    u = universe_of(doc, max_size)
    return u, rationals(doc["mass"])


def write_distribution(u: Universe, mu: Mapping[str, Fraction], **extra: Any) -> dict:
    return {"alternatives": list(u.labels), "mass": emit_rationals(dict(sorted(mu.items())), drop_zero=True), **extra}


def read_rule(doc: Mapping, max_size: int | None = None) -> tuple[Universe, dict[str, dict[str, Fraction]]]:
    u = universe_of(doc, max_size)
    rule = {}
    for menu, row in doc["probabilities"].items():
        key = "".join(sorted(menu))
        if key in rule:
            raise ChoiceError(f"menu {key!r} listed twice")
        rule[key] = rationals(row)
    return u, rule


def write_rule(u: Universe, rule: Mapping[str, Mapping[str, Fraction]], **extra: Any) -> dict:
    return {
        "alternatives": list(u.labels),
        "probabilities": {m: emit_rationals(row) for m, row in sorted(rule.items())},
        **extra,
    }


def read_ddc(doc: Mapping, max_size: int | None = None):
    from .extmodels import DdcData

    u = universe_of(doc, max_size)
    cond = [{x: rationals(row) for x, row in table.items()} for table in doc["cond"]]
    return u, DdcData(list(u.labels), doc["T"], rationals(doc["rho1"]), cond)


def write_ddc(d) -> dict:
    return {
        "alternatives": list(d.alternatives),
        "T": d.horizon,
        "rho1": emit_rationals(d.rho1),
        "cond": [{x: emit_rationals(row) for x, row in table.items()} for table in d.cond],
    }


def read_order(doc: Mapping) -> list[str]:
    return list(doc["order"])
