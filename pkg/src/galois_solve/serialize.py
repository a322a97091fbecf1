"""Problem and report files.

Problems are JSON documents; infinities travel as the strings "-inf"
and "+inf" to stay inside standard JSON.  Unknown fields in problem
files are rejected rather than ignored, so typos fail loudly.
"""

from __future__ import annotations

import json
import math
from typing import Optional, Tuple

from . import extreal
from .engine import FunctionOnSpace
from .errors import ValidationError
from .kernel import (
    FenchelDot,
    GridSpec,
    Kernel,
    OmegaLipschitz,
    Quadratic,
    WeightedPower,
    build_grid_kernel,
    build_moreau,
    build_table,
)
from .solver import Problem, Solution

_PROBLEM_KEYS = {"x", "y", "kernel", "g", "x_restrict", "tolerance"}
_GRID_FAMILIES = {"fenchel_dot", "quadratic", "omega_lipschitz", "weighted_power"}


def problem_from_dict(doc: dict) -> Problem:
    if not isinstance(doc, dict):
        raise ValidationError("problem file must be a JSON object")
    unknown = set(doc) - _PROBLEM_KEYS
    if unknown:
        raise ValidationError(f"unknown problem fields: {sorted(unknown)}")
    if "kernel" not in doc or "g" not in doc:
        raise ValidationError("problem file needs 'kernel' and 'g'")
    kernel = _kernel_from_dict(doc["kernel"], doc.get("x"), doc.get("y"))

    gmap = doc["g"]
    if not isinstance(gmap, dict):
        raise ValidationError("'g' must map x labels to values")
    g = FunctionOnSpace.from_mapping(
        kernel.x_labels, {k: extreal.from_json(v) for k, v in gmap.items()}
    )
    x_restrict = doc.get("x_restrict")
    if x_restrict is not None:
        x_restrict = tuple(str(l) for l in x_restrict)
    tol = doc.get("tolerance", extreal.DEFAULT_TOL)
    if not isinstance(tol, (int, float)) or isinstance(tol, bool):
        raise ValidationError("'tolerance' must be a number")
    return Problem(kernel, g, x_restrict=x_restrict, tolerance=float(tol))


def _kernel_from_dict(spec: dict, x_labels, y_labels) -> Kernel:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValidationError("'kernel' must be an object with a 'type'")
    kind = spec["type"]
    if kind == "table":
        _require_keys(spec, {"type", "entries"})
        return build_table(spec["entries"], x_labels, y_labels)
    if kind == "moreau":
        _require_keys(spec, {"type", "bbar"})
        return build_moreau(spec["bbar"], x_labels, y_labels)
    if kind == "grid":
        _require_keys(spec, {"type", "family", "x_grid", "y_grid", "params"})
        if x_labels is not None or y_labels is not None:
            raise ValidationError("grid kernels generate their own labels")
        family = _family_from_dict(spec["family"], spec.get("params") or {})
        return build_grid_kernel(
            family,
            GridSpec.from_dict(spec["x_grid"]),
            GridSpec.from_dict(spec["y_grid"]),
        )
    raise ValidationError(f"unknown kernel type: {kind!r}")


def _require_keys(spec: dict, allowed: set):
    unknown = set(spec) - allowed
    if unknown:
        raise ValidationError(f"unknown kernel fields: {sorted(unknown)}")
    missing = {k for k in allowed if k != "params"} - set(spec)
    if missing:
        raise ValidationError(f"kernel is missing fields: {sorted(missing)}")


def _family_from_dict(name: str, params: dict):
    if name not in _GRID_FAMILIES:
        raise ValidationError(
            f"unknown kernel family {name!r}; choices: {sorted(_GRID_FAMILIES)}"
        )
    if name == "fenchel_dot":
        return FenchelDot()
    if name == "quadratic":
        return Quadratic(a=float(params["a"]))
    if name == "omega_lipschitz":
        return OmegaLipschitz(
            a=float(params.get("a", 1.0)), q=float(params.get("q", 1.0))
        )
    return WeightedPower(p=float(params["p"]))


def load_problem(path: str) -> Problem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"problem file is not valid JSON: {exc}") from exc
    return problem_from_dict(doc)


# ----------------------------------------------------------------------
# report files


def function_to_json(f: Optional[FunctionOnSpace]):
    if f is None:
        return None
    return {l: extreal.to_json(v) for l, v in f.as_dict().items()}


def solution_to_report(sol: Solution) -> dict:
    """The wire form of a solution; round-trips through JSON losslessly."""
    cover = {
        "sets": {y: sorted(sol.family.sets[y]) for y in sol.family.index_pool},
        "essential": list(sol.cover.essential),
        "minimal": sol.cover.is_minimal,
        "uncovered": list(sol.cover.uncovered),
    }
    return {
        "status": sol.status.value,
        "f_min": function_to_json(sol.f_min),
        "cover": cover,
        "witness_alt": function_to_json(sol.witness_alt),
        "residual": {
            x: [extreal.to_json(gv), extreal.to_json(pv)]
            for x, (gv, pv) in sol.residual.items()
        },
        "caveats": list(sol.caveats),
    }


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def parse_report(text: str) -> dict:
    return json.loads(text)


def parse_function_arg(arg: str, labels: Tuple[str, ...]) -> FunctionOnSpace:
    """A function given inline as JSON, or in a file via an ``@path``
    argument.  Values are numbers or the infinity strings."""
    if arg.startswith("@"):
        with open(arg[1:]) as fh:
            doc = json.load(fh)
    else:
        try:
            doc = json.loads(arg)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"inline function is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("a function must be a JSON object of label: value")
    return FunctionOnSpace.from_mapping(
        labels, {k: extreal.from_json(v) for k, v in doc.items()}
    )
