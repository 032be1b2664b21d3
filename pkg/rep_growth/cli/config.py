"""
Experiment configuration: loading, schema validation and semantic checks.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import yaml
from jsonschema import Draft7Validator

from rep_growth.core.cartan import CartanTypeError, RootDatum, root_datum
from rep_growth.core.dense import MAX_DENSE_RANK
from rep_growth.core.tensor_growth import (
    BACKENDS,
    DEFAULT_MEMORY_BUDGET,
    MODES,
    RepSpec,
    RepSpecError,
    make_rep_spec,
)
from rep_growth.core.gaussian_asymptotics import DEFAULT_TRUNCATION

logger = logging.getLogger(__name__)

EXPERIMENT_SCHEMA = {
    "type": "object",
    "required": ["group", "rep", "n_max"],
    "properties": {
        "group": {"type": "string", "minLength": 1},
        "rep": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["highest_weight"],
                "properties": {
                    "highest_weight": {"type": "array", "items": {"type": "integer"}},
                    "multiplicity": {"type": "integer", "minimum": 1},
                },
                "additionalProperties": False,
            },
        },
        "n_max": {"type": "integer", "minimum": 1},
        "mode": {"enum": list(MODES)},
        "window": {
            "type": "array",
            "items": {"type": "integer"},
            "minItems": 2,
            "maxItems": 2,
        },
        "output_dir": {"type": "string"},
        "memory_budget_bytes": {"type": "integer", "minimum": 1},
        "truncation": {"type": "number", "exclusiveMinimum": 0},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "seed": {"type": "integer"},
        "backend": {"enum": list(BACKENDS)},
        "timing": {"type": "boolean"},
        "synthetic": {
            "type": "object",
            "required": ["exponent"],
            "properties": {
                "C": {"type": "number", "exclusiveMinimum": 0},
                "exponent": {"type": "number"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(Exception):
    """Raised for unreadable, schema-invalid or inconsistent configs"""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class ExperimentConfig:
    group: str
    rep: List[Tuple[Tuple[int, ...], int]]
    n_max: int
    mode: str = "exact"
    window: Optional[Tuple[int, int]] = None
    output_dir: Path = Path("./output")
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    truncation: float = DEFAULT_TRUNCATION
    tolerance: Optional[float] = None
    n_list: List[int] = field(default_factory=list)
    seed: int = 0
    backend: str = "auto"
    timing: bool = False
    synthetic: Optional[Dict[str, float]] = None

    @property
    def datum(self) -> RootDatum:
        return root_datum(self.group)

    def spec(self) -> RepSpec:
        return make_rep_spec(self.datum, self.rep)

    def fit_tolerance(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return 0.1 * max(1, self.datum.u)


def format_path(parts: Sequence[Union[str, int]]) -> str:
    """Render a jsonschema path as ``rep[1].highest_weight``"""
    text = ""
    for part in parts:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text


def read_document(path: Path) -> Dict[str, Any]:
    """
    Read a JSON or YAML config file into a dict.

    Raises:
        ConfigError: If the file is missing, unparsable or not a mapping
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}")
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"Invalid config syntax{where}: {getattr(e, 'problem', e)}")
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("Config must be a mapping")
    return document


def apply_overrides(
    document: Dict[str, Any],
    group: Optional[str] = None,
    rep: Optional[str] = None,
    n_max: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """Return a copy of ``document`` with command-line values substituted"""
    merged = dict(document)
    if group is not None:
        merged["group"] = group
    if rep is not None:
        try:
            merged["rep"] = json.loads(rep)
        except json.JSONDecodeError as e:
            raise ConfigError(f"--rep is not valid JSON: {e.msg}", "rep")
    if n_max is not None:
        merged["n_max"] = n_max
    if output_dir is not None:
        merged["output_dir"] = output_dir
    return merged


def validate_document(document: Dict[str, Any]) -> ExperimentConfig:
    """
    Validate against EXPERIMENT_SCHEMA, then check the document against its group.

    Raises:
        ConfigError: On the first failure, carrying the field path
    """
    errors = sorted(
        Draft7Validator(EXPERIMENT_SCHEMA).iter_errors(document),
        key=lambda e: (list(map(str, e.absolute_path)), e.message),
    )
    if errors:
        first = errors[0]
        raise ConfigError(first.message, format_path(first.absolute_path))

    try:
        datum = root_datum(document["group"])
    except CartanTypeError as e:
        raise ConfigError(str(e), "group")

    rep = []
    for index, summand in enumerate(document["rep"]):
        weight = tuple(summand["highest_weight"])
        if len(weight) != datum.r:
            raise ConfigError(
                f"Summand {index}: highest weight has length {len(weight)}, "
                f"expected {datum.r} for {datum.cartan_type}",
                f"rep[{index}].highest_weight",
            )
        rep.append((weight, int(summand.get("multiplicity", 1))))
    try:
        make_rep_spec(datum, rep)
    except RepSpecError as e:
        raise ConfigError(str(e), "rep")

    n_max = document["n_max"]
    window = document.get("window")
    if window is not None:
        n_lo, n_hi = window
        if not 1 <= n_lo <= n_hi <= n_max:
            raise ConfigError(f"Window {window} must lie within [1, {n_max}]", "window")
        window = (n_lo, n_hi)

    backend = document.get("backend", "auto")
    if backend == "dense" and datum.r > MAX_DENSE_RANK:
        raise ConfigError(
            f"Dense backend supports total rank <= {MAX_DENSE_RANK}, got {datum.r}", "backend"
        )

    return ExperimentConfig(
        group=document["group"],
        rep=rep,
        n_max=n_max,
        mode=document.get("mode", "exact"),
        window=window,
        output_dir=Path(document.get("output_dir", "./output")),
        memory_budget_bytes=document.get("memory_budget_bytes", DEFAULT_MEMORY_BUDGET),
        truncation=float(document.get("truncation", DEFAULT_TRUNCATION)),
        tolerance=document.get("tolerance"),
        n_list=list(document.get("n_list", [n_max])),
        seed=document.get("seed", 0),
        backend=backend,
        timing=document.get("timing", False),
        synthetic=document.get("synthetic"),
    )


def load_config(path: Optional[Union[str, Path]] = None, **overrides) -> ExperimentConfig:
    """
    Load, override and validate an experiment config.

    Args:
        path: Config file; may be omitted when the overrides supply every
            required field
        **overrides: ``group``, ``rep`` (JSON text), ``n_max``, ``output_dir``

    Returns:
        ExperimentConfig: The validated config

    Raises:
        ConfigError: If anything about the config is invalid
    """
    document = read_document(Path(path)) if path else {}
    config = validate_document(apply_overrides(document, **overrides))
    logger.debug(f"Loaded config for {config.group} with n_max={config.n_max}")
    return config
