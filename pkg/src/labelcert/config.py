"""Experiment configuration: a small TOML-like file format plus CLI overrides.

The grammar (documented in the README) is a strict subset of TOML: one
``key = value`` pair per line, one level of ``[section]`` tables, values that
are double-quoted strings, integers, floats, booleans, or flat lists of
those.  ``#`` starts a comment outside quotes.  Every CLI flag overrides the
corresponding file entry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .bias import (
    BiasSpec,
    PerturbationVector,
    TargetPredicate,
    apply_targeting,
    classification_delta,
    uniform_delta,
)
from .data import DatasetSchema, SplitConfig, read_delta_csv
from .errors import ParseError
from .linalg import Dataset

_KEY_RE = re.compile(r"^[A-Za-z0-9_\-]+$")
_INT_RE = re.compile(r"^[+-]?\d+$")


def _strip_comment(line: str) -> str:
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def _split_list(body: str, lineno: int) -> list[str]:
    items, buf, quoted = [], [], False
    for ch in body:
        if ch == '"':
            quoted = not quoted
        if ch == "," and not quoted:
            items.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if quoted:
        raise ParseError(f"line {lineno}: unterminated string in list")
    items.append("".join(buf))
    return [item.strip() for item in items if item.strip()]


def _parse_scalar(text: str, lineno: int):
    if text.startswith('"'):
        if len(text) < 2 or not text.endswith('"'):
            raise ParseError(f"line {lineno}: unterminated string {text!r}")
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse value {text!r}") from None


def _parse_value(text: str, lineno: int):
    if text.startswith("["):
        if not text.endswith("]"):
            raise ParseError(f"line {lineno}: unterminated list {text!r}")
        return [_parse_scalar(item, lineno) for item in _split_list(text[1:-1], lineno)]
    return _parse_scalar(text, lineno)


def parse_config_text(text: str) -> dict:
    """Parse the TOML-subset grammar into nested dicts."""
    root: dict = {}
    table = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"line {lineno}: malformed table header {line!r}")
            name = line[1:-1].strip()
            if not _KEY_RE.match(name):
                raise ParseError(f"line {lineno}: bad table name {name!r}")
            table = root.setdefault(name, {})
            if not isinstance(table, dict):
                raise ParseError(f"line {lineno}: {name!r} already used as a key")
            continue
        key, eq, rest = line.partition("=")
        key = key.strip()
        if not eq or not _KEY_RE.match(key):
            raise ParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        table[key] = _parse_value(rest.strip(), lineno)
    return root


def load_config_file(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs; built from a config file plus overrides."""

    task: str = "classification"
    data_path: str | None = None
    schema: DatasetSchema | None = None
    split: SplitConfig = field(default_factory=SplitConfig)
    bias_kind: str = "classification"  # uniform | classification | file
    bias_halfwidth: float = 0.0
    bias_file: str | None = None
    targeting: TargetPredicate | None = None
    budgets: tuple = ("1%",)
    epsilon: float | None = None
    lambda_grid: tuple = (0.0,)
    accuracy_tolerance: float = 0.0
    reference_budget: object = None
    seed: int = 0
    out_dir: str = "out"
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.task not in ("regression", "classification"):
            raise ValueError(f"task must be regression or classification, got {self.task!r}")
        if not self.budgets:
            raise ValueError("budget grid must be nonempty")
        if self.task == "regression" and self.epsilon is None:
            raise ValueError("regression experiments require an epsilon")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.bias_kind not in ("uniform", "classification", "file"):
            raise ValueError(f"unknown bias kind {self.bias_kind!r}")
        self.budgets = tuple(self.budgets)
        self.lambda_grid = tuple(float(l) for l in self.lambda_grid)
        if self.reference_budget is None:
            self.reference_budget = self.budgets[len(self.budgets) // 2]


def _schema_from_dict(d: dict) -> DatasetSchema:
    return DatasetSchema(
        label=d["label"],
        features=tuple(d.get("features", ())),
        group=d.get("group"),
        categorical=tuple(d.get("categorical", ())),
        add_bias_column=bool(d.get("add_bias_column", False)),
    )


def _targeting_from_dict(d: dict) -> TargetPredicate:
    if "group" in d:
        return TargetPredicate(value=d["group"], negate=bool(d.get("negate", False)))
    if "feature_index" in d:
        return TargetPredicate(
            value=d["value"],
            feature_index=int(d["feature_index"]),
            negate=bool(d.get("negate", False)),
        )
    raise ParseError("[targeting] needs either 'group' or 'feature_index' + 'value'")


def config_from_dict(doc: dict, **overrides) -> ExperimentConfig:
    """Assemble an ExperimentConfig from a parsed document plus keyword overrides.

    Overrides with value None are ignored, so CLI flags can be passed through
    unconditionally.
    """
    dataset = doc.get("dataset", {})
    split_doc = doc.get("split", {})
    bias_doc = doc.get("bias", {})
    kwargs = dict(
        task=doc.get("task", "classification"),
        data_path=dataset.get("path"),
        schema=_schema_from_dict(dataset) if "label" in dataset else None,
        split=SplitConfig(
            train=float(split_doc.get("train", 0.8)),
            val=float(split_doc.get("val", 0.1)),
            test=float(split_doc.get("test", 0.1)),
            seed=int(split_doc.get("seed", doc.get("seed", 0))),
            folds=int(split_doc.get("folds", 1)),
        ),
        bias_kind=bias_doc.get("kind", "classification"),
        bias_halfwidth=float(bias_doc.get("halfwidth", 0.0)),
        bias_file=bias_doc.get("file"),
        targeting=_targeting_from_dict(doc["targeting"]) if "targeting" in doc else None,
        budgets=tuple(doc.get("budgets", ("1%",))),
        epsilon=float(doc["epsilon"]) if "epsilon" in doc else None,
        lambda_grid=tuple(doc.get("lambda_grid", (0.0,))),
        accuracy_tolerance=float(doc.get("accuracy_tolerance", 0.0)),
        reference_budget=doc.get("reference_budget"),
        seed=int(doc.get("seed", 0)),
        out_dir=doc.get("out_dir", "out"),
    )
    for key, value in overrides.items():
        if value is not None:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_experiment_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    doc = load_config_file(path) if path is not None else {}
    return config_from_dict(doc, **overrides)


def resolve_budget(entry, train_size: int) -> int:
    """Turn a budget grid entry into a label count.

    Percentages of the training size round to nearest and never collapse a
    nonzero percentage to zero labels.
    """
    if isinstance(entry, str):
        text = entry.strip()
        if text.endswith("%"):
            pct = float(text[:-1])
            if pct < 0:
                raise ValueError(f"budget percentage must be >= 0, got {entry!r}")
            count = int(pct / 100.0 * train_size + 0.5)
            if pct > 0:
                count = max(count, 1)
        else:
            try:
                count = int(text)
            except ValueError:
                raise ValueError(f"budget entry {entry!r} must be an integer or 'N%'") from None
            if count < 0:
                raise ValueError(f"budget must be >= 0, got {entry!r}")
    else:
        count = int(entry)
        if count < 0:
            raise ValueError(f"budget must be >= 0, got {entry!r}")
    if count > train_size:
        raise ValueError(f"budget {entry!r} exceeds the {train_size} training labels")
    return count


def build_delta(config: ExperimentConfig, train: Dataset) -> PerturbationVector:
    """Materialize the configured perturbation vector for a training split."""
    if config.bias_kind == "uniform":
        delta = uniform_delta(train.n, config.bias_halfwidth)
    elif config.bias_kind == "classification":
        delta = classification_delta(train.y)
    else:
        if config.bias_file is None:
            raise ValueError("bias kind 'file' requires a file path")
        lo, hi = read_delta_csv(config.bias_file)
        delta = PerturbationVector(lo, hi)
    if config.targeting is not None:
        delta = apply_targeting(delta, train, config.targeting)
    return delta


def build_spec(config: ExperimentConfig, train: Dataset, budget_entry) -> BiasSpec:
    return BiasSpec(build_delta(config, train), resolve_budget(budget_entry, train.n))
