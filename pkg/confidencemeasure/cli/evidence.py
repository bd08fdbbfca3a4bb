"""
Evidence files: JSON descriptions of the sources to be combined.

    {
      "grid": {"min": -20, "max": 20, "points": 4001},
      "sources": [
        {"id": "y1", "kind": "normal_sample", "data": [0.523, 2.460, 1.119]},
        {"id": "a1", "kind": "subjective_normal", "mean": 0, "sd": 3}
      ]
    }

Every field error is reported with its path, e.g. `sources[1].sd`.
"""

import json
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Union

from confidencemeasure.core.core import ParameterGrid, Provenance, SignificanceCurve, SourceKind
from confidencemeasure.elicitation.elicitation import (
    ElicitedIntervals,
    ElicitedPoints,
    HypotheticalKind,
    HypotheticalModel,
    TailCompletion,
    sf_from_bayes_posterior,
    sf_from_elicited_intervals,
    sf_from_elicited_pvalues,
    sf_from_hypothetical_data,
)
from confidencemeasure.logging.exceptions import VALIDATION_EXCEPTIONS, InvalidInputException
from confidencemeasure.models.models import (
    SampleSummary,
    sf_normal_direct,
    sf_normal_known_sigma,
    sf_student_t,
    sf_student_t_summary,
)


class EvidenceKind(str, Enum):
    NORMAL_SAMPLE = "normal_sample"
    SUMMARY_T = "summary_t"
    SUBJECTIVE_NORMAL = "subjective_normal"
    ELICITED_PVALUES = "elicited_pvalues"
    ELICITED_INTERVALS = "elicited_intervals"
    HYPOTHETICAL_DATA = "hypothetical_data"
    POSTERIOR = "posterior"


REQUIRED_FIELDS: dict[EvidenceKind, tuple[str, ...]] = {
    EvidenceKind.NORMAL_SAMPLE: ("data",),
    EvidenceKind.SUMMARY_T: ("n", "mean", "sd"),
    EvidenceKind.SUBJECTIVE_NORMAL: ("mean", "sd"),
    EvidenceKind.ELICITED_PVALUES: ("points",),
    EvidenceKind.ELICITED_INTERVALS: ("median", "entries"),
    EvidenceKind.HYPOTHETICAL_DATA: ("model", "data"),
    EvidenceKind.POSTERIOR: ("points",),
}

# curves of these kinds are built on their own elicited nodes
OWN_NODE_KINDS: frozenset[EvidenceKind] = frozenset(
    {EvidenceKind.ELICITED_PVALUES, EvidenceKind.ELICITED_INTERVALS, EvidenceKind.POSTERIOR}
)


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInputException(where, f"expected a number, got {json.dumps(value)}")
    return float(value)


def _number(record: Mapping[str, Any], key: str, path: str) -> float:
    return _as_number(record[key], f"{path}.{key}")


def _integer(record: Mapping[str, Any], key: str, path: str) -> int:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInputException(f"{path}.{key}", f"expected an integer, got {json.dumps(value)}")
    return value


def _numbers(record: Mapping[str, Any], key: str, path: str) -> list[float]:
    value = record[key]
    if not isinstance(value, list) or not value:
        raise InvalidInputException(f"{path}.{key}", "expected a non-empty list of numbers")
    return [_as_number(item, f"{path}.{key}[{i}]") for i, item in enumerate(value)]


def _rows(record: Mapping[str, Any], key: str, path: str, width: int) -> list[tuple[float, ...]]:
    value = record[key]
    if not isinstance(value, list) or not value:
        raise InvalidInputException(f"{path}.{key}", f"expected a non-empty list of {width}-element lists")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != width:
            raise InvalidInputException(f"{path}.{key}[{i}]", f"expected a list of {width} numbers")
        rows.append(tuple(_as_number(item, f"{path}.{key}[{i}][{j}]") for j, item in enumerate(row)))
    return rows


def _tails(record: Mapping[str, Any], path: str) -> str:
    tails = record.get("tails", TailCompletion.EXPONENTIAL.value)
    if tails not in {completion.value for completion in TailCompletion}:
        raise InvalidInputException(f"{path}.tails", f"expected exponential or none, got {json.dumps(tails)}")
    return str(tails)


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    points: int

    @classmethod
    def parse(cls, record: Any, path: str) -> "GridSpec":
        if not isinstance(record, Mapping):
            raise InvalidInputException(path, "expected an object with min, max and points")
        missing = [key for key in ("min", "max", "points") if key not in record]
        if missing:
            raise InvalidInputException(path, f"missing field(s) {', '.join(missing)}")
        return cls(_number(record, "min", path), _number(record, "max", path), _integer(record, "points", path))

    def to_grid(self) -> ParameterGrid:
        return ParameterGrid.linspace(self.lower, self.upper, self.points)


@dataclass(frozen=True)
class EvidenceSource:
    """
    One tagged evidence record. `fields` holds the kind-specific values,
    already type-checked.
    """

    source_id: str
    kind: EvidenceKind
    fields: Mapping[str, Any]
    grid: Optional[GridSpec] = None
    path: str = "sources[0]"

    @classmethod
    def parse(cls, record: Any, path: str, default_id: str) -> "EvidenceSource":
        if not isinstance(record, Mapping):
            raise InvalidInputException(path, "expected an object")
        if "kind" not in record:
            raise InvalidInputException(f"{path}.kind", "missing field")
        try:
            kind = EvidenceKind(record["kind"])
        except ValueError:
            choices = ", ".join(option.value for option in EvidenceKind)
            unknown = json.dumps(record["kind"])
            raise InvalidInputException(f"{path}.kind", f"unknown kind {unknown}, use {choices}") from None

        missing = [key for key in REQUIRED_FIELDS[kind] if key not in record]
        if missing:
            raise InvalidInputException(path, f"{kind.value} requires field(s) {', '.join(missing)}")

        source_id = record.get("id", default_id)
        if not isinstance(source_id, str) or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_\-]*", source_id):
            raise InvalidInputException(f"{path}.id", f"ids are identifiers, got {json.dumps(source_id)}")

        if "grid" in record and kind in OWN_NODE_KINDS:
            raise InvalidInputException(f"{path}.grid", f"{kind.value} curves keep their elicited nodes")
        grid = GridSpec.parse(record["grid"], f"{path}.grid") if "grid" in record else None
        return cls(source_id, kind, _parse_fields(kind, record, path), grid, path)

    def build(self, default_grid: Optional[GridSpec] = None) -> SignificanceCurve:
        """
        Builds the source's curve. Parametric sources use the source grid, then
        the file grid, then their default quantile-spaced grid; elicited
        sources keep their own nodes.

        Raises:
            InvalidInputException: the record violates a precondition of its builder; the field path is attached.
        """
        spec = self.grid if self.grid is not None else default_grid
        grid = spec.to_grid() if spec is not None else None
        try:
            return _BUILDERS[self.kind](self, grid)
        except VALIDATION_EXCEPTIONS as exc:
            raise InvalidInputException(f"{self.path} ({self.source_id})", str(exc)) from exc


def _parse_fields(kind: EvidenceKind, record: Mapping[str, Any], path: str) -> dict[str, Any]:
    if kind is EvidenceKind.NORMAL_SAMPLE:
        fields: dict[str, Any] = {"data": _numbers(record, "data", path)}
        if record.get("sigma") is not None:
            fields["sigma"] = _number(record, "sigma", path)
        return fields
    if kind is EvidenceKind.SUMMARY_T:
        return {
            "n": _integer(record, "n", path),
            "mean": _number(record, "mean", path),
            "sd": _number(record, "sd", path),
        }
    if kind is EvidenceKind.SUBJECTIVE_NORMAL:
        return {"mean": _number(record, "mean", path), "sd": _number(record, "sd", path)}
    if kind is EvidenceKind.ELICITED_PVALUES:
        return {"points": _rows(record, "points", path, 2), "tails": _tails(record, path)}
    if kind is EvidenceKind.POSTERIOR:
        matching = record.get("matching", False)
        if not isinstance(matching, bool):
            raise InvalidInputException(f"{path}.matching", "expected true or false")
        return {"points": _rows(record, "points", path, 2), "tails": _tails(record, path), "matching": matching}
    if kind is EvidenceKind.ELICITED_INTERVALS:
        return {
            "median": _number(record, "median", path),
            "entries": _rows(record, "entries", path, 3),
            "tails": _tails(record, path),
        }
    return {"data": _numbers(record, "data", path), "model": _parse_model(record["model"], f"{path}.model")}


def _parse_model(record: Any, path: str) -> HypotheticalModel:
    if not isinstance(record, Mapping) or "kind" not in record:
        raise InvalidInputException(path, "expected an object with a kind")
    try:
        kind = HypotheticalKind(record["kind"])
    except ValueError:
        raise InvalidInputException(f"{path}.kind", "expected known_sigma or student_t") from None
    sigma = _number(record, "sigma", path) if record.get("sigma") is not None else None
    return HypotheticalModel(kind, sigma)


def _subjective(source: EvidenceSource) -> Provenance:
    return Provenance(source.source_id, SourceKind.SUBJECTIVE)


def _objective(source: EvidenceSource) -> Provenance:
    return Provenance(source.source_id, SourceKind.OBJECTIVE)


def _build_normal_sample(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    data = source.fields["data"]
    if "sigma" in source.fields:
        summary = SampleSummary.from_sample(data)
        return sf_normal_known_sigma(summary, source.fields["sigma"], grid=grid, provenance=_objective(source))
    return sf_student_t(data, grid=grid, provenance=_objective(source))


def _build_summary_t(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    summary = SampleSummary(source.fields["n"], source.fields["mean"], source.fields["sd"])
    return sf_student_t_summary(summary, grid=grid, provenance=_objective(source))


def _build_subjective_normal(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    return sf_normal_direct(source.fields["mean"], source.fields["sd"], grid=grid, provenance=_subjective(source))


def _build_elicited_pvalues(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    return sf_from_elicited_pvalues(
        ElicitedPoints(tuple(source.fields["points"])), TailCompletion(source.fields["tails"]), _subjective(source)
    )


def _build_elicited_intervals(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    return sf_from_elicited_intervals(
        ElicitedIntervals(tuple(source.fields["entries"])),
        source.fields["median"],
        TailCompletion(source.fields["tails"]),
        _subjective(source),
    )


def _build_hypothetical_data(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    return sf_from_hypothetical_data(
        source.fields["model"], source.fields["data"], grid=grid, provenance=_subjective(source)
    )


def _build_posterior(source: EvidenceSource, grid: Optional[ParameterGrid]) -> SignificanceCurve:
    return sf_from_bayes_posterior(
        ElicitedPoints(tuple(source.fields["points"])),
        source.fields["matching"],
        TailCompletion(source.fields["tails"]),
        source.source_id,
    )


_BUILDERS = {
    EvidenceKind.NORMAL_SAMPLE: _build_normal_sample,
    EvidenceKind.SUMMARY_T: _build_summary_t,
    EvidenceKind.SUBJECTIVE_NORMAL: _build_subjective_normal,
    EvidenceKind.ELICITED_PVALUES: _build_elicited_pvalues,
    EvidenceKind.ELICITED_INTERVALS: _build_elicited_intervals,
    EvidenceKind.HYPOTHETICAL_DATA: _build_hypothetical_data,
    EvidenceKind.POSTERIOR: _build_posterior,
}


@dataclass(frozen=True)
class EvidenceFile:
    sources: tuple[EvidenceSource, ...]
    grid: Optional[GridSpec] = None
    origin: str = "<evidence>"

    @classmethod
    def from_dict(cls, data: Any, origin: str = "<evidence>") -> "EvidenceFile":
        if not isinstance(data, Mapping):
            raise InvalidInputException(origin, "the top level must be an object")
        raw_sources = data.get("sources")
        if not isinstance(raw_sources, list) or not raw_sources:
            raise InvalidInputException("sources", "at least one source is required")

        sources = tuple(
            EvidenceSource.parse(record, f"sources[{i}]", f"s{i + 1}") for i, record in enumerate(raw_sources)
        )
        ids = [source.source_id for source in sources]
        duplicated = sorted({source_id for source_id in ids if ids.count(source_id) > 1})
        if duplicated:
            raise InvalidInputException("sources", f"duplicate id(s) {', '.join(duplicated)}")

        grid = GridSpec.parse(data["grid"], "grid") if data.get("grid") is not None else None
        return cls(sources, grid, origin)

    @classmethod
    def loads(cls, text: str, origin: str = "<evidence>") -> "EvidenceFile":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputException(f"{origin}:{exc.lineno}:{exc.colno}", exc.msg) from None
        return cls.from_dict(data, origin)

    @classmethod
    def load(cls, path: str) -> "EvidenceFile":
        with open(path, encoding="utf-8") as handle:
            return cls.loads(handle.read(), origin=path)

    @property
    def source_ids(self) -> list[str]:
        return [source.source_id for source in self.sources]

    def curves(self) -> dict[str, SignificanceCurve]:
        """
        Curves of every source keyed by id, in file order.
        """
        return {source.source_id: source.build(self.grid) for source in self.sources}


TreeNode = Union[str, list[Any]]

_TOKEN = re.compile(r"\s*(?:(?P<open>\()|(?P<close>\))|(?P<comma>,)|(?P<id>[A-Za-z_][A-Za-z0-9_\-]*))")


def _tokenize(expression: str) -> list[tuple[str, str, int]]:
    tokens = []
    position = 0
    stripped = expression.rstrip()
    while position < len(stripped):
        match = _TOKEN.match(stripped, position)
        if match is None or match.lastgroup is None:
            raise InvalidInputException("tree", f"unexpected character at position {position} of `{expression}`")
        tokens.append((match.lastgroup, match.group(match.lastgroup), match.start(match.lastgroup)))
        position = match.end()
    return tokens


def parse_tree(expression: str) -> TreeNode:
    """
    Parses a grouping expression such as `((y1,y2),(a1,a2))` into nested
    lists of source ids.

    Example:
        >>> parse_tree("((y1,y2),(a1,a2))")
        [['y1', 'y2'], ['a1', 'a2']]
    """
    tokens = _tokenize(expression)
    position = 0

    def fail(reason: str) -> InvalidInputException:
        where = tokens[position][2] if position < len(tokens) else len(expression)
        return InvalidInputException("tree", f"{reason} at position {where} of `{expression}`")

    def node() -> TreeNode:
        nonlocal position
        if position >= len(tokens):
            raise fail("unexpected end")
        kind, text, _ = tokens[position]
        if kind == "id":
            position += 1
            return text
        if kind != "open":
            raise fail(f"expected `(` or an id, got `{text}`")
        position += 1
        children = [node()]
        while position < len(tokens) and tokens[position][0] == "comma":
            position += 1
            children.append(node())
        if position >= len(tokens) or tokens[position][0] != "close":
            raise fail("expected `)`")
        position += 1
        return children

    tree = node()
    if position != len(tokens):
        raise fail("unexpected trailing input")
    return tree


def resolve_tree(tree: TreeNode, curves: Mapping[str, SignificanceCurve]) -> Union[SignificanceCurve, list[Any]]:
    """
    Replaces the ids of a parsed tree by their curves.
    """
    if isinstance(tree, str):
        if tree not in curves:
            raise InvalidInputException("tree", f"unknown source id `{tree}`, known ids are {', '.join(curves)}")
        return curves[tree]
    return [resolve_tree(child, curves) for child in tree]


def tree_leaves(tree: TreeNode) -> list[str]:
    if isinstance(tree, str):
        return [tree]
    return [leaf for child in tree for leaf in tree_leaves(child)]


def check_tree(tree: TreeNode, ids: Sequence[str]) -> None:
    """
    Every source must appear exactly once in a tree.
    """
    leaves = tree_leaves(tree)
    unknown = [leaf for leaf in leaves if leaf not in ids]
    if unknown:
        raise InvalidInputException("tree", f"unknown source id(s) {', '.join(unknown)}")
    repeated = sorted({leaf for leaf in leaves if leaves.count(leaf) > 1})
    if repeated:
        raise InvalidInputException("tree", f"source(s) used more than once: {', '.join(repeated)}")
    unused = [source_id for source_id in ids if source_id not in leaves]
    if unused:
        raise InvalidInputException("tree", f"source(s) missing from the tree: {', '.join(unused)}")
