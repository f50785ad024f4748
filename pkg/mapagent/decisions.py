"""
Решения агента карт: разбор ответа бэкенда и подстановка координат по имени
"""

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from domain.geo import GeoPoint
from domain.synthesis import SynthesisRule
from toolcache.serializers import PARAM_SERIALIZERS
from .exceptions import DecisionParseError, MissingCoordinatesError


COORDINATE_PARAMS = ("origin", "destination", "center")
CALL_PREFIX = "CALL"
RULE_PREFIX = "RULE"
NO_TOOL_PREFIX = "NO_TOOL"


@dataclass(frozen=True)
class ToolDecision:
    """
    Attributes:
        function(str): Одна из четырёх геофункций
        params(dict): Параметры; координаты могут быть заданы именем сущности
        label(str): Сущность, к которой относится результат
        rationale(str): Пояснение модели, оценкой не используется
    """

    function: str
    params: dict[str, Any]
    label: str = ""
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.function not in PARAM_SERIALIZERS:
            raise ValueError(f"unknown function {self.function!r}")
        if not isinstance(self.params, dict):
            raise ValueError("params must be an object")

    def to_dict(self) -> dict:
        return {"function": self.function, "params": self.params, "label": self.label}


@dataclass(frozen=True)
class MapPlan:
    decisions: tuple[ToolDecision, ...] = ()
    rule: Optional[SynthesisRule] = None
    no_tool: str = field(default="")


def parse_decision(text: str) -> MapPlan:
    """
    Строки CALL {json} и необязательная RULE {json}; NO_TOOL: причина
    означает отказ. Прочие строки идут в rationale

    Raises:
        DecisionParseError: нет ни CALL, ни NO_TOOL, либо строка не разбирается
    """

    decisions = []
    rule = None
    no_tool = ""
    rationale = []
    for line in (text or "").splitlines():
        stripped = line.strip()
        head, _, rest = stripped.partition(" ")
        if head == CALL_PREFIX:
            try:
                data = json.loads(rest)
                decisions.append(ToolDecision(data["function"], data.get("params", {}), str(data.get("label", ""))))
            except (ValueError, KeyError, TypeError) as exc:
                raise DecisionParseError(text, f"malformed CALL line {stripped!r}: {exc}") from exc
        elif head == RULE_PREFIX:
            try:
                rule = SynthesisRule.from_dict(json.loads(rest))
            except (ValueError, TypeError) as exc:
                raise DecisionParseError(text, f"malformed RULE line {stripped!r}: {exc}") from exc
        elif stripped.startswith(NO_TOOL_PREFIX):
            no_tool = stripped[len(NO_TOOL_PREFIX):].lstrip(":").strip() or "no function applies"
        elif stripped:
            rationale.append(stripped)
    if decisions:
        note = " ".join(rationale)
        return MapPlan(tuple(ToolDecision(item.function, item.params, item.label, note) for item in decisions), rule)
    if no_tool:
        return MapPlan(no_tool=no_tool)
    raise DecisionParseError(text)


def resolve_coordinates(params: dict, context: dict[str, GeoPoint]) -> dict:
    """
    Заменяет имя сущности в координатном параметре её координатами из контекста

    Raises:
        MissingCoordinatesError: имени нет в контексте и оно не разбирается как координаты
    """

    resolved = dict(params)
    for name in COORDINATE_PARAMS:
        value = resolved.get(name)
        if not isinstance(value, str):
            continue
        if value in context:
            resolved[name] = context[value].as_list()
            continue
        try:
            resolved[name] = GeoPoint.from_value(value).as_list()
        except ValueError:
            raise MissingCoordinatesError(value) from None
    return resolved
