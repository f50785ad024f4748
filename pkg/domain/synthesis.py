"""
Правила вывода ответа из размеченных значений

Используются и генератором QA (правило ответа шаблона), и агентом карт
(финальный шаг рассуждения после вызовов инструментов)
"""

import operator
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .answers import (
    Boolean,
    CanonicalAnswer,
    Distance,
    Duration,
    EntitySet,
    Number,
    Text,
)


class RuleKind(str, Enum):
    PASSTHROUGH = "passthrough"
    ARGMIN = "argmin"
    ARGMAX = "argmax"
    COUNT = "count"
    THRESHOLD_FILTER = "threshold_filter"
    COMPARE = "compare"


VALUE_KINDS = ("duration", "distance", "number", "text", "entity")

COMPARATORS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}
DIFFERENCE = "difference"


class InconclusiveError(ValueError):
    """Из данных нельзя вывести однозначный ответ"""


@dataclass(frozen=True)
class Item:
    """
    Attributes:
        label(str): Имя сущности, к которой относится значение
        value: Значение (секунды, метры, число или текст)
        value_kind(str): Вид значения из VALUE_KINDS
        unit(str): Единица для вида number
    """

    label: str
    value: Union[int, float, str, None]
    value_kind: str = "entity"
    unit: str = ""

    def __post_init__(self) -> None:
        if self.value_kind not in VALUE_KINDS:
            raise ValueError(f"unknown value kind {self.value_kind!r}")

    def to_answer(self) -> CanonicalAnswer:
        if self.value_kind == "duration":
            return Duration(int(round(float(self.value))))
        if self.value_kind == "distance":
            return Distance(int(round(float(self.value))))
        if self.value_kind == "number":
            return Number(self.value, self.unit)
        if self.value_kind == "text":
            return Text(str(self.value))
        return EntitySet((self.label,))


@dataclass(frozen=True)
class SynthesisRule:
    """
    Attributes:
        kind(RuleKind): Вид правила
        op(str): Оператор сравнения или "difference" для compare
        bound(float): Порог для threshold_filter, count и compare
        limit(int): Сколько первых элементов вернуть при passthrough
        entities(bool): Считать элементы сущностями, отбросив значения
    """

    kind: RuleKind
    op: Optional[str] = None
    bound: Optional[float] = None
    limit: Optional[int] = None
    entities: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RuleKind(self.kind))
        if self.op is not None and self.op not in COMPARATORS and self.op != DIFFERENCE:
            raise ValueError(f"unknown operator {self.op!r}")
        if self.kind is RuleKind.THRESHOLD_FILTER and (self.op is None or self.bound is None):
            raise ValueError("threshold_filter needs op and bound")
        if self.kind is RuleKind.COMPARE:
            if self.op is None:
                raise ValueError("compare needs op")
            if self.op != DIFFERENCE and self.bound is None:
                raise ValueError("compare with a comparator needs bound")
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be positive")

    def to_dict(self) -> dict:
        data = {"kind": self.kind.value}
        for name in ("op", "bound", "limit"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if self.entities:
            data["entities"] = True
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SynthesisRule":
        try:
            return cls(
                kind=data["kind"],
                op=data.get("op"),
                bound=data.get("bound"),
                limit=data.get("limit"),
                entities=bool(data.get("entities", False)),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed synthesis rule {data!r}") from exc


def _numeric(items: list[Item]) -> list[tuple[float, str]]:
    try:
        return [(float(item.value), item.label) for item in items]
    except (TypeError, ValueError) as exc:
        raise InconclusiveError("rule needs numeric values") from exc


def _check(rule: SynthesisRule, value: float) -> bool:
    return COMPARATORS[rule.op](value, float(rule.bound))


def synthesize(rule: SynthesisRule, items: list[Item]) -> CanonicalAnswer:
    """
    Применяет правило к значениям

    Равные значения в argmin/argmax разрешаются по имени сущности

    Raises:
        InconclusiveError: данных нет, их меньше чем нужно или они неоднородны
    """

    items = list(items)
    if rule.entities:
        items = [Item(item.label, None) for item in items]
    if not items:
        raise InconclusiveError("no values to synthesize from")

    if rule.kind is RuleKind.PASSTHROUGH:
        if rule.limit is not None or all(item.value_kind == "entity" for item in items):
            limit = rule.limit if rule.limit is not None else len(items)
            if limit > len(items):
                raise InconclusiveError(f"{limit} items requested, {len(items)} available")
            return EntitySet(tuple(item.label for item in items[:limit]))
        if len(items) != 1:
            raise InconclusiveError(f"passthrough expects one value, got {len(items)}")
        return items[0].to_answer()

    if rule.kind in (RuleKind.ARGMIN, RuleKind.ARGMAX):
        pairs = _numeric(items)
        if rule.kind is RuleKind.ARGMIN:
            best = min(pairs, key=lambda pair: (pair[0], pair[1]))
        else:
            best = min(pairs, key=lambda pair: (-pair[0], pair[1]))
        return EntitySet((best[1],))

    if rule.kind is RuleKind.COUNT:
        if rule.op is not None and rule.bound is not None:
            return Number(sum(1 for value, _ in _numeric(items) if _check(rule, value)), "count")
        return Number(len(items), "count")

    if rule.kind is RuleKind.THRESHOLD_FILTER:
        kept = [label for value, label in _numeric(items) if _check(rule, value)]
        if not kept:
            raise InconclusiveError("no value passes the threshold")
        return EntitySet(tuple(kept))

    # compare
    if rule.op == DIFFERENCE:
        if len(items) != 2:
            raise InconclusiveError(f"difference needs two values, got {len(items)}")
        kinds = {item.value_kind for item in items}
        if len(kinds) != 1:
            raise InconclusiveError("difference of values of different kinds")
        (first, _), (second, _) = _numeric(items)
        return Item("difference", abs(first - second), items[0].value_kind, items[0].unit).to_answer()
    if len(items) != 1:
        raise InconclusiveError(f"comparison expects one value, got {len(items)}")
    (value, _), = _numeric(items)
    return Boolean(_check(rule, value))
