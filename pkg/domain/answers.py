"""
Канонические ответы и их строгое сравнение
"""

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Any, ClassVar, Union


# Псевдонимы единиц: единица -> (каноническая единица, множитель)
UNIT_ALIASES: dict[str, tuple[str, int]] = {
    "": ("", 1),
    "count": ("count", 1),
    "items": ("count", 1),
    "个": ("count", 1),
    "percent": ("percent", 1),
    "%": ("percent", 1),
    "cny_per_sqm": ("cny_per_sqm", 1),
    "yuan_per_sqm": ("cny_per_sqm", 1),
    "yuan/m2": ("cny_per_sqm", 1),
    "元/平方米": ("cny_per_sqm", 1),
    "m": ("m", 1),
    "meters": ("m", 1),
    "km": ("m", 1000),
    "s": ("s", 1),
    "seconds": ("s", 1),
    "min": ("s", 60),
    "minutes": ("s", 60),
}


def normalize_text(value: str) -> str:
    """Обрезает пробелы по краям и схлопывает внутренние"""
    return " ".join(str(value).split())


def normalize_number(value: Any, unit: str = "") -> tuple[Decimal, str]:
    """
    Приводит число к канонической единице

    Returns:
        Пара (нормализованное значение, каноническая единица)
    """

    key = normalize_text(unit).lower()
    canonical, scale = UNIT_ALIASES.get(key, (key, 1))
    try:
        number = Decimal(str(value)) * scale
    except InvalidOperation as exc:
        raise ValueError(f"not a number: {value!r}") from exc
    # 3 и 3.0 дают одно и то же значение
    number = number.normalize()
    if number == 0:
        number = Decimal(0)
    return number, canonical


@dataclass(frozen=True)
class EntitySet:
    """Мультимножество имён сущностей, порядок не важен"""

    items: tuple[str, ...]
    kind: ClassVar[str] = "entity_set"

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("EntitySet must contain at least one element")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "items": list(self.items)}


@dataclass(frozen=True)
class Number:
    value: Union[int, float]
    unit: str = ""
    kind: ClassVar[str] = "number"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "unit": self.unit}


@dataclass(frozen=True)
class Duration:
    seconds: int
    kind: ClassVar[str] = "duration"

    def __post_init__(self) -> None:
        if self.seconds < 0:
            raise ValueError("Duration must be non-negative")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seconds": self.seconds}


@dataclass(frozen=True)
class Distance:
    meters: int
    kind: ClassVar[str] = "distance"

    def __post_init__(self) -> None:
        if self.meters < 0:
            raise ValueError("Distance must be non-negative")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "meters": self.meters}


@dataclass(frozen=True)
class Boolean:
    value: bool
    kind: ClassVar[str] = "boolean"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Text:
    value: str
    kind: ClassVar[str] = "text"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


CanonicalAnswer = Union[EntitySet, Number, Duration, Distance, Boolean, Text]

ANSWER_KINDS = {
    cls.kind: cls for cls in (EntitySet, Number, Duration, Distance, Boolean, Text)
}


def answer_from_dict(data: dict) -> CanonicalAnswer:
    """
    Восстанавливает ответ из словаря с полем kind

    Raises:
        ValueError: неизвестный вид ответа или неверные поля
    """

    try:
        cls = ANSWER_KINDS[data["kind"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"unknown answer kind in {data!r}") from exc
    fields = {key: value for key, value in data.items() if key != "kind"}
    if cls is EntitySet:
        fields["items"] = tuple(fields.get("items", ()))
    try:
        return cls(**fields)
    except TypeError as exc:
        raise ValueError(f"malformed {cls.kind} answer: {data!r}") from exc


NAN_KEY = "NaN"


def _number_key(value: Any, unit: str) -> tuple:
    number, canonical = normalize_number(value, unit)
    # NaN != NaN, ключ должен быть рефлексивным
    if number.is_nan():
        return NAN_KEY, canonical
    return number, canonical


def _scalar_key(answer: CanonicalAnswer) -> tuple:
    if isinstance(answer, Number):
        return _number_key(answer.value, answer.unit)
    if isinstance(answer, Duration):
        return _number_key(answer.seconds, "s")
    if isinstance(answer, Distance):
        return _number_key(answer.meters, "m")
    if isinstance(answer, Boolean):
        return (bool(answer.value),)
    return (normalize_text(answer.value),)


def answer_equal(pred: CanonicalAnswer | None, gold: CanonicalAnswer | None) -> bool:
    """
    Строгое сравнение ответов: мультимножества для перечислений,
    нормализованные значения для скаляров, разные виды всегда не равны
    """

    if pred is None or gold is None:
        return False
    if type(pred) is not type(gold):
        return False
    if isinstance(pred, EntitySet):
        return Counter(map(normalize_text, pred.items)) == Counter(
            map(normalize_text, gold.items)
        )
    try:
        return _scalar_key(pred) == _scalar_key(gold)
    except ValueError:
        return False


def answer_items(answer: CanonicalAnswer | None) -> list[str]:
    """
    Раскладывает ответ на элементы для F1: перечисление - на нормализованные имена,
    скаляр - на одно нормализованное значение
    """

    if answer is None:
        return []
    if isinstance(answer, EntitySet):
        return [normalize_text(item) for item in answer.items]
    try:
        key = _scalar_key(answer)
    except ValueError:
        return [f"{answer.kind}:invalid"]
    return [f"{answer.kind}:" + "|".join(str(part) for part in key)]


def render_answer(answer: CanonicalAnswer) -> str:
    """Текст ответа для ответа на естественном языке"""

    if isinstance(answer, EntitySet):
        return ", ".join(answer.items)
    if isinstance(answer, Number):
        return f"{answer.value}"
    if isinstance(answer, Duration):
        minutes, seconds = divmod(int(answer.seconds), 60)
        return f"{minutes} min {seconds} s" if minutes else f"{seconds} s"
    if isinstance(answer, Distance):
        return f"{answer.meters} m"
    if isinstance(answer, Boolean):
        return "yes" if answer.value else "no"
    return answer.value
