"""
QA-экземпляры и их трассы SQL и вызовов инструментов
"""

import json
from dataclasses import dataclass, field
from typing import Any

from .answers import CanonicalAnswer, answer_from_dict


QUESTION_TYPES = (1, 2, 3)
TOOL_FUNCTIONS = (
    "time_query",
    "distance_query",
    "surrounding_pois_query",
    "rush_hour_query",
)
SPECIALISTS = ("db_agent", "map_agent")


@dataclass(frozen=True)
class SlotAnnotation:
    """
    Attributes:
        slot_type(str): Тип слота из схемы
        value(str): Значение слота
        span(tuple): Смещения символов [start, end) в вопросе
    """

    slot_type: str
    value: str
    span: tuple[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "span", tuple(self.span))
        start, end = self.span
        if start < 0 or end <= start:
            raise ValueError(f"invalid span {self.span} for slot {self.slot_type}")

    def matches(self, question: str) -> bool:
        """Проверяет, что подстрока вопроса по смещениям равна значению"""
        start, end = self.span
        return question[start:end] == self.value

    def to_dict(self) -> dict:
        return {"slot_type": self.slot_type, "value": self.value, "span": list(self.span)}

    @classmethod
    def from_dict(cls, data: dict) -> "SlotAnnotation":
        return cls(data["slot_type"], data["value"], tuple(data["span"]))


def check_slots(question: str, slots) -> None:
    """
    Проверяет инварианты слотов: совпадение подстрок и отсутствие пересечений

    Raises:
        ValueError: при нарушении инварианта
    """

    for slot in slots:
        if not slot.matches(question):
            raise ValueError(
                f"slot {slot.slot_type}={slot.value!r} does not match question at {slot.span}"
            )
    ordered = sorted(slots, key=lambda slot: slot.span)
    for left, right in zip(ordered, ordered[1:]):
        if right.span[0] < left.span[1]:
            raise ValueError(f"slots {left.slot_type} and {right.slot_type} overlap")


@dataclass(frozen=True)
class SqlStep:
    statement: str
    columns: tuple[str, ...]
    expected_result: tuple[tuple, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(
            self, "expected_result", tuple(tuple(row) for row in self.expected_result)
        )

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "columns": list(self.columns),
            "expected_result": [list(row) for row in self.expected_result],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SqlStep":
        return cls(data["statement"], data["columns"], data["expected_result"])


@dataclass(frozen=True)
class ToolStep:
    """
    Attributes:
        function(str): Имя одной из четырёх функций
        params(dict): Нормализованные параметры вместе с time_bucket
        expected_result(dict): Табличный ответ {"columns": [...], "rows": [...]}
    """

    function: str
    params: dict[str, Any]
    expected_result: dict[str, Any]

    def __post_init__(self) -> None:
        if self.function not in TOOL_FUNCTIONS:
            raise ValueError(f"unknown tool function {self.function!r}")

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "params": self.params,
            "expected_result": self.expected_result,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ToolStep":
        return cls(data["function"], data["params"], data["expected_result"])


@dataclass(frozen=True)
class QAInstance:
    """
    Вопрос вместе с полной проверяемой разметкой: тип, интенты, слоты,
    трассы SQL и инструментов, маршрут агентов и канонический ответ
    """

    id: str
    template_id: str
    city: str
    question: str
    question_type: int
    intents: tuple[str, ...]
    slots: tuple[SlotAnnotation, ...]
    sql_trace: tuple[SqlStep, ...]
    tool_trace: tuple[ToolStep, ...]
    agent_route: tuple[str, ...]
    answer: CanonicalAnswer
    nl_answer: str = field(default="")

    def __post_init__(self) -> None:
        for name in ("intents", "slots", "sql_trace", "tool_trace", "agent_route"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.question_type not in QUESTION_TYPES:
            raise ValueError(f"question_type must be one of {QUESTION_TYPES}")
        if not self.sql_trace:
            raise ValueError(f"instance {self.id}: sql_trace must not be empty")
        if self.question_type == 1 and self.tool_trace:
            raise ValueError(f"instance {self.id}: type 1 questions have no tool calls")
        if self.question_type in (2, 3) and not self.tool_trace:
            raise ValueError(f"instance {self.id}: type {self.question_type} needs tool calls")
        unknown = set(self.agent_route) - set(SPECIALISTS)
        if unknown:
            raise ValueError(f"instance {self.id}: unknown specialists {sorted(unknown)}")
        check_slots(self.question, self.slots)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "template_id": self.template_id,
            "city": self.city,
            "question": self.question,
            "question_type": self.question_type,
            "intents": list(self.intents),
            "slots": [slot.to_dict() for slot in self.slots],
            "sql_trace": [step.to_dict() for step in self.sql_trace],
            "tool_trace": [step.to_dict() for step in self.tool_trace],
            "agent_route": list(self.agent_route),
            "answer": self.answer.to_dict(),
            "nl_answer": self.nl_answer,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "QAInstance":
        return cls(
            id=data["id"],
            template_id=data["template_id"],
            city=data["city"],
            question=data["question"],
            question_type=data["question_type"],
            intents=tuple(data["intents"]),
            slots=tuple(SlotAnnotation.from_dict(slot) for slot in data["slots"]),
            sql_trace=tuple(SqlStep.from_dict(step) for step in data["sql_trace"]),
            tool_trace=tuple(ToolStep.from_dict(step) for step in data["tool_trace"]),
            agent_route=tuple(data["agent_route"]),
            answer=answer_from_dict(data["answer"]),
            nl_answer=data.get("nl_answer", ""),
        )

    @classmethod
    def from_json(cls, line: str) -> "QAInstance":
        return cls.from_dict(json.loads(line))
