"""
Протокол обмена между супервизором и специалистами и журнал эпизода
"""

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from domain.answers import CanonicalAnswer, answer_from_dict
from domain.geo import GeoPoint
from domain.instances import SPECIALISTS, SlotAnnotation


EVIDENCE_KINDS = ("rows", "coordinates", "tool_result", "derived")
RESULT_STATUSES = ("success", "error", "unable")
SUPERVISOR_STATUSES = ("planning", "dispatching", "finalizing", "failed")
UNANSWERABLE = "unanswerable"


@dataclass(frozen=True)
class Evidence:
    """
    Attributes:
        kind(str): rows, coordinates, tool_result или derived
        source(str): Специалист, добывший свидетельство
        payload(dict): Данные в JSON-совместимом виде
    """

    kind: str
    source: str
    payload: dict

    def __post_init__(self) -> None:
        if self.kind not in EVIDENCE_KINDS:
            raise ValueError(f"unknown evidence kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "source": self.source, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict) -> "Evidence":
        return cls(data["kind"], data["source"], data["payload"])


@dataclass(frozen=True)
class Directive:
    specialist: str
    subtask: str

    def __post_init__(self) -> None:
        if self.specialist not in SPECIALISTS:
            raise ValueError(f"unknown specialist {self.specialist!r}")

    def render(self) -> str:
        return f"DISPATCH {self.specialist}: {self.subtask}"


@dataclass(frozen=True)
class AgentTask:
    """
    Задание специалисту

    Attributes:
        task_description(str): Подзадача из плана
        question(str): Исходный вопрос
        intents(tuple): Интенты из SLU
        slots(tuple): Слоты из SLU
        context(dict): Имя сущности -> координаты, собранные ранее
        evidence(tuple): Свидетельства предыдущих шагов
        history(tuple): Краткие итоги предыдущих обменов
    """

    task_description: str
    question: str
    intents: tuple[str, ...] = ()
    slots: tuple[SlotAnnotation, ...] = ()
    context: dict[str, GeoPoint] = field(default_factory=dict)
    evidence: tuple[Evidence, ...] = ()
    history: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "task_description": self.task_description,
            "question": self.question,
            "intents": list(self.intents),
            "slots": [slot.to_dict() for slot in self.slots],
            "context": {name: point.as_list() for name, point in self.context.items()},
            "evidence_count": len(self.evidence),
            "history": list(self.history),
        }


@dataclass(frozen=True)
class AgentResult:
    """
    Attributes:
        status(str): success, error или unable
        evidence(tuple): Свидетельства; непусто при success
        error_report(str): Отчёт об ошибке; непуст при error и unable
    """

    status: str
    evidence: tuple[Evidence, ...] = ()
    error_report: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence", tuple(self.evidence))
        if self.status not in RESULT_STATUSES:
            raise ValueError(f"unknown result status {self.status!r}")
        if self.status == "success" and not self.evidence:
            raise ValueError("successful result needs evidence")
        if self.status != "success" and not self.error_report:
            raise ValueError(f"{self.status} result needs an error report")

    @classmethod
    def success(cls, evidence) -> "AgentResult":
        return cls("success", tuple(evidence))

    @classmethod
    def error(cls, report: str) -> "AgentResult":
        return cls("error", (), report)

    @classmethod
    def unable(cls, report: str) -> "AgentResult":
        return cls("unable", (), report)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "evidence": [item.to_dict() for item in self.evidence],
            "error_report": self.error_report,
        }


def coordinates_from_evidence(evidence) -> dict[str, GeoPoint]:
    """Карта координат из свидетельств; более поздние значения не затирают ранние"""

    found: dict[str, GeoPoint] = {}
    for item in evidence:
        if item.kind != "coordinates":
            continue
        for name, value in item.payload.items():
            found.setdefault(name, GeoPoint.from_value(value))
    return found


@dataclass
class EpisodeTranscript:
    """
    Полный журнал эпизода: вызовы бэкенда, директивы, обмены со специалистами,
    попытки SQL и вызовы инструментов

    Attributes:
        instance_id(str): Идентификатор экземпляра
        method(str): supervisor или standard
        intents(list): Интенты, переданные агентам
        slots(list): Слоты, переданные агентам
        events(list): События супервизора: plan, replan, sufficiency, step_cap
        dispatches(list): {"specialist", "task", "result"}
        sql_attempts(list): {"statement", "source", "ok", "columns", "rows", "error"}
        tool_calls(list): {"function", "params", "ok", "result", "error", "dispatch", "attempt"}
        backend_calls(list): {"role", "ok", "reply", "error"}
        answer: Итоговый ответ или None, если вопрос признан неотвечаемым
        final_text(str): Сырой текст финального ответа
        step_count(int): Шаги: вызовы специалистов и события plan/replan
        failure(str): Код причины, если ответа нет
    """

    instance_id: str
    method: str = "supervisor"
    intents: list = field(default_factory=list)
    slots: list = field(default_factory=list)
    events: list = field(default_factory=list)
    dispatches: list = field(default_factory=list)
    sql_attempts: list = field(default_factory=list)
    tool_calls: list = field(default_factory=list)
    backend_calls: list = field(default_factory=list)
    answer: Optional[CanonicalAnswer] = None
    final_text: str = ""
    step_count: int = 0
    failure: str = ""

    @property
    def verdict(self) -> str:
        return "answered" if self.answer is not None else UNANSWERABLE

    @property
    def route(self) -> tuple[str, ...]:
        return tuple(dispatch["specialist"] for dispatch in self.dispatches)

    def event(self, name: str, **details: Any) -> None:
        self.events.append({"event": name, **details})

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "method": self.method,
            "intents": self.intents,
            "slots": self.slots,
            "events": self.events,
            "dispatches": self.dispatches,
            "sql_attempts": self.sql_attempts,
            "tool_calls": self.tool_calls,
            "backend_calls": self.backend_calls,
            "answer": self.answer.to_dict() if self.answer is not None else None,
            "final_text": self.final_text,
            "step_count": self.step_count,
            "verdict": self.verdict,
            "failure": self.failure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, default=str)

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeTranscript":
        answer = data.get("answer")
        return cls(
            instance_id=data["instance_id"],
            method=data.get("method", "supervisor"),
            intents=data.get("intents", []),
            slots=data.get("slots", []),
            events=data.get("events", []),
            dispatches=data.get("dispatches", []),
            sql_attempts=data.get("sql_attempts", []),
            tool_calls=data.get("tool_calls", []),
            backend_calls=data.get("backend_calls", []),
            answer=answer_from_dict(answer) if answer else None,
            final_text=data.get("final_text", ""),
            step_count=data.get("step_count", 0),
            failure=data.get("failure", ""),
        )

    @classmethod
    def from_json(cls, line: str) -> "EpisodeTranscript":
        return cls.from_dict(json.loads(line))
