"""
Контекст одного эпизода: бэкенд с записью вызовов, эталон и подмены GT
"""

import logging
from typing import Optional

from domain.instances import QAInstance, SlotAnnotation
from .exceptions import BackendError
from .protocol import EpisodeTranscript


logger = logging.getLogger(__name__)

INJECTABLE_STAGES = ("slu", "sql", "api")


class Episode:
    """
    Attributes:
        transcript(EpisodeTranscript): Журнал эпизода
        backend: Чат-бэкенд
        gold(QAInstance): Эталонный экземпляр, если эпизод идёт по датасету
        injections(frozenset): Стадии, выход которых заменяется эталоном
        intents(tuple): Интенты SLU, с которыми идёт эпизод
        slots(tuple): Слоты SLU; вместе с intents уходят бэкенду в context
    """

    def __init__(
        self,
        transcript: EpisodeTranscript,
        backend,
        gold: Optional[QAInstance] = None,
        injections=frozenset(),
    ) -> None:
        unknown = set(injections) - set(INJECTABLE_STAGES)
        if unknown:
            raise ValueError(f"unknown injection stages {sorted(unknown)}")
        if injections and gold is None:
            raise ValueError("ground truth injection needs the gold instance")
        self.transcript = transcript
        self.backend = backend
        self.gold = gold
        self.injections = frozenset(injections)
        self.dispatch_index = -1
        self.intents = tuple(transcript.intents)
        self.slots = tuple(SlotAnnotation.from_dict(slot) for slot in transcript.slots)

    def injected(self, stage: str) -> bool:
        return stage in self.injections

    def complete(self, system_prompt: str, messages: list[dict], *, role: str, context: Optional[dict] = None) -> str:
        """
        Вызывает бэкенд и пишет вызов в журнал

        Raises:
            BackendError: пробрасывается после записи в журнал
        """

        full_context = {"instance": self.gold, "intents": self.intents, "slots": self.slots, **(context or {})}
        try:
            reply = self.backend.complete(system_prompt, messages, role=role, context=full_context)
        except BackendError as exc:
            self.transcript.backend_calls.append({"role": role, "ok": False, "reply": "", "error": str(exc)})
            logger.warning("%s: backend failed on %s: %s", self.transcript.instance_id, role, exc)
            raise
        self.transcript.backend_calls.append({"role": role, "ok": True, "reply": reply, "error": ""})
        return reply

    def record_sql(self, statement: str, source: str, *, columns=(), rows=(), error: str = "") -> None:
        self.transcript.sql_attempts.append(
            {
                "statement": statement,
                "source": source,
                "ok": not error,
                "columns": list(columns),
                "rows": [list(row) for row in rows],
                "error": error,
            }
        )

    def record_tool(self, function: str, params: dict, attempt: int, *, result=None, error: str = "") -> None:
        self.transcript.tool_calls.append(
            {
                "function": function,
                "params": params,
                "ok": not error,
                "result": result,
                "error": error,
                "dispatch": self.dispatch_index,
                "attempt": attempt,
            }
        )
