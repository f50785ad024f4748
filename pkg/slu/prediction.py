"""
Результат SLU и простейшие стратегии
"""

from dataclasses import dataclass
from typing import Optional, Protocol

from domain.instances import QAInstance, SlotAnnotation, check_slots


UNKNOWN_INTENT = "unknown"


@dataclass(frozen=True)
class SluPrediction:
    """
    Attributes:
        intents(tuple): Интенты вопроса
        slots(tuple): Слоты с позициями в вопросе
    """

    intents: tuple[str, ...] = ()
    slots: tuple[SlotAnnotation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "intents", tuple(self.intents))
        object.__setattr__(self, "slots", tuple(self.slots))

    def check(self, question: str) -> None:
        """
        Raises:
            ValueError: слот не совпадает с вопросом или слоты пересекаются
        """
        check_slots(question, self.slots)

    def to_dict(self) -> dict:
        return {"intents": list(self.intents), "slots": [slot.to_dict() for slot in self.slots]}

    @classmethod
    def from_instance(cls, instance: QAInstance) -> "SluPrediction":
        return cls(instance.intents, instance.slots)


class SluStrategy(Protocol):
    name: str

    def predict(self, question: str, gold: Optional[QAInstance] = None) -> SluPrediction:
        """gold нужен только оракульным бэкендам и подмене эталоном"""


class NoneStrategy:
    """Без разметки: агенты получают только текст вопроса"""

    name = "none"

    def predict(self, question: str, gold=None) -> SluPrediction:
        return SluPrediction()


class GoldStrategy:
    """Подмена SLU эталонной разметкой"""

    name = "gold"

    def predict(self, question: str, gold=None) -> SluPrediction:
        if gold is None:
            raise ValueError("gold SLU needs the gold instance")
        return SluPrediction.from_instance(gold)
