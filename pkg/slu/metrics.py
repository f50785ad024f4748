"""
Метрики SLU: микро P/R/F1 по интентам и слотам и точность набора интентов
"""

from collections import Counter
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class PRF:
    """
    Attributes:
        precision(float): 0, если предсказаний нет
        recall(float): 0, если эталонных элементов нет
        f1(float): 0, если precision + recall = 0
    """

    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, true_positive: int, predicted: int, gold: int) -> "PRF":
        precision = true_positive / predicted if predicted else 0.0
        recall = true_positive / gold if gold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision, recall, f1)


@dataclass(frozen=True)
class SluScores:
    intent: PRF
    slot: PRF
    intent_accuracy: float
    count: int

    def to_dict(self) -> dict:
        return asdict(self)


def slot_items(slots) -> Counter:
    return Counter((slot.slot_type, slot.value) for slot in slots)


def slu_metrics(predictions, golds) -> SluScores:
    """
    Интенты сравниваются как множества, слоты как мультимножества пар
    (тип, значение); позиции в вопросе не учитываются

    Args:
        predictions: Объекты с полями intents и slots
        golds: Эталонные экземпляры в том же порядке

    Raises:
        ValueError: списки разной длины
    """

    predictions, golds = list(predictions), list(golds)
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions for {len(golds)} gold instances")
    intent_counts = [0, 0, 0]
    slot_counts = [0, 0, 0]
    exact = 0
    for prediction, gold in zip(predictions, golds):
        predicted_intents, gold_intents = set(prediction.intents), set(gold.intents)
        intent_counts[0] += len(predicted_intents & gold_intents)
        intent_counts[1] += len(predicted_intents)
        intent_counts[2] += len(gold_intents)
        exact += predicted_intents == gold_intents

        predicted_slots, gold_slots = slot_items(prediction.slots), slot_items(gold.slots)
        slot_counts[0] += sum((predicted_slots & gold_slots).values())
        slot_counts[1] += sum(predicted_slots.values())
        slot_counts[2] += sum(gold_slots.values())
    return SluScores(
        PRF.from_counts(*intent_counts),
        PRF.from_counts(*slot_counts),
        exact / len(golds) if golds else 0.0,
        len(golds),
    )
