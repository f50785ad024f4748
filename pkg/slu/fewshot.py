"""
Few-shot стратегия SLU: примеры из датасета в промпте и разбор JSON-ответа
"""

import json
import logging
import random
import re
from pathlib import Path
from typing import Optional

from django.conf import settings

from agents.prompting import fill_prompt, load_prompt
from domain.instances import QAInstance, SlotAnnotation
from qagen.paraphrase import relocate_slots
from .prediction import SluPrediction


logger = logging.getLogger(__name__)

PROMPT_PATH = Path(__file__).resolve().parent / "prompts" / "fewshot_v1.txt"
OBJECT_PATTERN = re.compile(r"\{.*\}", re.DOTALL)


def sample_examples(instances, k: Optional[int] = None, seed: int = 0) -> tuple[QAInstance, ...]:
    """
    Случайная выборка примеров, в которой есть каждый интент пула

    Если интентов больше k, покрытие важнее размера выборки
    """

    k = settings.SLU_FEWSHOT_EXAMPLES if k is None else k
    rng = random.Random(seed)
    pool = sorted(instances, key=lambda instance: instance.id)
    chosen: dict[str, QAInstance] = {}
    for intent in sorted({intent for instance in pool for intent in instance.intents}):
        if any(intent in instance.intents for instance in chosen.values()):
            continue
        pick = rng.choice([instance for instance in pool if intent in instance.intents])
        chosen[pick.id] = pick
    rest = [instance for instance in pool if instance.id not in chosen]
    rng.shuffle(rest)
    for instance in rest[:max(0, k - len(chosen))]:
        chosen[instance.id] = instance
    return tuple(sorted(chosen.values(), key=lambda instance: instance.id))


def render_labels(intents, slots) -> str:
    return json.dumps(
        {"intents": list(intents), "slots": [{"slot_type": slot.slot_type, "value": slot.value} for slot in slots]},
        ensure_ascii=False,
    )


def render_examples(examples) -> str:
    return "\n\n".join(
        f"Question: {example.question}\nLabels: {render_labels(example.intents, example.slots)}" for example in examples
    )


def parse_prediction(question: str, text: str) -> Optional[SluPrediction]:
    """
    Разбирает объект {"intents": [...], "slots": [{"slot_type", "value"}]}
    и находит значения слотов в вопросе

    Returns:
        None, если объект не разобран или значение слота не найдено в вопросе
    """

    match = OBJECT_PATTERN.search(text or "")
    if match is None:
        return None
    try:
        data = json.loads(match.group())
        intents = [intent for intent in data.get("intents", []) if intent in settings.QA_INTENTS]
        provisional = [
            SlotAnnotation(item["slot_type"], str(item["value"]), (0, len(str(item["value"]))))
            for item in data.get("slots", [])
            if item.get("slot_type") in settings.QA_SLOT_TYPES and str(item.get("value", ""))
        ]
    except (ValueError, TypeError, AttributeError, KeyError):
        return None
    slots = relocate_slots(question, provisional)
    if slots is None:
        return None
    return SluPrediction(tuple(dict.fromkeys(intents)), tuple(sorted(slots, key=lambda slot: slot.span)))


class FewShotStrategy:
    """
    Attributes:
        backend: Чат-бэкенд
        examples(tuple): Примеры для промпта
    """

    name = "fewshot"

    def __init__(self, backend, examples) -> None:
        self.backend = backend
        self.examples = tuple(examples)
        self.prompt = fill_prompt(load_prompt(PROMPT_PATH), examples=render_examples(self.examples))

    def predict(self, question: str, gold=None) -> SluPrediction:
        """
        Raises:
            BackendError: бэкенд недоступен
        """

        reply = self.backend.complete(
            self.prompt,
            [{"role": "user", "content": f"Question: {question}"}],
            role="slu.fewshot",
            context={"instance": gold},
        )
        prediction = parse_prediction(question, reply)
        if prediction is None:
            logger.warning("unparseable SLU output for %r: %.200s", question, reply)
            return SluPrediction()
        return prediction
