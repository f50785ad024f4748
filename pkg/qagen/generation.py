"""
Генерация набора QA-экземпляров по каталогу шаблонов
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from domain.instances import QAInstance
from geostore.store import GeoStore
from toolcache.service import ToolCache
from .exceptions import Rejection
from .instantiate import instantiate, plausibility_filter
from .sampling import sample_bindings
from .templates import Template


logger = logging.getLogger(__name__)


@dataclass
class GenerationReport:
    """
    Attributes:
        attempted(int): Попыток
        accepted(int): Принятых экземпляров
        rejected(Counter): Отказы по причинам
        per_template(dict): template_id -> {"attempted", "accepted"}
    """

    attempted: int = 0
    accepted: int = 0
    rejected: Counter = field(default_factory=Counter)
    per_template: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "attempted": self.attempted,
            "accepted": self.accepted,
            "rejected": dict(sorted(self.rejected.items())),
            "per_template": self.per_template,
        }


def generate_dataset(
    templates: Iterable[Template],
    store: GeoStore,
    cache: ToolCache,
    *,
    cities: tuple[str, ...],
    seed: int,
    attempts: int,
) -> tuple[list[QAInstance], GenerationReport]:
    """
    Делает attempts попыток на шаблон, чередуя города

    Результат зависит только от хранилища, шаблонов и сида: у каждого шаблона
    свой генератор случайных чисел
    """

    report = GenerationReport()
    instances: list[QAInstance] = []
    questions: set[str] = set()
    for template in sorted(templates, key=lambda item: item.template_id):
        rng = random.Random(f"{seed}:{template.template_id}")
        accepted = 0
        for attempt in range(attempts):
            city = cities[attempt % len(cities)]
            report.attempted += 1
            instance_id = f"{template.template_id}-{accepted:04d}"
            try:
                binding = sample_bindings(template, store, city, rng)
                instance = instantiate(template, binding, store, cache, instance_id)
                reason = plausibility_filter(instance)
                if reason:
                    raise Rejection(reason)
                if instance.question in questions:
                    raise Rejection("duplicate", instance.question)
            except Rejection as exc:
                report.rejected[exc.reason] += 1
                logger.debug("%s attempt %d rejected: %s", template.template_id, attempt, exc)
                continue
            questions.add(instance.question)
            instances.append(instance)
            accepted += 1
        report.accepted += accepted
        report.per_template[template.template_id] = {"attempted": attempts, "accepted": accepted}
    logger.info(
        "generated %d of %d attempts, rejected %s",
        report.accepted,
        report.attempted,
        dict(report.rejected),
    )
    return instances, report
