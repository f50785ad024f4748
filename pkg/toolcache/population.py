"""
Предварительное заполнение кеша: каждый уникальный запрос выполняется один раз
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Union

from domain.instances import QAInstance, ToolStep
from .calls import ToolRequest, make_request, request_from_step
from .exceptions import ToolError
from .models import CacheEntry
from .service import ToolCache


logger = logging.getLogger(__name__)


@dataclass
class PopulationReport:
    """
    Attributes:
        requested(int): Запросов в корпусе
        unique(int): Уникальных запросов
        created(int): Новых записей
        existing(int): Уже было в кеше
        failed(list): Пары (ключ, ошибка) для неудавшихся запросов
    """

    requested: int = 0
    unique: int = 0
    created: int = 0
    existing: int = 0
    failed: list[tuple[str, str]] = field(default_factory=list)

    @property
    def entries(self) -> int:
        return self.created + self.existing

    @property
    def complete(self) -> bool:
        return not self.failed


def corpus_from_instances(instances: Iterable[QAInstance]) -> list[ToolStep]:
    return [step for instance in instances for step in instance.tool_trace]


def populate_cache(
    provider, corpus: Iterable[Union[ToolRequest, ToolStep, tuple]]
) -> PopulationReport:
    """
    Записывает в кеш все запросы корпуса; дубликаты выполняются один раз,
    повторный запуск ничего не меняет

    Ошибки провайдера не прерывают заполнение и попадают в отчёт
    """

    report = PopulationReport()
    unique: dict[str, ToolRequest] = {}
    for item in corpus:
        report.requested += 1
        try:
            if isinstance(item, ToolRequest):
                request = item
            elif isinstance(item, ToolStep):
                request = request_from_step(item)
            else:
                request = make_request(*item)
        except ToolError as exc:
            report.failed.append((repr(item), str(exc)))
            continue
        unique.setdefault(request.key, request)
    report.unique = len(unique)

    existing = set(CacheEntry.objects.values_list("key", flat=True))
    cache = ToolCache(provider=provider)
    for key in sorted(unique):
        if key in existing:
            report.existing += 1
            continue
        try:
            cache.lookup(unique[key])
        except ToolError as exc:
            logger.warning("population failed for %s: %s", key, exc)
            report.failed.append((key, str(exc)))
            continue
        report.created += 1
    logger.info(
        "cache population: %d requested, %d unique, %d created, %d existing, %d failed",
        report.requested,
        report.unique,
        report.created,
        report.existing,
        len(report.failed),
    )
    return report
