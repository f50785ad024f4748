"""
Повторная проверка экземпляров: SQL, воспроизведение инструментов, ответ
"""

import logging
from typing import Iterable

from domain.answers import answer_equal
from domain.instances import QAInstance
from geostore.store import GeoStore
from toolcache.service import ToolCache
from .exceptions import Rejection
from .instantiate import instantiate, plausibility_filter
from .templates import Template, binding_from_slots


logger = logging.getLogger(__name__)


def revalidate(
    instance: QAInstance, templates: dict[str, Template], store: GeoStore, cache: ToolCache
) -> list[str]:
    """
    Пересобирает экземпляр по слотам и сравнивает трассы и ответ

    Returns:
        Список расхождений; пустой, если экземпляр верен
    """

    template = templates.get(instance.template_id)
    if template is None:
        return [f"unknown template {instance.template_id}"]
    try:
        binding = binding_from_slots(template, instance.city, instance.slots)
        rebuilt = instantiate(template, binding, store, cache, instance.id)
    except ValueError as exc:
        return [f"slots: {exc}"]
    except Rejection as exc:
        return [f"rejected on replay: {exc}"]

    mismatches = []
    for number, (stored, replayed) in enumerate(zip(instance.sql_trace, rebuilt.sql_trace)):
        if stored.statement != replayed.statement:
            mismatches.append(f"sql step {number}: statement differs")
        elif stored.expected_result != replayed.expected_result or stored.columns != replayed.columns:
            mismatches.append(f"sql step {number}: result differs")
    if len(instance.sql_trace) != len(rebuilt.sql_trace):
        mismatches.append("sql trace length differs")
    if len(instance.tool_trace) != len(rebuilt.tool_trace):
        mismatches.append("tool trace length differs")
    for number, (stored, replayed) in enumerate(zip(instance.tool_trace, rebuilt.tool_trace)):
        if stored != replayed:
            mismatches.append(f"tool step {number}: {stored.function} differs")
    if not answer_equal(instance.answer, rebuilt.answer):
        mismatches.append(f"answer {instance.answer.to_dict()} != {rebuilt.answer.to_dict()}")
    if tuple(instance.agent_route) != tuple(rebuilt.agent_route):
        mismatches.append("agent route differs")
    if tuple(instance.intents) != tuple(rebuilt.intents) or instance.question_type != rebuilt.question_type:
        mismatches.append("intents or question type differ from template")
    reason = plausibility_filter(instance)
    if reason:
        mismatches.append(reason)
    return mismatches


def validate_dataset(
    instances: Iterable[QAInstance], templates: dict[str, Template], store: GeoStore, cache: ToolCache
) -> dict[str, list[str]]:
    """
    Returns:
        id экземпляра -> расхождения, только для неверных экземпляров
    """

    failures = {}
    checked = 0
    for instance in instances:
        checked += 1
        mismatches = revalidate(instance, templates, store, cache)
        if mismatches:
            logger.warning("%s: %s", instance.id, "; ".join(mismatches))
            failures[instance.id] = mismatches
    logger.info("validated %d instances, %d with mismatches", checked, len(failures))
    return failures
