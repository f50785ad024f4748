"""
Построение QA-экземпляра по шаблону и подстановке
"""

import logging
from typing import Optional

from django.conf import settings

from domain.answers import render_answer
from domain.geo import GeoPoint, haversine
from domain.instances import QAInstance, SqlStep
from domain.synthesis import InconclusiveError, Item, synthesize
from geostore.coordinates import extract_coordinates
from geostore.exceptions import SqlExecutionError
from geostore.store import GeoStore, SqlResult
from toolcache.calls import payload_items
from toolcache.exceptions import ToolError
from toolcache.service import ToolCache
from .exceptions import Rejection
from .templates import (
    AnswerSpec,
    Binding,
    Template,
    fill_question,
    render_sql,
    resolve_params,
    resolve_reference,
    resolve_rule,
)


logger = logging.getLogger(__name__)

PLAUSIBILITY_MODES = ("walking", "cycling")


def sql_items(answer: AnswerSpec, result: SqlResult) -> list[Item]:
    """
    Raises:
        Rejection: в результате нет колонок, названных в правиле
    """

    try:
        label_index = result.columns.index(answer.label_column)
        value_index = result.columns.index(answer.value_column) if answer.value_column else None
    except ValueError:
        raise Rejection("empty_answer", f"result columns {result.columns} lack the answer columns") from None
    items = []
    for row in result.rows:
        value = row[value_index] if value_index is not None else None
        items.append(Item(str(row[label_index]), value, answer.value_kind, answer.unit))
    return items


def instantiate(
    template: Template,
    binding: Binding,
    store: GeoStore,
    cache: ToolCache,
    instance_id: str = "",
) -> QAInstance:
    """
    Выполняет SQL, вызывает инструменты через кеш и выводит ответ

    Raises:
        Rejection: SQL не выполняется, результат пуст, вызов не разрешается
            или ответ не выводится
    """

    city = binding["city"][0]
    question, slots = fill_question(template, binding)

    statement = render_sql(template, binding)
    try:
        result = store.execute_sql(statement)
    except SqlExecutionError as exc:
        raise Rejection("non_executable_sql", exc.message) from exc
    if not result.rows:
        raise Rejection("empty_sql_result", statement)
    sql_step = SqlStep(statement, result.columns, result.rows)
    coordinates = extract_coordinates(result.columns, result.rows)

    tool_steps = []
    tool_items: list[Item] = []
    for pattern in template.tools:
        try:
            params = resolve_params(pattern.params, binding, coordinates)
        except KeyError as exc:
            raise Rejection("unresolvable_tool_call", str(exc)) from exc
        try:
            request, payload = cache.call(pattern.function, params)
        except ToolError as exc:
            raise Rejection("unresolvable_tool_call", str(exc)) from exc
        if not payload["rows"]:
            raise Rejection("empty_tool_result", request.key)
        tool_steps.append(request.to_step(payload))
        label = resolve_reference(pattern.label, binding, {}) if pattern.label else ""
        tool_items.extend(payload_items(pattern.function, payload, str(label)))

    rule = resolve_rule(template.answer, binding)
    if template.answer.source == "sql":
        items = sql_items(template.answer, result)
    else:
        items = tool_items
        if rule.limit is not None and len(items) < rule.limit:
            raise Rejection("insufficient_tool_result", f"{rule.limit} requested, {len(items)} found")
    try:
        answer = synthesize(rule, items)
    except InconclusiveError as exc:
        raise Rejection("empty_answer", str(exc)) from exc

    route = ["db_agent"] + (["map_agent"] if tool_steps else [])
    return QAInstance(
        id=instance_id,
        template_id=template.template_id,
        city=city,
        question=question,
        question_type=template.question_type,
        intents=template.intents,
        slots=slots,
        sql_trace=(sql_step,),
        tool_trace=tuple(tool_steps),
        agent_route=tuple(route),
        answer=answer,
        nl_answer=render_answer(answer),
    )


def step_mode(step) -> Optional[str]:
    """Способ передвижения шага: mode для времени, kind для расстояния"""
    if step.function in ("time_query", "rush_hour_query"):
        return step.params.get("mode")
    if step.function == "distance_query":
        return step.params.get("kind")
    return None


def plausibility_filter(instance: QAInstance) -> Optional[str]:
    """
    Отбрасывает пешие и велосипедные шаги длиннее порога по прямой

    Returns:
        None, если экземпляр правдоподобен, иначе код причины
    """

    limits = {
        "walking": settings.PLAUSIBILITY_WALKING_LIMIT,
        "cycling": settings.PLAUSIBILITY_CYCLING_LIMIT,
    }
    for step in instance.tool_trace:
        mode = step_mode(step)
        if mode not in PLAUSIBILITY_MODES:
            continue
        straight = haversine(
            GeoPoint.from_value(step.params["origin"]),
            GeoPoint.from_value(step.params["destination"]),
        )
        if straight > limits[mode]:
            logger.debug("%s: %s step spans %.0f m", instance.id, mode, straight)
            return f"implausible_{mode}"
    return None
