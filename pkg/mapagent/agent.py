"""
Агент карт: выбор геофункций, вызовы через кеш и финальный вывод ответа
"""

import logging
from pathlib import Path
from typing import Callable, Optional

from django.conf import settings

from agents.episode import Episode
from agents.exceptions import BackendError
from agents.oracle import gold_calls, gold_rule
from agents.prompting import fill_prompt, load_prompt, render_request
from agents.protocol import AgentResult, AgentTask, Evidence
from domain.geo import GeoPoint
from domain.synthesis import InconclusiveError, RuleKind, SynthesisRule, synthesize
from qagen.templates import Template, load_catalog
from toolcache.calls import payload_items
from toolcache.exceptions import ToolError
from toolcache.service import ToolCache
from .decisions import MapPlan, ToolDecision, parse_decision, resolve_coordinates
from .exceptions import DecisionParseError, MissingCoordinatesError
from .tools import render_tool_descriptions


logger = logging.getLogger(__name__)

DECIDE_PROMPT = Path(__file__).resolve().parent / "prompts" / "decide_v1.txt"
PASSTHROUGH = SynthesisRule(RuleKind.PASSTHROUGH)


class AttemptFailure(Exception):
    """Попытка не дала ответа; сообщение уходит модели при следующей попытке"""


def render_context(context: dict[str, GeoPoint]) -> str:
    if not context:
        return "(none)"
    return "\n".join(f"{name}: {point.latitude}, {point.longitude}" for name, point in sorted(context.items()))


def decide_tool(task: AgentTask, episode: Episode, failures=()) -> MapPlan:
    """
    Запрашивает решение у бэкенда; ошибки прошлых попыток передаются в сообщениях

    Raises:
        DecisionParseError: ответ не разбирается
        BackendError: бэкенд недоступен
    """

    prompt = fill_prompt(load_prompt(DECIDE_PROMPT), tools=render_tool_descriptions())
    content = (
        render_request(task.question, task.intents, task.slots)
        + f"\nSub-task: {task.task_description}\nKnown entities:\n{render_context(task.context)}"
    )
    messages = [{"role": "user", "content": content}]
    for attempt, failure in enumerate(failures, start=1):
        messages.append({"role": "user", "content": f"Attempt {attempt} failed: {failure}"})
    reply = episode.complete(
        prompt,
        messages,
        role="map.decide",
        context={"coordinates": {name: point.as_list() for name, point in task.context.items()}},
    )
    return parse_decision(reply)


def call_tool(
    decision: ToolDecision,
    cache: ToolCache,
    context: dict[str, GeoPoint],
    attempt: int,
    episode: Optional[Episode] = None,
) -> Evidence:
    """
    Один вызов с подстановкой координат; вызов пишется в журнал эпизода

    Raises:
        MissingCoordinatesError: координат сущности нет в контексте
        AttemptFailure: кеш или провайдер вернули ошибку
    """

    params = resolve_coordinates(decision.params, context)
    try:
        request, payload = cache.call(decision.function, params)
    except ToolError as exc:
        if episode is not None:
            episode.record_tool(decision.function, params, attempt, error=f"{exc.code}: {exc}")
        raise AttemptFailure(f"{decision.function} failed with {exc.code}: {exc}") from exc
    if episode is not None:
        episode.record_tool(decision.function, request.params, attempt, result=payload)
    return Evidence(
        "tool_result",
        "map_agent",
        {"function": decision.function, "params": request.params, "label": decision.label, "result": payload},
    )


def _attempt(
    plan: MapPlan, cache: ToolCache, context: dict[str, GeoPoint], attempt: int, episode: Optional[Episode]
) -> list[Evidence]:
    """
    Raises:
        MissingCoordinatesError: координат сущности нет в контексте
        AttemptFailure: вызов не удался или ответ не выводится
    """

    if not plan.decisions:
        raise AttemptFailure("no function call was decided")
    evidence = []
    items = []
    for decision in plan.decisions:
        item = call_tool(decision, cache, context, attempt, episode)
        evidence.append(item)
        items.extend(payload_items(decision.function, item.payload["result"], decision.label))

    rule = plan.rule or PASSTHROUGH
    if rule.limit is not None and len(items) < rule.limit:
        raise AttemptFailure(f"{rule.limit} values requested, {len(items)} returned")
    try:
        answer = synthesize(rule, items)
    except InconclusiveError as exc:
        raise AttemptFailure(f"{rule.kind.value}: {exc}") from exc
    evidence.append(Evidence("derived", "map_agent", {"answer": answer.to_dict(), "rule": rule.to_dict()}))
    return evidence


def invoke_and_synthesize(
    plan: Optional[MapPlan],
    cache: ToolCache,
    *,
    context: Optional[dict[str, GeoPoint]] = None,
    attempt_cap: Optional[int] = None,
    redecide: Optional[Callable[[list[str]], MapPlan]] = None,
    episode: Optional[Episode] = None,
) -> AgentResult:
    """
    Выполняет вызовы плана и применяет правило; неудачная попытка
    повторяется с новым решением от redecide или с тем же планом

    Returns:
        success со свидетельствами tool_result и derived; unable, если нет
        координат или функция не подходит; error после attempt_cap попыток
    """

    if plan is None and redecide is None:
        raise ValueError("either a plan or a decision callback is required")
    cap = settings.MAP_AGENT_ATTEMPT_CAP if attempt_cap is None else attempt_cap
    if cap < 1:
        raise ValueError("attempt_cap must be at least 1")
    context = context or {}
    failures: list[str] = []
    for attempt in range(1, cap + 1):
        try:
            if plan is None or (attempt > 1 and redecide is not None):
                plan = redecide(failures)
            if plan.no_tool:
                return AgentResult.unable(f"no geospatial function applies: {plan.no_tool}")
            return AgentResult.success(_attempt(plan, cache, context, attempt, episode))
        except MissingCoordinatesError as exc:
            return AgentResult.unable(str(exc))
        except BackendError as exc:
            return AgentResult.error(f"backend failure: {exc}")
        except (DecisionParseError, AttemptFailure) as exc:
            failures.append(str(exc))
            logger.info("map attempt %d/%d failed: %s", attempt, cap, exc)
    return AgentResult.error(
        f"cannot derive a conclusive answer within {cap} attempts; last failure: {failures[-1]}"
    )


class MapAgent:
    """
    Attributes:
        cache(ToolCache): Кеш геофункций
        templates(dict): Каталог шаблонов для подмены эталонными вызовами
        attempt_cap(int): Попыток на одну подзадачу
    """

    name = "map_agent"

    def __init__(
        self, cache: ToolCache, templates: Optional[dict[str, Template]] = None, attempt_cap: Optional[int] = None
    ) -> None:
        self.cache = cache
        self._templates = templates
        self.attempt_cap = settings.MAP_AGENT_ATTEMPT_CAP if attempt_cap is None else attempt_cap

    @property
    def templates(self) -> dict[str, Template]:
        if self._templates is None:
            self._templates = load_catalog(settings.QA_TEMPLATE_DIR)
        return self._templates

    def injected_plan(self, episode: Episode) -> MapPlan:
        """Эталонные вызовы с координатами из трассы и правило шаблона"""

        gold = episode.gold
        template = self.templates[gold.template_id]
        decisions = tuple(
            ToolDecision(call["function"], call["params"], call["label"])
            for call in gold_calls(gold, template, by_name=False)
        )
        return MapPlan(decisions, gold_rule(gold, template))

    def handle(self, task: AgentTask, episode: Episode) -> AgentResult:
        if episode.injected("api"):
            return invoke_and_synthesize(
                self.injected_plan(episode),
                self.cache,
                context=task.context,
                attempt_cap=self.attempt_cap,
                episode=episode,
            )
        return invoke_and_synthesize(
            None,
            self.cache,
            context=task.context,
            attempt_cap=self.attempt_cap,
            redecide=lambda failures: decide_tool(task, episode, failures),
            episode=episode,
        )
