"""
Оракульные бэкенды: идеальные ответы стадий по эталонному экземпляру и его шаблону

Оракул доверяет разметке SLU, которую получил эпизод, если её слоты заполняют
шаблон экземпляра: SQL и вызовы строятся по значениям слотов, а агент карт
планируется, только если среди интентов есть интент геофункций. Без разметки
или с разметкой, не ложащейся на шаблон, оракул читает вопрос сам, то есть
берёт эталон. Финальный ответ выводится из собранных свидетельств по правилу
шаблона, поэтому ошибка любой предыдущей стадии отражается на ответе
"""

import json
import logging
from dataclasses import dataclass
from typing import Optional

from domain.answers import CanonicalAnswer, answer_from_dict
from domain.instances import QAInstance
from domain.synthesis import InconclusiveError, SynthesisRule, synthesize
from geostore.store import SqlResult
from geostore.tables import caption_text
from qagen.exceptions import Rejection
from qagen.instantiate import sql_items
from qagen.templates import (
    Binding,
    Template,
    binding_from_slots,
    render_sql,
    resolve_reference,
    resolve_rule,
)
from toolcache.calls import payload_items
from .envelopes import render_answer_envelope
from .exceptions import BackendError
from .protocol import Directive


logger = logging.getLogger(__name__)

SUBTASKS = {
    "db_agent": "Look up the entities named in the question and their coordinates",
    "map_agent": "Call the geospatial functions for these entities and derive the answer",
}
NO_TOOL_REPLY = "NO_TOOL: the question needs no geospatial function"
UNSURE_REPLY = "I cannot tell which entities the question is about."


def gold_binding(instance: QAInstance, template: Template) -> Binding:
    return binding_from_slots(template, instance.city, instance.slots)


def gold_rule(instance: QAInstance, template: Template, binding: Optional[Binding] = None) -> Optional[SynthesisRule]:
    """Правило ответа шаблона, если ответ выводится из инструментов"""

    if template.answer.source != "tools":
        return None
    return resolve_rule(template.answer, binding or gold_binding(instance, template))


def gold_calls(
    instance: QAInstance, template: Template, *, by_name: bool = True, binding: Optional[Binding] = None
) -> list[dict]:
    """
    Эталонные вызовы с метками; координаты сущностей из SQL заменяются
    их именами, если by_name

    Args:
        binding: Подстановка вместо эталонной; значения $-ссылок берутся из неё
    """

    relabelled = binding is not None
    binding = binding or gold_binding(instance, template)
    calls = []
    for pattern, step in zip(template.tools, instance.tool_trace):
        params = {}
        for name, value in step.params.items():
            raw = pattern.params.get(name)
            if by_name and isinstance(raw, str) and raw.startswith("@"):
                params[name] = str(resolve_reference("$" + raw[1:], binding, {}))
            elif relabelled and isinstance(raw, str) and raw.startswith("$"):
                params[name] = resolve_reference(raw, binding, {})
            else:
                params[name] = value
        label = resolve_reference(pattern.label, binding, {}) if pattern.label else ""
        calls.append({"function": step.function, "params": params, "label": str(label)})
    return calls


def derive_answer(
    instance: QAInstance, template: Template, evidence, binding: Optional[Binding] = None
) -> Optional[CanonicalAnswer]:
    """
    Ответ по правилу шаблона из свидетельств: строки SQL для sql-шаблонов,
    выведенный ответ или результаты инструментов для остальных
    """

    evidence = list(evidence)
    try:
        rule = resolve_rule(template.answer, binding or gold_binding(instance, template))
        if template.answer.source == "sql":
            rows = [item for item in evidence if item.kind == "rows"]
            if not rows:
                return None
            payload = rows[-1].payload
            result = SqlResult(tuple(payload["columns"]), tuple(tuple(row) for row in payload["rows"]))
            return synthesize(rule, sql_items(template.answer, result))
        derived = [item for item in evidence if item.kind == "derived"]
        if derived:
            return answer_from_dict(derived[-1].payload["answer"])
        items = []
        for item in evidence:
            if item.kind == "tool_result":
                payload = item.payload
                items.extend(payload_items(payload["function"], payload["result"], payload.get("label", "")))
        if rule.limit is not None and len(items) < rule.limit:
            return None
        return synthesize(rule, items)
    except (Rejection, InconclusiveError, ValueError, KeyError):
        return None


def tool_intents(templates) -> frozenset[str]:
    """Интенты, которые встречаются только у шаблонов с вызовами геофункций"""

    with_tools, without_tools = set(), set()
    for template in templates:
        (with_tools if template.tools else without_tools).update(template.intents)
    return frozenset(with_tools - without_tools)


@dataclass(frozen=True)
class Reading:
    """
    Как оракул понял вопрос

    Attributes:
        intents(tuple): Интенты, по которым строится план
        binding(dict): Подстановка значений слотов в шаблон
        labelled(bool): Подстановка взята из разметки SLU, а не из эталона
    """

    intents: tuple[str, ...]
    binding: Binding
    labelled: bool


class OracleBackend:
    """
    Отвечает каждой стадии так, как ответила бы идеальная модель с той
    разметкой SLU, что пришла в context["intents"] и context["slots"]

    Требует эталонный экземпляр в context["instance"]
    """

    name = "oracle"

    def __init__(self, templates: dict[str, Template]) -> None:
        self.templates = templates
        self.tool_intents = tool_intents(templates.values())

    def _gold(self, role: str, context: Optional[dict]) -> tuple[QAInstance, Template]:
        instance = (context or {}).get("instance")
        if instance is None:
            raise BackendError("oracle needs the gold instance", role)
        try:
            return instance, self.templates[instance.template_id]
        except KeyError:
            raise BackendError(f"unknown template {instance.template_id}", role) from None

    def read(self, instance: QAInstance, template: Template, context: dict) -> Reading:
        slots = tuple(context.get("slots") or ())
        gold = gold_binding(instance, template)
        if slots:
            try:
                binding = binding_from_slots(template, instance.city, slots)
                render_sql(template, binding)
                resolve_rule(template.answer, binding)
            except (Rejection, ValueError, KeyError, IndexError):
                logger.debug("%s: SLU slots do not fit %s", instance.id, template.template_id)
            else:
                intents = tuple(context.get("intents") or ()) or tuple(instance.intents)
                return Reading(intents, binding, binding != gold)
        return Reading(tuple(instance.intents), gold, False)

    def route(self, instance: QAInstance, reading: Reading) -> list[str]:
        if set(reading.intents) == set(instance.intents):
            return list(instance.agent_route)
        route = [specialist for specialist in instance.agent_route if specialist == "db_agent"]
        if self.tool_intents & set(reading.intents):
            route.append("map_agent")
        return route

    def complete(self, system_prompt, messages, *, role, context=None) -> str:
        instance, template = self._gold(role, context)
        context = context or {}
        if role == "slu.fewshot":
            return json.dumps(
                {
                    "intents": list(instance.intents),
                    "slots": [{"slot_type": slot.slot_type, "value": slot.value} for slot in instance.slots],
                },
                ensure_ascii=False,
            )
        if role == "qagen.paraphrase":
            return instance.question
        reading = self.read(instance, template, context)
        if role == "supervisor.plan":
            return self._directives(self.route(instance, reading))
        if role == "supervisor.replan":
            route = self.route(instance, reading)
            remaining = list(route)
            for specialist in context.get("succeeded", ()):
                if specialist in remaining:
                    remaining.remove(specialist)
            return self._directives(remaining or route)
        if role == "supervisor.sufficiency":
            return "CONTINUE" if context.get("remaining") else "SUFFICIENT"
        if role == "supervisor.finalize":
            return render_answer_envelope(
                derive_answer(instance, template, context.get("evidence", ()), reading.binding)
            )
        if role == "db.caption":
            return caption_text(template.tables[0], reading.binding["city"][0])
        if role == "db.sql":
            return self._sql(instance, template, reading)
        if role == "map.decide":
            return self._map_decision(instance, template, reading)
        if role == "standard.step":
            return self._standard_step(instance, template, reading, context.get("evidence", ()))
        raise BackendError("oracle has no answer for this stage", role)

    @staticmethod
    def _directives(route) -> str:
        return "\n".join(Directive(specialist, SUBTASKS[specialist]).render() for specialist in route)

    @staticmethod
    def _statement(instance: QAInstance, template: Template, reading: Reading) -> str:
        if not reading.labelled:
            return instance.sql_trace[0].statement
        return render_sql(template, reading.binding)

    def _sql(self, instance: QAInstance, template: Template, reading: Reading) -> str:
        return f"```sql\n{self._statement(instance, template, reading)}\n```"

    def _calls(self, instance: QAInstance, template: Template, reading: Reading) -> list[dict]:
        if reading.labelled:
            try:
                return gold_calls(instance, template, binding=reading.binding)
            except (KeyError, IndexError):
                logger.debug("%s: calls keep the gold values", instance.id)
        return gold_calls(instance, template)

    def _map_decision(self, instance: QAInstance, template: Template, reading: Reading) -> str:
        if not instance.tool_trace:
            return NO_TOOL_REPLY
        lines = [
            "CALL " + json.dumps(call, ensure_ascii=False, sort_keys=True)
            for call in self._calls(instance, template, reading)
        ]
        rule = gold_rule(instance, template, reading.binding)
        if rule is not None:
            lines.append("RULE " + json.dumps(rule.to_dict(), sort_keys=True))
        return "\n".join(lines)

    def _standard_step(self, instance: QAInstance, template: Template, reading: Reading, evidence) -> str:
        kinds = {item.kind for item in evidence}
        if "rows" not in kinds:
            return self._sql(instance, template, reading)
        wants_tools = "map_agent" in self.route(instance, reading)
        if wants_tools and "tool_result" not in kinds:
            if not instance.tool_trace:
                return UNSURE_REPLY
            return "\n".join(
                "CALL " + json.dumps(call, ensure_ascii=False, sort_keys=True)
                for call in self._calls(instance, template, reading)
            )
        return render_answer_envelope(derive_answer(instance, template, evidence, reading.binding))


class FailingStageBackend(OracleBackend):
    """
    Оракул, который ошибается на одной стадии

    На slu.fewshot ошибка правдоподобна: слоты верные, а интенты взяты от
    шаблона другого рода (с геофункциями вместо без них и наоборот); на
    остальных стадиях ответ не разбирается
    """

    name = "failing"

    def __init__(self, templates: dict[str, Template], failing_role: str, reply: str = "I am not sure.") -> None:
        super().__init__(templates)
        self.failing_role = failing_role
        self.reply = reply

    def wrong_intents(self, instance: QAInstance) -> list[str]:
        needs_tools = bool(instance.tool_trace)
        for template_id in sorted(self.templates):
            template = self.templates[template_id]
            if bool(template.tools) != needs_tools:
                return list(template.intents)
        return []

    def complete(self, system_prompt, messages, *, role, context=None) -> str:
        if role != self.failing_role:
            return super().complete(system_prompt, messages, role=role, context=context)
        if role == "slu.fewshot":
            instance, _ = self._gold(role, context)
            return json.dumps(
                {
                    "intents": self.wrong_intents(instance),
                    "slots": [{"slot_type": slot.slot_type, "value": slot.value} for slot in instance.slots],
                },
                ensure_ascii=False,
            )
        return self.reply
