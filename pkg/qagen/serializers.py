"""
Схема документа шаблона
"""

import re

from django.conf import settings
from rest_framework import serializers

from domain.instances import QUESTION_TYPES, TOOL_FUNCTIONS
from domain.synthesis import COMPARATORS, DIFFERENCE, VALUE_KINDS, RuleKind
from geostore.tables import FAMILIES


# {name}, {name.i} и {table:family}
PLACEHOLDER_PATTERN = re.compile(r"\{(?:(table):)?([A-Za-z_]+)(?:\.(\d+))?\}")
# @name.i - координаты сущности из результата SQL, $name.i - значение плейсхолдера
REFERENCE_PATTERN = re.compile(r"^([@$])([A-Za-z_]+)(?:\.(\d+))?$")

DEFAULT_SOURCES = {
    "city": "city",
    "district": "district",
    "community_name": "community",
    "poi_name": "poi",
    "poi_label": "poi_label",
}
SOURCES = ("city", "district", "community", "poi", "poi_label", "choices")
ANSWER_SOURCES = ("sql", "tools")


def resolve_source(name: str, spec: dict):
    """Источник значений: явный, по имени плейсхолдера или список choices"""
    if spec.get("source"):
        return spec["source"]
    if name in DEFAULT_SOURCES:
        return DEFAULT_SOURCES[name]
    return "choices" if spec.get("choices") else None


class PlaceholderSerializer(serializers.Serializer):
    """
    Fields:
        source: Откуда берутся значения; по умолчанию выводится из имени
        count: Сколько различных значений нужно
        choices: Допустимые значения для source=choices
        within: Имя плейсхолдера-района, которым ограничена выборка
    """

    source = serializers.ChoiceField(choices=SOURCES, required=False)
    count = serializers.IntegerField(min_value=1, max_value=5, default=1)
    choices = serializers.ListField(child=serializers.JSONField(), required=False)
    within = serializers.CharField(required=False)


class ToolPatternSerializer(serializers.Serializer):
    function = serializers.ChoiceField(choices=TOOL_FUNCTIONS)
    params = serializers.DictField()
    label = serializers.CharField(required=False)


class RuleSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=[kind.value for kind in RuleKind])
    op = serializers.ChoiceField(choices=[*COMPARATORS, DIFFERENCE], required=False)
    bound = serializers.JSONField(required=False)
    scale = serializers.FloatField(default=1.0)
    limit = serializers.JSONField(required=False)
    entities = serializers.BooleanField(default=False)


class AnswerSerializer(serializers.Serializer):
    """
    Fields:
        source: sql - значения из строк результата, tools - из ответов инструментов
        label: Колонка с именем сущности (для sql)
        value: Колонка со значением (для sql); без неё элементы - сами сущности
        value_kind: Вид значения
        unit: Единица для вида number
        rule: Правило вывода ответа
    """

    source = serializers.ChoiceField(choices=ANSWER_SOURCES)
    label = serializers.CharField(required=False)
    value = serializers.CharField(required=False)
    value_kind = serializers.ChoiceField(choices=VALUE_KINDS, default="entity")
    unit = serializers.CharField(default="", allow_blank=True)
    rule = RuleSerializer()


class TemplateSerializer(serializers.Serializer):
    template_id = serializers.RegexField(r"^[a-z][a-z0-9_]*$", max_length=64)
    question_type = serializers.ChoiceField(choices=QUESTION_TYPES)
    intents = serializers.ListField(child=serializers.ChoiceField(choices=[]), min_length=1)
    question = serializers.CharField()
    placeholders = serializers.DictField(child=PlaceholderSerializer(), default=dict)
    sql = serializers.CharField()
    tools = ToolPatternSerializer(many=True, required=False)
    answer = AnswerSerializer()

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.fields["intents"].child.choices = settings.QA_INTENTS

    def validate(self, attrs: dict) -> dict:
        placeholders = attrs["placeholders"]
        tools = attrs.get("tools") or []
        errors = {}

        for name, spec in placeholders.items():
            source = resolve_source(name, spec)
            if source is None:
                errors.setdefault("placeholders", []).append(f"{name}: source or choices required")
                continue
            if source == "choices" and not spec.get("choices"):
                errors.setdefault("placeholders", []).append(f"{name}: empty choices")
            if source == "choices" and len(set(map(str, spec.get("choices", [])))) < len(spec.get("choices", [])):
                errors.setdefault("placeholders", []).append(f"{name}: duplicate choices")
            within = spec.get("within")
            if within and (within not in placeholders or resolve_source(within, placeholders[within]) != "district"):
                errors.setdefault("placeholders", []).append(f"{name}: within must name a district placeholder")
            slot_type = settings.QA_PLACEHOLDER_SLOTS.get(name, name)
            if slot_type not in settings.QA_SLOT_TYPES:
                errors.setdefault("placeholders", []).append(f"{name}: unknown slot type {slot_type}")
        if "X" in placeholders:
            if any(choice not in (1, 2, 3) for choice in placeholders["X"].get("choices", [])):
                errors.setdefault("placeholders", []).append("X must be chosen from 1, 2, 3")

        def count(name: str) -> int:
            if name == "city":
                return 1
            return placeholders[name]["count"] if name in placeholders else 0

        seen = set()
        for match in PLACEHOLDER_PATTERN.finditer(attrs["question"]):
            table, name, index = match.group(1), match.group(2), int(match.group(3) or 0)
            if table:
                errors.setdefault("question", []).append("tables are not allowed in questions")
            elif index >= count(name):
                errors.setdefault("question", []).append(f"unbound placeholder {match.group()}")
            elif (name, index) in seen:
                errors.setdefault("question", []).append(f"placeholder {match.group()} repeats")
            seen.add((name, index))
        for name in placeholders:
            missing = [index for index in range(count(name)) if (name, index) not in seen]
            if missing:
                errors.setdefault("question", []).append(f"{name} values {missing} never appear")

        for match in PLACEHOLDER_PATTERN.finditer(attrs["sql"]):
            table, name, index = match.group(1), match.group(2), int(match.group(3) or 0)
            if table and name not in FAMILIES:
                errors.setdefault("sql", []).append(f"unknown table family {name}")
            elif not table and index >= count(name):
                errors.setdefault("sql", []).append(f"unbound placeholder {match.group()}")

        def check_reference(value, where: str) -> None:
            if isinstance(value, str) and value[:1] in "@$":
                reference = REFERENCE_PATTERN.match(value)
                if not reference or int(reference.group(3) or 0) >= count(reference.group(2)):
                    errors.setdefault(where, []).append(f"unbound reference {value}")

        for pattern in tools:
            for value in pattern["params"].values():
                check_reference(value, "tools")
            check_reference(pattern.get("label"), "tools")
        check_reference(attrs["answer"]["rule"].get("bound"), "answer")
        check_reference(attrs["answer"]["rule"].get("limit"), "answer")

        if attrs["question_type"] == 1 and tools:
            errors.setdefault("tools", []).append("type 1 templates call no tools")
        if attrs["question_type"] in (2, 3) and not tools:
            errors.setdefault("tools", []).append("type 2 and 3 templates need tool calls")
        if attrs["answer"]["source"] == "sql" and not attrs["answer"].get("label"):
            errors.setdefault("answer", []).append("sql answers need a label column")
        if attrs["answer"]["source"] == "tools" and not tools:
            errors.setdefault("answer", []).append("tool answers need tool calls")

        if errors:
            raise serializers.ValidationError(errors)
        attrs["tools"] = tools
        return attrs
