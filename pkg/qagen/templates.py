"""
Шаблоны вопросов: загрузка каталога и подстановка значений
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Optional

import yaml
from django.conf import settings

from domain.geo import GeoPoint
from domain.instances import SlotAnnotation
from domain.synthesis import SynthesisRule
from geostore.tables import quote_literal, table_name
from .exceptions import TemplateError
from .serializers import (
    PLACEHOLDER_PATTERN,
    REFERENCE_PATTERN,
    TemplateSerializer,
    resolve_source,
)


logger = logging.getLogger(__name__)

Binding = dict[str, tuple]


@dataclass(frozen=True)
class PlaceholderSpec:
    """
    Attributes:
        name(str): Имя плейсхолдера
        source(str): Откуда берутся значения
        count(int): Сколько различных значений выбирается
        choices(tuple): Допустимые значения для source=choices
        within(str): Плейсхолдер района, ограничивающий выборку
    """

    name: str
    source: str
    count: int = 1
    choices: tuple = ()
    within: Optional[str] = None

    @property
    def slot_type(self) -> str:
        return settings.QA_PLACEHOLDER_SLOTS.get(self.name, self.name)


CITY_PLACEHOLDER = PlaceholderSpec("city", "city")


@dataclass(frozen=True, eq=False)
class ToolPattern:
    function: str
    params: dict[str, Any]
    label: Optional[str] = None


@dataclass(frozen=True, eq=False)
class AnswerSpec:
    """
    Attributes:
        source(str): sql или tools
        rule(dict): Правило со ссылками на плейсхолдеры
        label_column(str): Колонка имени сущности для sql
        value_column(str): Колонка значения для sql
        value_kind(str): Вид значения
        unit(str): Единица для вида number
    """

    source: str
    rule: dict[str, Any]
    label_column: Optional[str] = None
    value_column: Optional[str] = None
    value_kind: str = "entity"
    unit: str = ""


@dataclass(frozen=True, eq=False)
class Template:
    """
    Параметризованная тройка (вопрос, SQL, вызовы инструментов) с правилом ответа
    """

    template_id: str
    question_type: int
    intents: tuple[str, ...]
    question: str
    placeholders: dict[str, PlaceholderSpec]
    sql: str
    tools: tuple[ToolPattern, ...]
    answer: AnswerSpec
    source_file: str = field(default="")

    def spec(self, name: str) -> PlaceholderSpec:
        if name == "city" and name not in self.placeholders:
            return CITY_PLACEHOLDER
        return self.placeholders[name]

    @cached_property
    def question_placeholders(self) -> tuple[tuple[str, int], ...]:
        """Пары (имя, индекс) в порядке появления в вопросе"""
        return tuple(
            (match.group(2), int(match.group(3) or 0))
            for match in PLACEHOLDER_PATTERN.finditer(self.question)
        )

    @cached_property
    def slot_types(self) -> tuple[str, ...]:
        return tuple(self.spec(name).slot_type for name, _ in self.question_placeholders)

    @cached_property
    def tables(self) -> tuple[str, ...]:
        """Семейства таблиц, к которым обращается SQL, без повторов"""
        families = []
        for match in PLACEHOLDER_PATTERN.finditer(self.sql):
            if match.group(1) and match.group(2) not in families:
                families.append(match.group(2))
        return tuple(families)

    @cached_property
    def skeleton(self) -> str:
        """Текст вопроса без плейсхолдеров"""
        return " ".join(PLACEHOLDER_PATTERN.sub(" ", self.question).split())


def template_from_dict(data: dict, source: str = "") -> Template:
    """
    Raises:
        TemplateError: документ не проходит схему
    """

    serializer = TemplateSerializer(data=data)
    if not serializer.is_valid():
        template_id = data.get("template_id", "?") if isinstance(data, dict) else "?"
        raise TemplateError(source or "<template>", f"{template_id}: {dict(serializer.errors)}")
    attrs = serializer.validated_data
    placeholders = {
        name: PlaceholderSpec(
            name=name,
            source=resolve_source(name, spec),
            count=spec["count"],
            choices=tuple(spec.get("choices") or ()),
            within=spec.get("within"),
        )
        for name, spec in attrs["placeholders"].items()
    }
    answer = attrs["answer"]
    return Template(
        template_id=attrs["template_id"],
        question_type=attrs["question_type"],
        intents=tuple(attrs["intents"]),
        question=attrs["question"],
        placeholders=placeholders,
        sql=" ".join(attrs["sql"].split()),
        tools=tuple(
            ToolPattern(pattern["function"], dict(pattern["params"]), pattern.get("label"))
            for pattern in attrs["tools"]
        ),
        answer=AnswerSpec(
            source=answer["source"],
            rule=dict(answer["rule"]),
            label_column=answer.get("label"),
            value_column=answer.get("value"),
            value_kind=answer["value_kind"],
            unit=answer["unit"],
        ),
        source_file=source,
    )


def load_catalog(directory: Path) -> dict[str, Template]:
    """
    Читает все *.yaml каталога; документ содержит список templates

    Raises:
        TemplateError: ошибка разбора, схемы или повтор template_id
    """

    directory = Path(directory)
    paths = sorted(directory.glob("*.yaml"))
    if not paths:
        raise TemplateError(str(directory), "no template documents found")
    catalog: dict[str, Template] = {}
    for path in paths:
        try:
            document = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise TemplateError(str(path), f"malformed YAML: {exc}") from exc
        if not isinstance(document, dict) or not isinstance(document.get("templates"), list):
            raise TemplateError(str(path), "expected a mapping with a templates list")
        for data in document["templates"]:
            template = template_from_dict(data, str(path))
            if template.template_id in catalog:
                raise TemplateError(str(path), f"duplicate template_id {template.template_id}")
            catalog[template.template_id] = template
    logger.info("loaded %d templates from %s", len(catalog), directory)
    return dict(sorted(catalog.items()))


def fill_question(template: Template, binding: Binding) -> tuple[str, tuple[SlotAnnotation, ...]]:
    """
    Подставляет значения в вопрос, отслеживая позиции плейсхолдеров

    Returns:
        Вопрос и слоты в порядке плейсхолдеров шаблона
    """

    parts = []
    slots = []
    position = 0
    cursor = 0
    for match in PLACEHOLDER_PATTERN.finditer(template.question):
        literal = template.question[cursor:match.start()]
        parts.append(literal)
        position += len(literal)
        name, index = match.group(2), int(match.group(3) or 0)
        value = str(binding[name][index])
        parts.append(value)
        slots.append(SlotAnnotation(template.spec(name).slot_type, value, (position, position + len(value))))
        position += len(value)
        cursor = match.end()
    parts.append(template.question[cursor:])
    return "".join(parts), tuple(slots)


def render_sql(template: Template, binding: Binding) -> str:
    city = binding["city"][0]

    def substitute(match) -> str:
        if match.group(1):
            return table_name(match.group(2), city)
        return quote_literal(binding[match.group(2)][int(match.group(3) or 0)])

    return PLACEHOLDER_PATTERN.sub(substitute, template.sql)


def resolve_reference(value, binding: Binding, coordinates: dict[str, GeoPoint]):
    """
    Разворачивает @name.i в координаты и $name.i в значение; прочее - как есть

    Raises:
        KeyError: у сущности нет координат в результате SQL
    """

    if not isinstance(value, str):
        return value
    match = REFERENCE_PATTERN.match(value)
    if not match:
        return value
    bound = binding[match.group(2)][int(match.group(3) or 0)]
    if match.group(1) == "$":
        return bound
    try:
        return coordinates[str(bound)].as_list()
    except KeyError:
        raise KeyError(f"no coordinates for {bound!r}") from None


def resolve_params(params: dict, binding: Binding, coordinates: dict[str, GeoPoint]) -> dict:
    return {name: resolve_reference(value, binding, coordinates) for name, value in params.items()}


def resolve_rule(answer: AnswerSpec, binding: Binding) -> SynthesisRule:
    rule = answer.rule
    bound = resolve_reference(rule.get("bound"), binding, {})
    if bound is not None:
        bound = float(bound) * rule.get("scale", 1.0)
    limit = resolve_reference(rule.get("limit"), binding, {})
    return SynthesisRule(
        kind=rule["kind"],
        op=rule.get("op"),
        bound=bound,
        limit=int(limit) if limit is not None else None,
        entities=rule.get("entities", False),
    )


def binding_from_slots(template: Template, city: str, slots) -> Binding:
    """
    Восстанавливает подстановку по слотам экземпляра; слоты идут в порядке
    плейсхолдеров шаблона

    Raises:
        ValueError: слоты не соответствуют шаблону
    """

    occurrences = template.question_placeholders
    slots = list(slots)
    if len(slots) != len(occurrences):
        raise ValueError(
            f"{template.template_id}: expected {len(occurrences)} slots, got {len(slots)}"
        )
    values: dict[str, dict[int, Any]] = {}
    for (name, index), slot in zip(occurrences, slots):
        spec = template.spec(name)
        if slot.slot_type != spec.slot_type:
            raise ValueError(f"slot {slot.slot_type} does not match placeholder {name}")
        value: Any = slot.value
        if spec.source == "choices":
            matches = [choice for choice in spec.choices if str(choice) == slot.value]
            if not matches:
                raise ValueError(f"{slot.value!r} is not a choice of {name}")
            value = matches[0]
        values.setdefault(name, {})[index] = value
    binding: Binding = {name: tuple(indexed[i] for i in sorted(indexed)) for name, indexed in values.items()}
    if binding.get("city", (city,)) != (city,):
        raise ValueError(f"city slot {binding['city'][0]!r} differs from instance city {city!r}")
    binding["city"] = (city,)
    return binding
