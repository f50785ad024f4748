"""
Метрики ответа и промежуточных шагов

Каждая метрика копится по областям: тип вопроса ("1", "2", "3"),
типы с геофункциями ("2+3") и "overall"
"""

import json
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from domain.answers import answer_equal, answer_items
from domain.instances import QAInstance
from toolcache.calls import make_request
from toolcache.exceptions import ToolError
from .exceptions import AlignmentError


OVERALL = "overall"
TOOL_TYPES = "2+3"


@dataclass
class Mean:
    """
    Attributes:
        total(float): Сумма значений
        count(int): Число значений
    """

    total: float = 0.0
    count: int = 0

    def add(self, value: float) -> None:
        self.total += value
        self.count += 1

    @property
    def value(self) -> Optional[float]:
        return self.total / self.count if self.count else None

    def to_dict(self) -> dict:
        return {"value": self.value, "count": self.count}


def scopes(question_type: int) -> tuple[str, ...]:
    if question_type in (2, 3):
        return (str(question_type), TOOL_TYPES, OVERALL)
    return (str(question_type), OVERALL)


def accuracy(pred, gold) -> int:
    """Строгое совпадение ответа; неотвечаемый вердикт всегда 0"""
    return int(answer_equal(pred, gold))


def item_f1(pred, gold) -> float:
    """F1 по мультимножествам элементов ответа; 0, если одно из них пусто"""

    predicted, expected = Counter(answer_items(pred)), Counter(answer_items(gold))
    if not predicted or not expected:
        return 0.0
    hits = sum((predicted & expected).values())
    if not hits:
        return 0.0
    precision = hits / sum(predicted.values())
    recall = hits / sum(expected.values())
    return 2 * precision * recall / (precision + recall)


def align(transcripts, golds) -> list[tuple]:
    """
    Пары (журнал, эталон) в порядке id эталона

    Raises:
        AlignmentError: наборы id различаются
    """

    golds = list(golds)
    by_id = {}
    for transcript in transcripts:
        if transcript.instance_id in by_id:
            raise AlignmentError(f"duplicate transcript for {transcript.instance_id}")
        by_id[transcript.instance_id] = transcript
    gold_by_id = {gold.id: gold for gold in golds}
    if set(by_id) != set(gold_by_id) or len(gold_by_id) != len(golds):
        missing = sorted(set(gold_by_id) - set(by_id))[:5]
        extra = sorted(set(by_id) - set(gold_by_id))[:5]
        raise AlignmentError(f"transcripts do not match gold instances (missing {missing}, unknown {extra})")
    return [(by_id[key], gold_by_id[key]) for key in sorted(gold_by_id)]


def row_multiset(rows) -> Counter:
    return Counter(json.dumps(list(row), ensure_ascii=False, default=str) for row in rows)


def first_sql_attempt(transcript) -> Optional[dict]:
    return transcript.sql_attempts[0] if transcript.sql_attempts else None


def sql_executes(transcript) -> bool:
    attempt = first_sql_attempt(transcript)
    return attempt is not None and attempt["ok"]


def sql_passes(transcript, gold: QAInstance) -> bool:
    """Первый кандидат выполнился и вернул те же строки, что эталон, без учёта порядка"""
    attempt = first_sql_attempt(transcript)
    if attempt is None or not attempt["ok"] or not gold.sql_trace:
        return False
    return row_multiset(attempt["rows"]) == row_multiset(gold.sql_trace[0].expected_result)


def request_key(function: str, params) -> Optional[str]:
    try:
        return make_request(function, params).key
    except ToolError:
        return None


def generated_calls(transcript) -> list[dict]:
    """Вызовы последней попытки: последняя группа с одинаковыми (dispatch, attempt)"""

    if not transcript.tool_calls:
        return []
    last = transcript.tool_calls[-1]
    group = (last["dispatch"], last["attempt"])
    return [call for call in transcript.tool_calls if (call["dispatch"], call["attempt"]) == group]


def api_labels_match(transcript, gold: QAInstance) -> bool:
    """Последовательность (функция, параметры) после нормализации равна эталонной"""

    generated = [request_key(call["function"], call["params"]) for call in generated_calls(transcript)]
    expected = [request_key(step.function, step.params) for step in gold.tool_trace]
    return None not in generated and generated == expected


def planning_matches(transcript, gold: QAInstance) -> bool:
    return tuple(transcript.route) == tuple(gold.agent_route)


ANSWER_METRICS = ("accuracy", "f1")
TRACE_METRICS = ("ecr", "pass_at_1", "api_label_accuracy", "planning_accuracy")


def answer_metrics(transcripts, golds) -> dict[str, dict[str, Mean]]:
    """
    Raises:
        AlignmentError: журналы не соответствуют эталону
    """

    table: dict[str, dict[str, Mean]] = {name: {} for name in ANSWER_METRICS}
    for transcript, gold in align(transcripts, golds):
        for scope in scopes(gold.question_type):
            table["accuracy"].setdefault(scope, Mean()).add(accuracy(transcript.answer, gold.answer))
            table["f1"].setdefault(scope, Mean()).add(item_f1(transcript.answer, gold.answer))
    return table


def trace_metrics(transcripts, golds) -> dict[str, dict[str, Mean]]:
    """
    ECR и pass@1 по первому SQL-кандидату; точность меток API только для
    экземпляров с эталонными вызовами; точность планирования только для
    журналов супервизора

    Raises:
        AlignmentError: журналы не соответствуют эталону
    """

    table: dict[str, dict[str, Mean]] = {name: {} for name in TRACE_METRICS}
    for transcript, gold in align(transcripts, golds):
        for scope in scopes(gold.question_type):
            if gold.sql_trace:
                table["ecr"].setdefault(scope, Mean()).add(int(sql_executes(transcript)))
                table["pass_at_1"].setdefault(scope, Mean()).add(int(sql_passes(transcript, gold)))
            if gold.tool_trace:
                table["api_label_accuracy"].setdefault(scope, Mean()).add(int(api_labels_match(transcript, gold)))
            if transcript.method == "supervisor":
                table["planning_accuracy"].setdefault(scope, Mean()).add(int(planning_matches(transcript, gold)))
    return table
