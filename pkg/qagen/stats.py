"""
Сводная статистика набора данных
"""

from collections import Counter
from typing import Iterable

import sqlglot
from sqlglot import exp
from sqlglot.errors import SqlglotError

from domain.dataset import tokenize
from domain.instances import QAInstance
from geostore.store import SQL_DIALECT


def _tables_used(instance: QAInstance) -> int:
    tables = set()
    for step in instance.sql_trace:
        try:
            tree = sqlglot.parse_one(step.statement, read=SQL_DIALECT)
        except SqlglotError:
            continue
        tables.update(table.name for table in tree.find_all(exp.Table))
    return len(tables)


def dataset_stats(instances: Iterable[QAInstance]) -> dict:
    instances = list(instances)
    total = len(instances)
    words = [len([token for token, _, _ in tokenize(instance.question) if token.isalnum()]) for instance in instances]
    intents = Counter(intent for instance in instances for intent in instance.intents)
    slots = Counter(slot.slot_type for instance in instances for slot in instance.slots)
    tables = [_tables_used(instance) for instance in instances]
    return {
        "utterances": total,
        "single_table": sum(1 for count in tables if count == 1),
        "multi_table": sum(1 for count in tables if count > 1),
        "single_intent": sum(1 for instance in instances if len(instance.intents) == 1),
        "multi_intent": sum(1 for instance in instances if len(instance.intents) > 1),
        "avg_words": round(sum(words) / total, 2) if total else 0.0,
        "intents": len(intents),
        "slots": len(slots),
        "avg_slots": round(sum(len(instance.slots) for instance in instances) / total, 2) if total else 0.0,
        "per_type": {
            str(question_type): sum(1 for instance in instances if instance.question_type == question_type)
            for question_type in (1, 2, 3)
        },
        "per_template": dict(sorted(Counter(instance.template_id for instance in instances).items())),
    }
