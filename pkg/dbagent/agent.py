"""
Агент базы данных: гипотетическая подпись, поиск таблицы, генерация и выполнение SQL
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml
from django.conf import settings

from agents.episode import Episode
from agents.exceptions import BackendError
from agents.prompting import fill_prompt, load_prompt, render_request
from agents.protocol import AgentResult, AgentTask, Evidence
from geostore.coordinates import extract_coordinates
from geostore.exceptions import SqlExecutionError
from geostore.store import GeoStore
from .bm25 import Bm25Index
from .exceptions import RetrievalError, SqlExtractionError


logger = logging.getLogger(__name__)

APP_DIR = Path(__file__).resolve().parent
CAPTION_PROMPT = APP_DIR / "prompts" / "caption_v1.txt"
SQL_PROMPT = APP_DIR / "prompts" / "sql_v1.txt"
EXAMPLES_PATH = APP_DIR / "fewshot" / "examples_v1.yaml"
FENCE_PATTERN = re.compile(r"```(?:sql|sqlite)?[ \t]*\n?(.*?)```", re.DOTALL | re.IGNORECASE)
SQL_SOURCES = ("generated", "gt_injected")


@dataclass(frozen=True)
class SqlCandidate:
    statement: str
    source: str = "generated"

    def __post_init__(self) -> None:
        if not self.statement.strip():
            raise ValueError("SQL candidate must not be empty")
        if self.source not in SQL_SOURCES:
            raise ValueError(f"unknown SQL source {self.source!r}")


@lru_cache(maxsize=None)
def load_examples(path: Path = EXAMPLES_PATH) -> tuple[dict, ...]:
    document = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    return tuple(document.get("examples", ()))


def render_examples(examples, *, with_sql: bool) -> str:
    blocks = []
    for example in examples:
        slots = ", ".join(f"{name}={value}" for name, value in example["slots"].items())
        lines = [
            f"Question: {example['question']}",
            f"Intents: {', '.join(example['intents'])}",
            f"Slots: {slots}",
            f"Caption: {example['caption']}",
        ]
        if with_sql:
            lines.append(f"```sql\n{example['sql']}\n```")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def extract_sql(text: str) -> str:
    """
    Запрос из первого блока ```sql```; точка с запятой в конце отбрасывается

    Raises:
        SqlExtractionError: блока нет или он пуст
    """

    for match in FENCE_PATTERN.finditer(text or ""):
        statement = match.group(1).strip().rstrip(";").strip()
        if statement:
            return statement
    raise SqlExtractionError(text or "")


def caption_summary(task: AgentTask, episode: Episode) -> str:
    """
    Raises:
        BackendError: бэкенд недоступен
    """

    prompt = fill_prompt(load_prompt(CAPTION_PROMPT), examples=render_examples(load_examples(), with_sql=False))
    reply = episode.complete(
        prompt,
        [{"role": "user", "content": render_request(task.question, task.intents, task.slots)}],
        role="db.caption",
    )
    return " ".join(reply.split())


def generate_sql(task: AgentTask, caption: str, schema: str, episode: Episode) -> SqlCandidate:
    """
    Запрашивает запрос; при ошибке извлечения переспрашивает один раз

    Raises:
        SqlExtractionError: и повторный ответ без запроса
        BackendError: бэкенд недоступен
    """

    prompt = fill_prompt(load_prompt(SQL_PROMPT), examples=render_examples(load_examples(), with_sql=True))
    content = render_request(task.question, task.intents, task.slots) + f"\nCaption: {caption}\nSchema: {schema}"
    messages = [{"role": "user", "content": content}]
    reply = ""
    for _ in range(2):
        reply = episode.complete(prompt, messages, role="db.sql")
        try:
            return SqlCandidate(extract_sql(reply))
        except SqlExtractionError:
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": "Reply with exactly one statement inside a ```sql fenced block."},
            ]
    raise SqlExtractionError(reply)


def execute_and_package(candidate: SqlCandidate, store: GeoStore, episode: Optional[Episode] = None) -> AgentResult:
    """
    Выполняет запрос; успех даёт строки и карту координат, ошибка движка
    возвращается отчётом
    """

    try:
        result = store.execute_sql(candidate.statement)
    except SqlExecutionError as exc:
        if episode is not None:
            episode.record_sql(candidate.statement, candidate.source, error=exc.message)
        return AgentResult.error(exc.report())
    if episode is not None:
        episode.record_sql(candidate.statement, candidate.source, columns=result.columns, rows=result.rows)
    if not result.rows:
        return AgentResult.unable(f"the query returned no rows: {candidate.statement}")
    evidence = [
        Evidence(
            "rows",
            "db_agent",
            {"statement": candidate.statement, "columns": list(result.columns), "rows": [list(row) for row in result.rows]},
        )
    ]
    coordinates = extract_coordinates(result.columns, result.rows)
    if coordinates:
        evidence.append(
            Evidence("coordinates", "db_agent", {name: point.as_list() for name, point in coordinates.items()})
        )
    return AgentResult.success(evidence)


class DbAgent:
    """
    Attributes:
        store(GeoStore): Хранилище
        index(Bm25Index): Индекс подписей хранилища
        top_k(int): Сколько подписей передаётся в генерацию SQL
    """

    name = "db_agent"

    def __init__(self, store: GeoStore, index: Optional[Bm25Index] = None, top_k: Optional[int] = None) -> None:
        self.store = store
        self.captions = {entry.caption: entry for entry in store.list_captions()}
        self.index = index or Bm25Index.from_settings(sorted(self.captions))
        self.top_k = settings.CAPTION_TOP_K if top_k is None else top_k

    def _candidate(self, task: AgentTask, episode: Episode) -> SqlCandidate:
        if episode.injected("sql"):
            return SqlCandidate(episode.gold.sql_trace[0].statement, "gt_injected")
        summary = caption_summary(task, episode)
        retrieved = self.index.retrieve(summary, self.top_k)
        captions = [caption for caption, _ in retrieved]
        schemas = [self.captions[caption].schema for caption in captions if caption in self.captions]
        return generate_sql(task, "; ".join(captions), "; ".join(schemas), episode)

    def handle(self, task: AgentTask, episode: Episode) -> AgentResult:
        try:
            candidate = self._candidate(task, episode)
        except BackendError as exc:
            return AgentResult.error(f"backend failure: {exc}")
        except (RetrievalError, SqlExtractionError) as exc:
            return AgentResult.error(str(exc))
        return execute_and_package(candidate, self.store, episode)
