"""
Выполнение SQL только на чтение и каталог подписей
"""

import logging
from dataclasses import dataclass
from typing import Optional

import sqlglot
from sqlglot import exp
from sqlglot.errors import SqlglotError
from django.db import DatabaseError, connections

from .exceptions import SqlExecutionError, WriteProtectionError
from .models import TableCaption
from .tables import FAMILY_COLUMNS, schema_text


logger = logging.getLogger(__name__)

SQL_DIALECT = "sqlite"
WRITE_NODES = (exp.Insert, exp.Update, exp.Delete, exp.Drop, exp.Create)


@dataclass(frozen=True)
class SqlResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_payload(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(row) for row in self.rows]}


@dataclass(frozen=True)
class CaptionEntry:
    """
    Attributes:
        table_id(str): Имя представления
        caption(str): Подпись
        city(str): Город
        family(str): Семейство таблицы
        columns(tuple): Колонки семейства
    """

    table_id: str
    caption: str
    city: str
    family: str
    columns: tuple[str, ...]

    @property
    def schema(self) -> str:
        return schema_text(self.family, self.city)


def check_read_only(statement: str) -> None:
    """
    Пропускает ровно один запрос, корень которого - выборка

    Raises:
        SqlExecutionError: запрос не разбирается
        WriteProtectionError: запросов несколько или запрос изменяет данные
    """

    try:
        parsed = [tree for tree in sqlglot.parse(statement, read=SQL_DIALECT) if tree is not None]
    except SqlglotError as exc:
        raise SqlExecutionError(statement, f"syntax error: {exc}") from exc
    if len(parsed) != 1:
        raise WriteProtectionError(statement, f"expected exactly one statement, got {len(parsed)}")
    tree = parsed[0]
    if not isinstance(tree, exp.Query) or tree.find(*WRITE_NODES) is not None:
        raise WriteProtectionError(statement, "only SELECT statements are allowed")


class GeoStore:
    """
    Дескриптор загруженного хранилища

    После загрузки хранилище только читается, запросы не меняют данных
    """

    def __init__(self, config=None, using: str = "default") -> None:
        self.config = config
        self.using = using

    def execute_sql(self, statement: str) -> SqlResult:
        """
        Выполняет запрос на чтение с сохранением порядка колонок

        Raises:
            SqlExecutionError: ошибка разбора или движка, сообщение движка сохраняется
            WriteProtectionError: запрос пытается изменить данные
        """

        check_read_only(statement)
        connection = connections[self.using]
        try:
            with connection.cursor() as cursor:
                cursor.execute("PRAGMA query_only = ON")
                try:
                    cursor.execute(statement)
                    columns = tuple(column[0] for column in cursor.description or ())
                    rows = tuple(tuple(row) for row in cursor.fetchall())
                finally:
                    cursor.execute("PRAGMA query_only = OFF")
        except DatabaseError as exc:
            logger.debug("statement failed: %s (%s)", statement, exc)
            raise SqlExecutionError(statement, str(exc)) from exc
        return SqlResult(columns, rows)

    def list_captions(self) -> list[CaptionEntry]:
        return [
            CaptionEntry(
                table_id=caption.table_id,
                caption=caption.caption,
                city=caption.city,
                family=caption.family,
                columns=tuple(caption.columns),
            )
            for caption in TableCaption.objects.using(self.using).order_by("position")
        ]

    def caption_for(self, table_id: str) -> Optional[CaptionEntry]:
        for entry in self.list_captions():
            if entry.table_id == table_id:
                return entry
        return None

    def caption_by_text(self, caption: str) -> Optional[CaptionEntry]:
        for entry in self.list_captions():
            if entry.caption == caption:
                return entry
        return None

    @staticmethod
    def family_columns(family: str) -> list[str]:
        return [name for name, _ in FAMILY_COLUMNS[family]]
