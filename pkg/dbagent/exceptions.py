"""
Ошибки агента базы данных
"""

from agents.exceptions import AgentError


class RetrievalError(AgentError):
    """Индекс подписей пуст"""


class SqlExtractionError(AgentError):
    """
    В ответе бэкенда нет блока ```sql``` с запросом

    Attributes:
        raw(str): Исходный текст ответа
    """

    def __init__(self, raw: str) -> None:
        self.raw = raw
        super().__init__("no fenced SQL statement in backend output")
