"""
Ошибки агента карт
"""

from agents.exceptions import AgentError


MISSING_COORDINATES_REPORT = (
    "geographical coordinates required for the task are missing, insufficient, or erroneous"
)


class MissingCoordinatesError(AgentError):
    """
    Для параметра нет координат в контексте задания

    Attributes:
        name(str): Сущность, координаты которой не найдены
    """

    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"{MISSING_COORDINATES_REPORT}: no coordinates for {name!r}")


class DecisionParseError(AgentError):
    """
    Ответ не содержит ни строки CALL, ни отказа NO_TOOL, либо строка не разбирается

    Attributes:
        raw(str): Исходный текст ответа
    """

    def __init__(self, raw: str, detail: str = "no CALL line in backend output") -> None:
        self.raw = raw
        super().__init__(detail)
