"""
Ошибки агентов и чат-бэкендов
"""


class AgentError(Exception):
    """Базовая ошибка агентов"""


class BackendError(AgentError):
    """Чат-бэкенд недоступен или ответил ошибкой"""

    def __init__(self, message: str, role: str = "") -> None:
        self.role = role
        super().__init__(f"{role}: {message}" if role else message)


class PlanParseError(AgentError):
    """
    В ответе нет ни одной директивы DISPATCH

    Attributes:
        raw(str): Исходный текст ответа
    """

    def __init__(self, raw: str) -> None:
        self.raw = raw
        super().__init__("no DISPATCH directive in backend output")


class ConfigurationError(AgentError):
    """Бэкенд не настроен: нет адреса, модели или ключа в окружении"""
