"""
Ошибки фронтенда SLU
"""


class SluError(Exception):
    """Базовая ошибка SLU"""


class GazetteerError(SluError):
    """Файл словаря не читается или не соответствует формату"""


class UnknownStrategyError(SluError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown SLU strategy {name!r}")
