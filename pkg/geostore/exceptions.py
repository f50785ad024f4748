"""
Ошибки хранилища
"""


class GeoStoreError(Exception):
    """Базовая ошибка хранилища"""


class IngestionError(GeoStoreError):
    """Запись фикстуры не прошла проверку; сообщение называет файл и строку"""

    def __init__(self, source: str, line: int, detail) -> None:
        self.source = source
        self.line = line
        self.detail = detail
        super().__init__(f"{source}:{line}: {detail}")


class SqlExecutionError(GeoStoreError):
    """
    Attributes:
        statement(str): Выполнявшийся запрос
        message(str): Сообщение движка
    """

    def __init__(self, statement: str, message: str) -> None:
        self.statement = statement
        self.message = message
        super().__init__(message)

    def report(self) -> str:
        return f"SQL execution failed: {self.message}"


class WriteProtectionError(SqlExecutionError):
    """Запрос не является единственным SELECT"""
