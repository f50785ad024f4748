"""
Ошибки оценки
"""


class EvaluationError(Exception):
    """Базовая ошибка оценки"""


class AlignmentError(EvaluationError, ValueError):
    """Журналы эпизодов не соответствуют эталонным экземплярам"""


class RunDirectoryError(EvaluationError):
    """
    Каталог прогона уже занят или не содержит нужных файлов

    Attributes:
        path(str): Каталог прогона
    """

    def __init__(self, path, detail: str) -> None:
        self.path = str(path)
        super().__init__(f"{path}: {detail}")
