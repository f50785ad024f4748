"""
Ошибки генерации QA
"""


REJECTION_REASONS = (
    "sampling_exhausted",
    "non_executable_sql",
    "empty_sql_result",
    "unresolvable_tool_call",
    "empty_tool_result",
    "insufficient_tool_result",
    "empty_answer",
    "implausible_walking",
    "implausible_cycling",
    "duplicate",
)


class GenerationError(Exception):
    """Базовая ошибка генератора"""


class TemplateError(GenerationError):
    """Документ шаблона не проходит схему; сообщение называет файл и шаблон"""

    def __init__(self, source: str, detail) -> None:
        self.source = source
        self.detail = detail
        super().__init__(f"{source}: {detail}")


class Rejection(GenerationError):
    """
    Экземпляр отброшен

    Attributes:
        reason(str): Машиночитаемый код из REJECTION_REASONS
        detail(str): Пояснение для журнала
    """

    def __init__(self, reason: str, detail: str = "") -> None:
        if reason not in REJECTION_REASONS:
            raise ValueError(f"unknown rejection reason {reason!r}")
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class SamplingExhausted(Rejection):
    """Сущностей в хранилище меньше, чем требует шаблон"""

    def __init__(self, detail: str = "") -> None:
        super().__init__("sampling_exhausted", detail)
