"""
Ошибки геоинструментов
"""


class ToolError(Exception):
    """Базовая ошибка вызова инструмента"""

    code = "tool_error"


class InvalidParamsError(ToolError):
    """Параметры не проходят схему функции"""

    code = "invalid_params"

    def __init__(self, function: str, errors) -> None:
        self.function = function
        self.errors = errors
        super().__init__(f"invalid params for {function}: {errors}")


class CacheMissError(ToolError):
    """Запроса нет в кеше, а провайдер не подключён"""

    code = "cache_miss_no_provider"

    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"no cached result and no provider for {key}")


class ProviderError(ToolError):
    code = "provider_error"
