"""
Выбор стратегии SLU по имени
"""

from .exceptions import UnknownStrategyError
from .fewshot import FewShotStrategy
from .lexicon import LexiconStrategy, signatures_from_catalog
from .prediction import GoldStrategy, NoneStrategy


STRATEGY_NAMES = ("none", "gold", "lexicon", "fewshot")


def build_strategy(name: str, *, backend=None, gazetteer=None, templates=None, examples=()):
    """
    Args:
        name(str): Одно из STRATEGY_NAMES
        backend: Чат-бэкенд для fewshot
        gazetteer(Gazetteer): Словарь для lexicon
        templates(dict): Каталог шаблонов для сигнатур lexicon
        examples: Примеры для fewshot

    Raises:
        UnknownStrategyError: неизвестное имя
        ValueError: не хватает зависимостей стратегии
    """

    if name == "none":
        return NoneStrategy()
    if name == "gold":
        return GoldStrategy()
    if name == "lexicon":
        if gazetteer is None or templates is None:
            raise ValueError("lexicon SLU needs a gazetteer and the template catalog")
        return LexiconStrategy(gazetteer, signatures_from_catalog(templates.values()))
    if name == "fewshot":
        if backend is None:
            raise ValueError("fewshot SLU needs a chat backend")
        return FewShotStrategy(backend, examples)
    raise UnknownStrategyError(name)
