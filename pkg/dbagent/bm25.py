"""
BM25 по подписям таблиц
"""

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from django.conf import settings

from .exceptions import RetrievalError


TOKEN_PATTERN = re.compile(r"[0-9a-z]+|[\u4e00-\u9fff]+")
CJK_PATTERN = re.compile(r"[\u4e00-\u9fff]+")


def tokenize(text: str) -> list[str]:
    """
    Нижний регистр и разбиение по не буквенно-цифровым границам;
    отрезки иероглифов режутся на биграммы символов
    """

    tokens = []
    for token in TOKEN_PATTERN.findall(text.lower()):
        if CJK_PATTERN.fullmatch(token) and len(token) > 1:
            tokens.extend(token[index:index + 2] for index in range(len(token) - 1))
        else:
            tokens.append(token)
    return tokens


@dataclass
class Bm25Index:
    """
    Attributes:
        documents(list): Исходные тексты подписей
        k1(float): Насыщение частоты термина
        b(float): Нормализация по длине документа
    """

    documents: list[str]
    k1: float = 1.2
    b: float = 0.75
    tokens: list[list[str]] = field(init=False)
    frequencies: list[Counter] = field(init=False)
    document_frequency: Counter = field(init=False)
    average_length: float = field(init=False)

    def __post_init__(self) -> None:
        self.documents = list(self.documents)
        self.tokens = [tokenize(document) for document in self.documents]
        self.frequencies = [Counter(tokens) for tokens in self.tokens]
        self.document_frequency = Counter()
        for tokens in self.tokens:
            self.document_frequency.update(set(tokens))
        total = sum(len(tokens) for tokens in self.tokens)
        self.average_length = total / len(self.tokens) if self.tokens else 0.0

    @classmethod
    def from_settings(cls, documents) -> "Bm25Index":
        return cls(list(documents), k1=settings.BM25_K1, b=settings.BM25_B)

    def idf(self, term: str) -> float:
        count = len(self.documents)
        frequency = self.document_frequency.get(term, 0)
        return math.log((count - frequency + 0.5) / (frequency + 0.5) + 1)

    def score(self, query: str, index: int) -> float:
        frequencies = self.frequencies[index]
        length = len(self.tokens[index])
        norm = self.k1 * (1 - self.b + self.b * length / self.average_length) if self.average_length else self.k1
        score = 0.0
        for term in tokenize(query):
            tf = frequencies.get(term, 0)
            if tf:
                score += self.idf(term) * tf * (self.k1 + 1) / (tf + norm)
        return score

    def retrieve(self, query: str, k: int = 1) -> list[tuple[str, float]]:
        """
        Лучшие k подписей; равные оценки упорядочены по тексту подписи

        Raises:
            RetrievalError: индекс пуст
        """

        if not self.documents:
            raise RetrievalError("caption index is empty")
        scored = [(document, self.score(query, index)) for index, document in enumerate(self.documents)]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:max(1, k)]
