"""
Строчные форматы ответов бэкенда: директивы плана, проверка достаточности
и конверт ответа

Рассуждения перед конвертом допускаются и пропускаются разбором:

    DISPATCH <db_agent|map_agent>: <подзадача>
    SUFFICIENT | CONTINUE
    ANSWER: <JSON канонического ответа> | ANSWER: UNANSWERABLE
"""

import json
import re
from typing import Optional

from domain.answers import CanonicalAnswer, Text, answer_from_dict
from .exceptions import PlanParseError
from .protocol import Directive


DIRECTIVE_PATTERN = re.compile(r"^\s*DISPATCH\s+([A-Za-z_]+)\s*:\s*(.*?)\s*$", re.MULTILINE)
SUFFICIENCY_PATTERN = re.compile(r"\b(SUFFICIENT|CONTINUE)\b")
ANSWER_PATTERN = re.compile(r"^\s*ANSWER:\s*(.*?)\s*$", re.MULTILINE)
UNANSWERABLE_TOKEN = "UNANSWERABLE"


def parse_directives(text: str) -> list[Directive]:
    """
    Raises:
        PlanParseError: директив нет или указан неизвестный специалист
    """

    directives = []
    for match in DIRECTIVE_PATTERN.finditer(text or ""):
        try:
            directives.append(Directive(match.group(1), match.group(2)))
        except ValueError:
            raise PlanParseError(text) from None
    if not directives:
        raise PlanParseError(text or "")
    return directives


def render_directives(directives) -> str:
    return "\n".join(directive.render() for directive in directives)


def parse_sufficiency(text: str) -> Optional[bool]:
    """True для SUFFICIENT, False для CONTINUE, None если вердикта нет"""

    verdicts = SUFFICIENCY_PATTERN.findall(text or "")
    if not verdicts:
        return None
    return verdicts[-1] == "SUFFICIENT"


def render_answer_envelope(answer: Optional[CanonicalAnswer]) -> str:
    if answer is None:
        return f"ANSWER: {UNANSWERABLE_TOKEN}"
    return "ANSWER: " + json.dumps(answer.to_dict(), ensure_ascii=False, sort_keys=True)


def parse_answer(text: str) -> tuple[Optional[CanonicalAnswer], bool]:
    """
    Разбирает последний конверт ANSWER

    Returns:
        Пара (ответ, разобран ли конверт); без конверта ответом становится
        Text с исходным текстом, UNANSWERABLE даёт None
    """

    envelopes = ANSWER_PATTERN.findall(text or "")
    raw = (text or "").strip()
    if not envelopes:
        return (Text(raw), False) if raw else (None, False)
    body = envelopes[-1]
    if body.upper() == UNANSWERABLE_TOKEN:
        return None, True
    try:
        return answer_from_dict(json.loads(body)), True
    except (ValueError, TypeError):
        return Text(raw), False
