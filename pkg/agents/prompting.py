"""
Версионированные промпты и общий вид пользовательского сообщения
"""

import json
from functools import lru_cache
from pathlib import Path


PROMPT_DIR = Path(__file__).resolve().parent / "prompts"


@lru_cache(maxsize=None)
def load_prompt(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def fill_prompt(text: str, **values: str) -> str:
    """Подставляет {name}; остальные фигурные скобки промпта не трогает"""
    for name, value in values.items():
        text = text.replace("{" + name + "}", value)
    return text


def render_request(question: str, intents, slots) -> str:
    lines = [f"Question: {question}"]
    if intents:
        lines.append("Intents: " + ", ".join(intents))
    if slots:
        lines.append("Slots: " + ", ".join(f"{slot.slot_type}={slot.value}" for slot in slots))
    return "\n".join(lines)


def render_evidence(evidence) -> str:
    return "\n".join(json.dumps(item.to_dict(), ensure_ascii=False, sort_keys=True) for item in evidence)
