"""
Описания четырёх геофункций для промптов
"""

from functools import lru_cache
from pathlib import Path

import yaml

from toolcache.serializers import PARAM_SERIALIZERS


TOOLS_PATH = Path(__file__).resolve().parent / "tools.yaml"


@lru_cache(maxsize=None)
def load_tool_descriptions(path: Path = TOOLS_PATH) -> tuple[dict, ...]:
    """
    Raises:
        ValueError: набор описаний не совпадает с набором функций кеша
    """

    document = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    tools = tuple(document.get("tools", ()))
    names = [tool["name"] for tool in tools]
    if sorted(names) != sorted(PARAM_SERIALIZERS):
        raise ValueError(f"{path}: tool descriptions {names} do not match {sorted(PARAM_SERIALIZERS)}")
    return tools


def render_tool_descriptions(tools=None) -> str:
    blocks = []
    for tool in tools or load_tool_descriptions():
        lines = [f"{tool['name']}: {tool['description']}"]
        for parameter in tool["parameters"]:
            required = "required" if parameter.get("required", True) else "optional"
            lines.append(f"  - {parameter['name']} ({parameter['type']}, {required})")
        lines.append(f"  output: {tool['output']}")
        blocks.append("\n".join(lines))
    return "\n".join(blocks)
