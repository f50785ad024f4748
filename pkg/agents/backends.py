"""
Чат-бэкенды: HTTP в формате chat completions и сценарный для тестов
"""

import logging
import os
import threading
from collections import deque
from typing import Callable, Optional, Protocol

import requests
from django.conf import settings

from .exceptions import BackendError, ConfigurationError


logger = logging.getLogger(__name__)

STAGE_ROLES = (
    "supervisor.plan",
    "supervisor.replan",
    "supervisor.sufficiency",
    "supervisor.finalize",
    "db.caption",
    "db.sql",
    "map.decide",
    "slu.fewshot",
    "qagen.paraphrase",
    "standard.step",
)


class ChatBackend(Protocol):
    name: str

    def complete(
        self, system_prompt: str, messages: list[dict], *, role: str, context: Optional[dict] = None
    ) -> str:
        """
        Args:
            system_prompt: Системный промпт стадии
            messages: Сообщения в формате [{"role", "content"}]
            role: Стадия, от имени которой идёт вызов
            context: Структурированные данные; текстовые бэкенды их не читают

        Raises:
            BackendError: бэкенд недоступен или ответ не разобран
        """


class HttpChatBackend:
    """
    Клиент OpenAI-совместимого эндпоинта chat completions

    Ключ передаётся только заголовком Authorization и берётся из окружения
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str = "",
        timeout: float = 60.0,
        max_retries: int = 2,
        session: Optional[requests.Session] = None,
    ) -> None:
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.max_retries = max_retries
        self._api_key = api_key
        self._session = session or requests.Session()

    @property
    def headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def payload(self, system_prompt: str, messages: list[dict]) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": "system", "content": system_prompt}, *messages],
            "temperature": 0,
        }

    def complete(self, system_prompt, messages, *, role, context=None) -> str:
        """Повторяет запрос только при сбое соединения, тайм-ауте, 429 и 5xx"""

        payload = self.payload(system_prompt, messages)
        attempts = self.max_retries + 1
        for attempt in range(1, attempts + 1):
            try:
                response = self._session.post(
                    self.endpoint, json=payload, headers=self.headers, timeout=self.timeout
                )
                response.raise_for_status()
                return parse_chat_response(response.json())
            except (requests.RequestException, ValueError) as exc:
                if not is_retryable(exc) or attempt == attempts:
                    raise BackendError(str(exc), role) from exc
                logger.warning("%s: request attempt %d failed: %s", role, attempt, exc)
        raise BackendError("no request attempts allowed", role)


RETRYABLE_STATUSES = frozenset({429})


def is_retryable(exc: Exception) -> bool:
    if isinstance(exc, (requests.ConnectionError, requests.Timeout)):
        return True
    if isinstance(exc, requests.HTTPError):
        status = getattr(exc.response, "status_code", None)
        return status is not None and (status >= 500 or status in RETRYABLE_STATUSES)
    return False


def parse_chat_response(data: dict) -> str:
    """
    Raises:
        ValueError: в ответе нет choices[0].message.content
    """

    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise ValueError(f"unexpected chat response {data!r}") from None
    return content or ""


Handler = Callable[[str, str, list, Optional[dict]], str]


class ScriptedBackend:
    """
    Детерминированный бэкенд: очередь ответов на каждую стадию и/или функция

    Сначала отдаются ответы из очереди стадии, затем вызывается handler;
    если нет ни того, ни другого, поднимается BackendError
    """

    name = "scripted"

    def __init__(self, replies: Optional[dict[str, list[str]]] = None, handler: Optional[Handler] = None) -> None:
        self._queues = {role: deque(items) for role, items in (replies or {}).items()}
        self._handler = handler
        self._lock = threading.Lock()
        self.calls: list[tuple[str, str]] = []

    def complete(self, system_prompt, messages, *, role, context=None) -> str:
        with self._lock:
            self.calls.append((role, messages[-1]["content"] if messages else ""))
            queue = self._queues.get(role)
            if queue:
                return queue.popleft()
        if self._handler is not None:
            return self._handler(role, system_prompt, messages, context)
        raise BackendError("script exhausted", role)


def backend_from_settings() -> HttpChatBackend:
    """
    Raises:
        ConfigurationError: не заданы LLM_ENDPOINT, LLM_MODEL или ключ в окружении
    """

    if not settings.LLM_ENDPOINT or not settings.LLM_MODEL:
        raise ConfigurationError("LLM_ENDPOINT and LLM_MODEL must be set to use a chat backend")
    api_key = os.environ.get(settings.LLM_API_KEY_ENV, "")
    if not api_key:
        raise ConfigurationError(f"environment variable {settings.LLM_API_KEY_ENV} holds no API key")
    return HttpChatBackend(
        settings.LLM_ENDPOINT,
        settings.LLM_MODEL,
        api_key=api_key,
        timeout=settings.LLM_TIMEOUT,
    )
