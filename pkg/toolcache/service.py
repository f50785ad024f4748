"""
Кеш геофункций с записью и воспроизведением
"""

import copy
import json
import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from django.conf import settings
from django.db import IntegrityError, transaction

from domain.answers import Distance, Duration
from domain.geo import GeoPoint
from .calls import RESULT_COLUMNS, ToolRequest, make_request
from .exceptions import CacheMissError, ProviderError
from .models import CacheEntry


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurroundingPoi:
    name: str
    label: str
    location: GeoPoint
    straight_distance: int


def check_payload(function: str, payload) -> None:
    """
    Raises:
        ProviderError: результат не соответствует схеме функции
    """

    if not isinstance(payload, dict) or payload.get("columns") != RESULT_COLUMNS[function]:
        raise ProviderError(f"{function}: unexpected result columns in {payload!r}")
    rows = payload.get("rows")
    width = len(RESULT_COLUMNS[function])
    if not isinstance(rows, list) or any(len(row) != width for row in rows):
        raise ProviderError(f"{function}: malformed result rows")


class ToolCache:
    """
    Воспроизводит результаты из базы; при промахе обращается к провайдеру,
    если он подключён, и сохраняет ответ

    Чтение безопасно из нескольких потоков, запись идёт под одной блокировкой.
    В памяти держится не больше memo_size последних записей

    Attributes:
        memo_size(int): Размер LRU-памяти; по умолчанию TOOL_CACHE_MEMO_SIZE
    """

    def __init__(self, provider=None, memo_size: Optional[int] = None) -> None:
        self.provider = provider
        self.memo_size = settings.TOOL_CACHE_MEMO_SIZE if memo_size is None else memo_size
        self._memo: OrderedDict[str, dict] = OrderedDict()
        self._memo_lock = threading.Lock()
        self._write_lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _recall(self, key: str) -> Optional[dict]:
        with self._memo_lock:
            payload = self._memo.get(key)
            if payload is not None:
                self._memo.move_to_end(key)
            return payload

    def _remember(self, key: str, payload: dict) -> None:
        with self._memo_lock:
            self._memo[key] = payload
            self._memo.move_to_end(key)
            while len(self._memo) > self.memo_size:
                self._memo.popitem(last=False)

    @property
    def memo_len(self) -> int:
        return len(self._memo)

    def lookup(self, request: ToolRequest) -> dict:
        """
        Raises:
            CacheMissError: записи нет, провайдера нет
            ProviderError: провайдер упал или вернул неверный результат
        """

        key = request.key
        payload = self._recall(key)
        if payload is None:
            entry = CacheEntry.objects.filter(key=key).first()
            if entry is not None:
                payload = entry.payload
                self._remember(key, payload)
        if payload is not None:
            self.hits += 1
            return copy.deepcopy(payload)

        self.misses += 1
        if self.provider is None:
            raise CacheMissError(key)
        with self._write_lock:
            payload = self._record(request)
        return copy.deepcopy(payload)

    def _record(self, request: ToolRequest) -> dict:
        key = request.key
        try:
            payload = self.provider.resolve(request)
        except Exception as exc:
            raise ProviderError(f"{self.provider.name} failed on {key}: {exc}") from exc
        check_payload(request.function, payload)
        # JSON-круг делает payload из кеша и из провайдера одинаковыми
        payload = json.loads(json.dumps(payload))
        try:
            with transaction.atomic():
                CacheEntry.objects.get_or_create(
                    key=key,
                    defaults={
                        "function": request.function,
                        "time_bucket": request.time_bucket,
                        "params": request.params,
                        "payload": payload,
                        "provider_name": self.provider.name,
                        "recorded_at": self.provider.recorded_at(request),
                    },
                )
        except IntegrityError:
            payload = CacheEntry.objects.get(key=key).payload
        self._remember(key, payload)
        logger.debug("recorded %s", key)
        return payload

    def call(self, function: str, params: dict) -> tuple[ToolRequest, dict]:
        request = make_request(function, params)
        return request, self.lookup(request)

    def time_query(
        self, origin: GeoPoint, destination: GeoPoint, mode: str, bucket: Optional[str] = None
    ) -> Duration:
        params = {"origin": origin.as_list(), "destination": destination.as_list(), "mode": mode}
        if bucket:
            params["time_bucket"] = bucket
        _, payload = self.call("time_query", params)
        return Duration(payload["rows"][0][0])

    def distance_query(
        self, origin: GeoPoint, destination: GeoPoint, kind: str, bucket: Optional[str] = None
    ) -> Distance:
        params = {"origin": origin.as_list(), "destination": destination.as_list(), "kind": kind}
        if bucket:
            params["time_bucket"] = bucket
        _, payload = self.call("distance_query", params)
        return Distance(payload["rows"][0][0])

    def surrounding_pois_query(
        self, center: GeoPoint, radius: float, label: str, bucket: Optional[str] = None
    ) -> list[SurroundingPoi]:
        params = {"center": center.as_list(), "radius": radius, "label": label}
        if bucket:
            params["time_bucket"] = bucket
        _, payload = self.call("surrounding_pois_query", params)
        return [
            SurroundingPoi(name, row_label, GeoPoint(latitude, longitude), distance)
            for name, row_label, latitude, longitude, distance in payload["rows"]
        ]

    def rush_hour_query(self, origin: GeoPoint, destination: GeoPoint, mode: str) -> Duration:
        params = {"origin": origin.as_list(), "destination": destination.as_list(), "mode": mode}
        _, payload = self.call("rush_hour_query", params)
        return Duration(payload["rows"][0][0])


def dump_cache(path: Path) -> int:
    """Пишет кеш в JSONL, отсортированный по ключу"""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="\n") as stream:
        for entry in CacheEntry.objects.order_by("key"):
            record = {
                "key": entry.key,
                "function": entry.function,
                "time_bucket": entry.time_bucket,
                "params": entry.params,
                "payload": entry.payload,
                "provider_name": entry.provider_name,
                "recorded_at": entry.recorded_at,
            }
            stream.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            count += 1
    logger.info("dumped %d cache entries to %s", count, path)
    return count


@transaction.atomic
def load_cache(path: Path) -> int:
    """
    Восстанавливает кеш из JSONL; записи с тем же ключом заменяются

    Raises:
        ProviderError: запись не соответствует схеме функции
    """

    count = 0
    with Path(path).open(encoding="utf-8") as stream:
        for line in stream:
            if not line.strip():
                continue
            record = json.loads(line)
            check_payload(record["function"], record["payload"])
            CacheEntry.objects.update_or_create(
                key=record["key"],
                defaults={name: record[name] for name in record if name != "key"},
            )
            count += 1
    logger.info("loaded %d cache entries from %s", count, path)
    return count
