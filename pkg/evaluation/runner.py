"""
Прогон набора эпизодов и лестница подмен эталоном
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from django.db import connections

from agents.exceptions import BackendError
from agents.protocol import EpisodeTranscript
from agents.standard import StandardAgent
from agents.supervisor import Supervisor
from dbagent.agent import DbAgent
from domain.instances import QAInstance
from geostore.store import GeoStore
from mapagent.agent import MapAgent
from slu.gazetteer import build_gazetteer
from slu.prediction import GoldStrategy
from slu.strategies import build_strategy
from toolcache.service import ToolCache
from .config import RunConfig, build_backend
from .report import EvalReport, build_report


logger = logging.getLogger(__name__)

LADDER = (
    ("none", frozenset()),
    ("slu", frozenset({"slu"})),
    ("slu+sql", frozenset({"slu", "sql"})),
    ("slu+sql+api", frozenset({"slu", "sql", "api"})),
)


@dataclass
class SuiteResult:
    config: RunConfig
    transcripts: list[EpisodeTranscript]
    report: EvalReport

    @property
    def all_backend_errors(self) -> bool:
        return bool(self.transcripts) and all(
            transcript.failure == "backend_error" for transcript in self.transcripts
        )


class SuiteRunner:
    """
    Собирает SLU и агента по конфигурации и прогоняет эпизоды

    Attributes:
        config(RunConfig): Конфигурация прогона
        backend: Чат-бэкенд, общий для SLU и агентов
        strategy: Стратегия SLU
        agent: Supervisor или StandardAgent
    """

    def __init__(
        self,
        config: RunConfig,
        *,
        store: GeoStore,
        templates: dict,
        cache: Optional[ToolCache] = None,
        backend=None,
        gazetteer=None,
        examples=(),
    ) -> None:
        self.config = config
        self.backend = backend if backend is not None else build_backend(config.backend, templates)
        cache = cache if cache is not None else ToolCache()
        if "slu" in config.injections:
            self.strategy = GoldStrategy()
        else:
            if config.slu == "lexicon" and gazetteer is None:
                gazetteer = build_gazetteer()
            self.strategy = build_strategy(
                config.slu, backend=self.backend, gazetteer=gazetteer, templates=templates, examples=examples
            )
        if config.method == "standard":
            self.agent = StandardAgent(self.backend, store, cache, step_cap=config.step_cap)
        else:
            self.agent = Supervisor(
                self.backend,
                [DbAgent(store), MapAgent(cache, templates=templates)],
                step_cap=config.step_cap,
                judge_sufficiency=config.judge_sufficiency,
            )

    def run_one(self, instance: QAInstance) -> EpisodeTranscript:
        try:
            prediction = self.strategy.predict(instance.question, instance)
        except BackendError as exc:
            logger.warning("%s: SLU backend failed: %s", instance.id, exc)
            transcript = EpisodeTranscript(instance_id=instance.id, method=self.agent.method)
            transcript.backend_calls.append({"role": "slu.fewshot", "ok": False, "reply": "", "error": str(exc)})
            transcript.failure = "backend_error"
            return transcript
        return self.agent.run_episode(
            instance.question,
            prediction.intents,
            prediction.slots,
            instance_id=instance.id,
            gold=instance,
            injections=self.config.injections,
        )

    def _run_in_thread(self, instance: QAInstance) -> EpisodeTranscript:
        try:
            return self.run_one(instance)
        finally:
            connections.close_all()

    def run(self, instances) -> SuiteResult:
        instances = list(instances)
        logger.info(
            "running %d episodes (%s, backend=%s, slu=%s, injections=%s)",
            len(instances),
            self.config.method,
            self.config.backend,
            self.config.slu_label,
            sorted(self.config.injections),
        )
        if self.config.parallelism == 1:
            transcripts = [self.run_one(instance) for instance in instances]
        else:
            with ThreadPoolExecutor(max_workers=self.config.parallelism) as pool:
                transcripts = list(pool.map(self._run_in_thread, instances))
        return SuiteResult(self.config, transcripts, build_report(self.config, transcripts, instances))


def run_suite(config: RunConfig, instances, **components) -> SuiteResult:
    return SuiteRunner(config, **components).run(instances)


def run_ladder(config: RunConfig, instances, **components) -> dict[str, SuiteResult]:
    """Четыре ступени подмен: none, slu, slu+sql, slu+sql+api; бэкенд общий"""

    instances = list(instances)
    if components.get("backend") is None:
        components["backend"] = build_backend(config.backend, components["templates"])
    if config.slu == "lexicon" and components.get("gazetteer") is None:
        components["gazetteer"] = build_gazetteer()
    return {
        rung: run_suite(config.with_injections(stages), instances, **components)
        for rung, stages in LADDER
    }
