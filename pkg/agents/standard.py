"""
Одиночный агент без специалистов: сам пишет SQL, вызывает геофункции и отвечает
"""

import logging
from typing import Optional

from django.conf import settings

from dbagent.agent import SqlCandidate, execute_and_package, extract_sql
from dbagent.exceptions import SqlExtractionError
from domain.instances import QAInstance
from geostore.store import GeoStore
from mapagent.agent import AttemptFailure, call_tool
from mapagent.decisions import parse_decision
from mapagent.exceptions import DecisionParseError, MissingCoordinatesError
from mapagent.tools import render_tool_descriptions
from toolcache.service import ToolCache
from .episode import Episode
from .envelopes import ANSWER_PATTERN, parse_answer
from .exceptions import BackendError
from .prompting import PROMPT_DIR, fill_prompt, load_prompt, render_evidence, render_request
from .protocol import EpisodeTranscript, coordinates_from_evidence


logger = logging.getLogger(__name__)

NOTHING_TO_DO = "No ```sql block, CALL line or ANSWER found. Continue with one of them."


def render_tables(store: GeoStore) -> str:
    return "\n".join(f"{entry.caption}: {entry.schema}" for entry in store.list_captions())


class StandardAgent:
    """
    Каждый ответ бэкенда - один шаг; шаги ограничены тем же step_cap,
    что и у супервизора
    """

    method = "standard"

    def __init__(self, backend, store: GeoStore, cache: ToolCache, *, step_cap: Optional[int] = None) -> None:
        self.backend = backend
        self.store = store
        self.cache = cache
        self.step_cap = settings.AGENT_STEP_CAP if step_cap is None else step_cap
        if self.step_cap < 1:
            raise ValueError("step_cap must be at least 1")

    def _observe(self, reply: str, step: int, evidence: list, episode: Episode) -> str:
        """Выполняет SQL и вызовы из ответа и возвращает текст наблюдения"""

        observations = []
        try:
            statement = extract_sql(reply)
        except SqlExtractionError:
            statement = None
        if statement is not None:
            result = execute_and_package(SqlCandidate(statement), self.store, episode)
            evidence.extend(result.evidence)
            observations.append(render_evidence(result.evidence) if result.evidence else result.error_report)

        if any(line.strip().startswith("CALL ") for line in reply.splitlines()):
            try:
                plan = parse_decision(reply)
            except DecisionParseError as exc:
                observations.append(str(exc))
            else:
                context = coordinates_from_evidence(evidence)
                for decision in plan.decisions:
                    try:
                        item = call_tool(decision, self.cache, context, step, episode)
                    except (MissingCoordinatesError, AttemptFailure) as exc:
                        observations.append(str(exc))
                        continue
                    evidence.append(item)
                    observations.append(render_evidence([item]))
        return "\n".join(observations) or NOTHING_TO_DO

    def run_episode(
        self,
        question: str,
        intents=(),
        slots=(),
        *,
        instance_id: str = "",
        gold: Optional[QAInstance] = None,
        injections=frozenset(),
    ) -> EpisodeTranscript:
        """
        Подмены sql и api к одиночному агенту не применяются; учитывается
        только разметка SLU, переданная в intents и slots
        """

        intents, slots = tuple(intents), tuple(slots)
        transcript = EpisodeTranscript(
            instance_id=instance_id,
            method=self.method,
            intents=list(intents),
            slots=[slot.to_dict() for slot in slots],
        )
        episode = Episode(transcript, self.backend, gold, injections)
        prompt = fill_prompt(
            load_prompt(PROMPT_DIR / "standard_v1.txt"),
            tables=render_tables(self.store),
            tools=render_tool_descriptions(),
        )
        messages = [{"role": "user", "content": render_request(question, intents, slots)}]
        evidence: list = []
        for step in range(1, self.step_cap + 1):
            transcript.step_count = step
            try:
                reply = episode.complete(prompt, messages, role="standard.step", context={"evidence": list(evidence)})
            except BackendError:
                transcript.failure = "backend_error"
                return transcript
            if ANSWER_PATTERN.search(reply):
                transcript.final_text = reply
                transcript.answer, parsed = parse_answer(reply)
                if not parsed:
                    transcript.event("answer_parse_failure")
                if transcript.answer is None:
                    transcript.failure = "unanswerable_verdict"
                return transcript
            observation = self._observe(reply, step, evidence, episode)
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": f"Observation:\n{observation}"},
            ]
        transcript.failure = "step_cap"
        transcript.event("step_cap", step_count=transcript.step_count)
        logger.warning("%s: step cap %d reached", instance_id, self.step_cap)
        return transcript
