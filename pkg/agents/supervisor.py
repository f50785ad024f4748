"""
Супервизор: план, вызов специалистов, перепланирование и финальный ответ
"""

import logging
from dataclasses import dataclass, field
from numbers import Number as NumericType
from typing import Optional, Protocol

from django.conf import settings

from domain.answers import CanonicalAnswer, EntitySet, Number, answer_from_dict
from domain.instances import QAInstance
from .episode import Episode
from .envelopes import parse_answer, parse_directives, parse_sufficiency, render_directives
from .exceptions import AgentError, BackendError, PlanParseError
from .prompting import PROMPT_DIR, load_prompt, render_evidence, render_request
from .protocol import AgentResult, AgentTask, Directive, EpisodeTranscript, Evidence, coordinates_from_evidence


logger = logging.getLogger(__name__)

REPROMPT = (
    "Your reply contained no directive. Answer again with one line per directive: "
    "DISPATCH <db_agent|map_agent>: <sub-task>"
)


class Specialist(Protocol):
    name: str

    def handle(self, task: AgentTask, episode: Episode) -> AgentResult:
        """Выполняет подзадачу; ошибки возвращаются в AgentResult, а не поднимаются"""


@dataclass
class SupervisorState:
    """
    Attributes:
        plan(list): Оставшиеся директивы
        step_count(int): Шаги: вызовы специалистов и события plan/replan
        evidence(list): Накопленные свидетельства
        status(str): planning, dispatching, finalizing или failed
    """

    plan: list = field(default_factory=list)
    step_count: int = 0
    evidence: list = field(default_factory=list)
    status: str = "planning"


def rule_finalize(evidence) -> Optional[CanonicalAnswer]:
    """
    Ответ без бэкенда: последний выведенный ответ, иначе одна ячейка
    или одна колонка последнего результата SQL
    """

    for item in reversed(list(evidence)):
        if item.kind == "derived":
            return answer_from_dict(item.payload["answer"])
    for item in reversed(list(evidence)):
        if item.kind != "rows":
            continue
        rows = item.payload["rows"]
        if not rows or any(len(row) != 1 for row in rows):
            return None
        if len(rows) == 1:
            value = rows[0][0]
            if isinstance(value, NumericType) and not isinstance(value, bool):
                return Number(value)
            return EntitySet((str(value),))
        return EntitySet(tuple(str(row[0]) for row in rows))
    return None


class Supervisor:
    """
    Конечный автомат: planning -> dispatching -> finalizing

    Каждый вызов специалиста и каждое событие plan/replan занимает шаг;
    при достижении step_cap эпизод завершается без ответа
    """

    method = "supervisor"

    def __init__(self, backend, specialists, *, step_cap: Optional[int] = None, judge_sufficiency: bool = False) -> None:
        self.backend = backend
        self.specialists = {specialist.name: specialist for specialist in specialists}
        self.step_cap = settings.AGENT_STEP_CAP if step_cap is None else step_cap
        if self.step_cap < 1:
            raise ValueError("step_cap must be at least 1")
        self.judge_sufficiency = judge_sufficiency

    def _directives(
        self, role: str, prompt_name: str, content: str, episode: Episode, context: Optional[dict] = None
    ) -> list[Directive]:
        """
        Запрашивает директивы; при ошибке разбора переспрашивает один раз

        Raises:
            PlanParseError: и повторный ответ без директив
            BackendError: бэкенд недоступен
        """

        prompt = load_prompt(PROMPT_DIR / prompt_name)
        messages = [{"role": "user", "content": content}]
        reply = ""
        for attempt in (1, 2):
            reply = episode.complete(prompt, messages, role=role, context=context)
            try:
                return parse_directives(reply)
            except PlanParseError:
                episode.transcript.event("plan_parse_failure", role=role, attempt=attempt)
                messages = messages + [
                    {"role": "assistant", "content": reply},
                    {"role": "user", "content": REPROMPT},
                ]
        raise PlanParseError(reply)

    def plan(self, question: str, intents, slots, episode: Episode) -> list[Directive]:
        return self._directives(
            "supervisor.plan", "supervisor_plan_v1.txt", render_request(question, intents, slots), episode
        )

    def replan(
        self, question: str, intents, slots, history: list[str], succeeded: list[str], episode: Episode
    ) -> list[Directive]:
        content = render_request(question, intents, slots) + "\nExchanges:\n" + "\n".join(history)
        return self._directives(
            "supervisor.replan", "supervisor_replan_v1.txt", content, episode, context={"succeeded": succeeded}
        )

    def sufficient(self, question: str, state: SupervisorState, episode: Episode) -> bool:
        """По умолчанию правило: план исчерпан; бэкенд может его переопределить"""

        verdict = not state.plan
        if not self.judge_sufficiency:
            return verdict
        content = (
            f"Question: {question}\nRemaining:\n{render_directives(state.plan)}\n"
            f"Evidence:\n{render_evidence(state.evidence)}"
        )
        try:
            reply = episode.complete(
                load_prompt(PROMPT_DIR / "supervisor_sufficiency_v1.txt"),
                [{"role": "user", "content": content}],
                role="supervisor.sufficiency",
                context={"evidence": list(state.evidence), "remaining": list(state.plan)},
            )
        except BackendError:
            return verdict
        judged = parse_sufficiency(reply)
        episode.transcript.event("sufficiency", rule=verdict, judged=judged)
        return verdict if judged is None else judged

    def finalize(self, evidence, question: str, episode: Episode) -> Optional[CanonicalAnswer]:
        """
        Разбирает конверт ANSWER; без конверта ответом становится Text,
        при отказе бэкенда ответ выводится правилом
        """

        try:
            reply = episode.complete(
                load_prompt(PROMPT_DIR / "supervisor_finalize_v1.txt"),
                [{"role": "user", "content": f"Question: {question}\nEvidence:\n{render_evidence(evidence)}"}],
                role="supervisor.finalize",
                context={"evidence": list(evidence)},
            )
        except BackendError:
            episode.transcript.event("finalize_fallback")
            return rule_finalize(evidence)
        episode.transcript.final_text = reply
        answer, parsed = parse_answer(reply)
        if not parsed:
            episode.transcript.event("answer_parse_failure")
        return answer

    def dispatch(self, directive: Directive, task: AgentTask, episode: Episode) -> AgentResult:
        specialist = self.specialists.get(directive.specialist)
        if specialist is None:
            return AgentResult.unable(f"specialist {directive.specialist} is not registered")
        try:
            return specialist.handle(task, episode)
        except AgentError as exc:
            return AgentResult.error(str(exc))

    def _take_step(self, state: SupervisorState, transcript: EpisodeTranscript) -> bool:
        if state.step_count >= self.step_cap:
            state.status = "failed"
            transcript.failure = "step_cap"
            transcript.event("step_cap", step_count=state.step_count)
            logger.warning("%s: step cap %d reached", transcript.instance_id, self.step_cap)
            return False
        state.step_count += 1
        transcript.step_count = state.step_count
        return True

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
        Ведёт эпизод до ответа, отказа или исчерпания шагов; ошибки не
        поднимаются, а попадают в журнал
        """

        intents, slots = tuple(intents), tuple(slots)
        transcript = EpisodeTranscript(
            instance_id=instance_id,
            intents=list(intents),
            slots=[slot.to_dict() for slot in slots],
        )
        episode = Episode(transcript, self.backend, gold, injections)
        state = SupervisorState()
        history: list[str] = []
        succeeded: list[str] = []
        try:
            self._take_step(state, transcript)
            state.plan = self.plan(question, intents, slots, episode)
            transcript.event("plan", directives=[directive.render() for directive in state.plan])
            state.status = "dispatching"
            while state.plan:
                if not self._take_step(state, transcript):
                    return transcript
                directive = state.plan.pop(0)
                task = AgentTask(
                    task_description=directive.subtask,
                    question=question,
                    intents=intents,
                    slots=slots,
                    context=coordinates_from_evidence(state.evidence),
                    evidence=tuple(state.evidence),
                    history=tuple(history),
                )
                episode.dispatch_index = len(transcript.dispatches)
                result = self.dispatch(directive, task, episode)
                transcript.dispatches.append(
                    {"specialist": directive.specialist, "task": task.to_dict(), "result": result.to_dict()}
                )
                if result.status == "success":
                    state.evidence.extend(result.evidence)
                    succeeded.append(directive.specialist)
                    history.append(f"{directive.specialist} succeeded: {directive.subtask}")
                    if self.sufficient(question, state, episode):
                        break
                    if state.plan:
                        continue
                else:
                    history.append(f"{directive.specialist} {result.status}: {result.error_report}")
                if not self._take_step(state, transcript):
                    return transcript
                state.plan = self.replan(question, intents, slots, history, succeeded, episode)
                transcript.event("replan", directives=[item.render() for item in state.plan])
                logger.info("%s: replanned after %s", instance_id, directive.specialist)
            state.status = "finalizing"
            transcript.answer = self.finalize(state.evidence, question, episode)
            if transcript.answer is None:
                transcript.failure = "unanswerable_verdict"
        except PlanParseError:
            state.status = "failed"
            transcript.failure = "plan_parse_failure"
            logger.warning("%s: plan could not be parsed", instance_id)
        except BackendError:
            state.status = "failed"
            transcript.failure = "backend_error"
        return transcript


def evidence_of(transcript: EpisodeTranscript) -> list[Evidence]:
    """Свидетельства успешных обменов журнала"""

    return [
        Evidence.from_dict(item)
        for dispatch in transcript.dispatches
        if dispatch["result"]["status"] == "success"
        for item in dispatch["result"]["evidence"]
    ]
