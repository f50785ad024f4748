"""
Сводный отчёт прогона: документ JSON и текстовая таблица
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from domain.instances import SlotAnnotation
from slu.metrics import slu_metrics
from slu.prediction import SluPrediction
from .metrics import OVERALL, TOOL_TYPES, Mean, align, answer_metrics, trace_metrics


SCOPE_ORDER = ("1", "2", "3", TOOL_TYPES, OVERALL)


def prediction_of(transcript) -> SluPrediction:
    """Разметка SLU, которую получили агенты"""
    return SluPrediction(transcript.intents, tuple(SlotAnnotation.from_dict(slot) for slot in transcript.slots))


@dataclass
class EvalReport:
    """
    Attributes:
        config(dict): Конфигурация прогона
        count(int): Число эпизодов
        counts(dict): Эпизоды по областям
        answers(dict): accuracy и f1 по областям
        trace(dict): ecr, pass_at_1, api_label_accuracy, planning_accuracy по областям
        slu(dict): Метрики SLU
        failures(dict): Причины отсутствия ответа
    """

    config: dict
    count: int
    counts: dict[str, int] = field(default_factory=dict)
    answers: dict[str, dict[str, Optional[float]]] = field(default_factory=dict)
    trace: dict[str, dict[str, Optional[float]]] = field(default_factory=dict)
    slu: dict = field(default_factory=dict)
    failures: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "count": self.count,
            "counts": self.counts,
            "answers": self.answers,
            "trace": self.trace,
            "slu": self.slu,
            "failures": self.failures,
        }

    def metric(self, name: str, scope: str = OVERALL) -> Optional[float]:
        table = self.answers if name in self.answers else self.trace
        return table.get(name, {}).get(scope)

    def render_text(self) -> str:
        def cell(value: Optional[float]) -> str:
            return "-" if value is None else f"{value:.4f}"

        config = self.config
        lines = [
            f"method={config.get('method')} backend={config.get('backend')} slu={config.get('slu')} "
            f"injections={','.join(config.get('injections', [])) or 'none'} episodes={self.count}",
            "",
            f"{'scope':<8} {'n':>5} {'Acc':>7} {'F1':>7} {'ECR':>7} {'pass@1':>7} {'API':>7} {'Plan':>7}",
        ]
        for scope in SCOPE_ORDER:
            if scope not in self.counts:
                continue
            values = [self.metric(name, scope) for name in ("accuracy", "f1")] + [
                self.metric(name, scope) for name in ("ecr", "pass_at_1", "api_label_accuracy", "planning_accuracy")
            ]
            lines.append(f"{scope:<8} {self.counts[scope]:>5} " + " ".join(f"{cell(value):>7}" for value in values))
        if self.slu:
            lines += [
                "",
                "SLU intent P/R/F1 {:.4f}/{:.4f}/{:.4f}  slot P/R/F1 {:.4f}/{:.4f}/{:.4f}  intent acc {:.4f}".format(
                    self.slu["intent"]["precision"],
                    self.slu["intent"]["recall"],
                    self.slu["intent"]["f1"],
                    self.slu["slot"]["precision"],
                    self.slu["slot"]["recall"],
                    self.slu["slot"]["f1"],
                    self.slu["intent_accuracy"],
                ),
            ]
        if self.failures:
            lines += ["", "failures: " + ", ".join(f"{key}={value}" for key, value in sorted(self.failures.items()))]
        return "\n".join(lines) + "\n"


def _values(table: dict[str, dict[str, Mean]]) -> dict[str, dict[str, Optional[float]]]:
    return {name: {scope: mean.value for scope, mean in sorted(scopes.items())} for name, scopes in table.items()}


def build_report(config, transcripts, golds) -> EvalReport:
    """
    Агрегирует журналы независимо от их порядка

    Raises:
        AlignmentError: журналы не соответствуют эталону
    """

    pairs = align(transcripts, golds)
    answers = answer_metrics([transcript for transcript, _ in pairs], [gold for _, gold in pairs])
    counts = {scope: mean.count for scope, mean in sorted(answers["accuracy"].items())}
    scores = slu_metrics([prediction_of(transcript) for transcript, _ in pairs], [gold for _, gold in pairs])
    failures = Counter(transcript.failure for transcript, _ in pairs if transcript.failure)
    return EvalReport(
        config=config.to_dict() if hasattr(config, "to_dict") else dict(config),
        count=len(pairs),
        counts=counts,
        answers=_values(answers),
        trace=_values(trace_metrics([transcript for transcript, _ in pairs], [gold for _, gold in pairs])),
        slu=scores.to_dict(),
        failures=dict(sorted(failures.items())),
    )
