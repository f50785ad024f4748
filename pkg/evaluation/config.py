"""
Конфигурация прогона и выбор чат-бэкенда
"""

from dataclasses import asdict, dataclass, field, replace

from django.conf import settings

from agents.backends import backend_from_settings
from agents.episode import INJECTABLE_STAGES
from agents.oracle import FailingStageBackend, OracleBackend
from slu.strategies import STRATEGY_NAMES


METHODS = ("supervisor", "standard")
FAILING_PREFIX = "failing:"


@dataclass(frozen=True)
class RunConfig:
    """
    Attributes:
        split(str): Часть датасета: train, val или test
        backend(str): oracle, http или failing:<стадия>
        slu(str): Стратегия SLU
        injections(frozenset): Стадии с подменой эталоном: slu, sql, api
        step_cap(int): Предел шагов эпизода
        seed(int): Сид выборки примеров few-shot
        parallelism(int): Число параллельных эпизодов
        method(str): supervisor или standard
        judge_sufficiency(bool): Спрашивать бэкенд о достаточности свидетельств
    """

    split: str = "test"
    backend: str = "oracle"
    slu: str = "lexicon"
    injections: frozenset = field(default_factory=frozenset)
    step_cap: int = 25
    seed: int = 2024
    parallelism: int = 1
    method: str = "supervisor"
    judge_sufficiency: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "injections", frozenset(self.injections))
        unknown = self.injections - set(INJECTABLE_STAGES)
        if unknown:
            raise ValueError(f"unknown injection stages {sorted(unknown)}")
        if self.step_cap < 1:
            raise ValueError("step_cap must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.slu not in STRATEGY_NAMES:
            raise ValueError(f"unknown SLU strategy {self.slu!r}")
        if self.backend not in ("oracle", "http") and not (
            self.backend.startswith(FAILING_PREFIX) and len(self.backend) > len(FAILING_PREFIX)
        ):
            raise ValueError(f"unknown backend {self.backend!r}")

    @classmethod
    def from_settings(cls, **overrides) -> "RunConfig":
        values = {
            "split": settings.EVAL_SPLIT,
            "backend": "http",
            "slu": settings.EVAL_SLU_STRATEGY,
            "step_cap": settings.AGENT_STEP_CAP,
            "seed": settings.EVAL_SEED,
            "parallelism": settings.EVAL_PARALLELISM,
            "method": settings.EVAL_METHOD,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def with_injections(self, stages) -> "RunConfig":
        return replace(self, injections=frozenset(stages))

    @property
    def slu_label(self) -> str:
        return "gold" if "slu" in self.injections else self.slu

    def to_dict(self) -> dict:
        data = asdict(self)
        data["injections"] = sorted(self.injections)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**{**data, "injections": frozenset(data.get("injections", ()))})


def build_backend(spec: str, templates):
    """
    Raises:
        ConfigurationError: для http не заданы адрес, модель или ключ
        ValueError: неизвестная спецификация
    """

    if spec == "oracle":
        return OracleBackend(templates)
    if spec.startswith(FAILING_PREFIX):
        return FailingStageBackend(templates, spec[len(FAILING_PREFIX):])
    if spec == "http":
        return backend_from_settings()
    raise ValueError(f"unknown backend {spec!r}")
