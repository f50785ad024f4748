"""
Стратифицированное разбиение на train, val и test
"""

import logging
import random
from collections import defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable

from django.conf import settings

from domain.instances import QAInstance


logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")
MIN_STRATUM = 3


@dataclass(frozen=True)
class SplitSpec:
    """
    Attributes:
        ratios(tuple): Доли train, val, test; нормализуются к сумме 1
        seed(int): Сид перемешивания
    """

    ratios: tuple[float, float, float] = (8, 1, 1)
    seed: int = 13

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(ratio < 0 for ratio in self.ratios) or sum(self.ratios) <= 0:
            raise ValueError(f"invalid split ratios {self.ratios}")
        total = sum(self.ratios)
        object.__setattr__(self, "ratios", tuple(ratio / total for ratio in self.ratios))

    @classmethod
    def from_settings(cls, seed=None) -> "SplitSpec":
        return cls(tuple(settings.SPLIT_RATIOS), settings.SPLIT_SEED if seed is None else seed)


def _share(count: int, ratio: float) -> int:
    return int((Decimal(count) * Decimal(str(ratio))).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def stratified_split(instances: Iterable[QAInstance], spec: SplitSpec) -> dict[str, list[QAInstance]]:
    """
    Делит каждую страту (template_id) по долям спецификации

    Страты меньше трёх экземпляров целиком уходят в train
    """

    strata: dict[str, list[QAInstance]] = defaultdict(list)
    for instance in instances:
        strata[instance.template_id].append(instance)

    splits: dict[str, list[QAInstance]] = {name: [] for name in SPLIT_NAMES}
    for template_id in sorted(strata):
        members = sorted(strata[template_id], key=lambda instance: instance.id)
        if len(members) < MIN_STRATUM:
            logger.warning("stratum %s has %d instances, all go to train", template_id, len(members))
            splits["train"].extend(members)
            continue
        random.Random(f"{spec.seed}:{template_id}").shuffle(members)
        val = _share(len(members), spec.ratios[1])
        test = _share(len(members), spec.ratios[2])
        splits["val"].extend(members[:val])
        splits["test"].extend(members[val:val + test])
        splits["train"].extend(members[val + test:])
    for name in SPLIT_NAMES:
        splits[name].sort(key=lambda instance: instance.id)
    return splits
