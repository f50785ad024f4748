from dataclasses import dataclass, replace

from django.conf import settings


@dataclass(frozen=True)
class StoreConfig:
    """
    Attributes:
        cities(tuple): Города хранилища
        poi_pairing_radius(float): Радиус пар POI - комплекс, метры
        community_pairing_radius(float): Радиус пар соседних комплексов, метры
        fixture_seed(int): Сид синтетических фикстур
        communities_per_city(int): Комплексов на город в фикстуре
        pois_per_city(int): POI на город в фикстуре
    """

    cities: tuple[str, ...]
    poi_pairing_radius: float = 3000.0
    community_pairing_radius: float = 1000.0
    fixture_seed: int = 7
    communities_per_city: int = 200
    pois_per_city: int = 150

    def __post_init__(self) -> None:
        object.__setattr__(self, "cities", tuple(self.cities))
        if not self.cities:
            raise ValueError("at least one city is required")
        if self.poi_pairing_radius <= 0 or self.community_pairing_radius <= 0:
            raise ValueError("pairing radii must be positive")

    @classmethod
    def from_settings(cls, **overrides) -> "StoreConfig":
        config = cls(
            cities=tuple(settings.QA_CITIES),
            poi_pairing_radius=settings.POI_PAIRING_RADIUS,
            community_pairing_radius=settings.COMMUNITY_PAIRING_RADIUS,
            fixture_seed=settings.FIXTURE_SEED,
            communities_per_city=settings.FIXTURE_COMMUNITIES_PER_CITY,
            pois_per_city=settings.FIXTURE_POIS_PER_CITY,
        )
        overrides = {key: value for key, value in overrides.items() if value is not None}
        return replace(config, **overrides)
