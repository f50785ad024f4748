"""
Выбор значений плейсхолдеров из хранилища
"""

import random

from geostore.models import Community, Poi
from geostore.store import GeoStore
from .exceptions import SamplingExhausted
from .templates import Binding, PlaceholderSpec, Template


def _candidates(spec: PlaceholderSpec, city: str, binding: Binding, using: str) -> list:
    communities = Community.objects.using(using).filter(city=city)
    pois = Poi.objects.using(using).filter(city=city)
    if spec.source == "city":
        return [city]
    if spec.source == "district":
        return sorted(set(communities.values_list("district", flat=True)))
    if spec.source == "community":
        if spec.within:
            communities = communities.filter(district=binding[spec.within][0])
        return list(dict.fromkeys(communities.order_by("community_id").values_list("name", flat=True)))
    if spec.source == "poi":
        return list(dict.fromkeys(pois.order_by("poi_id").values_list("name", flat=True)))
    if spec.source == "poi_label":
        return sorted(set(pois.values_list("label", flat=True)))
    return list(spec.choices)


def sample_bindings(template: Template, store: GeoStore, city: str, rng: random.Random) -> Binding:
    """
    Выбирает значения всех плейсхолдеров; повторы одного плейсхолдера
    получают различные значения. Районы выбираются раньше зависящих от них
    плейсхолдеров

    Raises:
        SamplingExhausted: кандидатов меньше, чем нужно
    """

    binding: Binding = {"city": (city,)}
    order = sorted(template.placeholders.values(), key=lambda spec: (spec.source != "district", spec.name))
    for spec in order:
        if spec.name == "city":
            continue
        pool = _candidates(spec, city, binding, store.using)
        if len(pool) < spec.count:
            raise SamplingExhausted(
                f"{template.template_id}: {spec.name} needs {spec.count}, {len(pool)} available in {city}"
            )
        binding[spec.name] = tuple(rng.sample(pool, spec.count))
    return binding
