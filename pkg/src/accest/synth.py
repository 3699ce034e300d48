"""Seeded Gaussian-mixture "classifier world" producing shifted test sets.

A world holds ``k`` class means on a sphere of radius ``R`` in ``d``
dimensions and a linear classifier ``logit_j(x) = beta * <mean_j, x>``.
Test sets draw ``N(mean_c, I)`` points per class and push them through one
or more shift transforms. All randomness comes from numpy's PCG64 generator
seeded explicitly, so outputs are identical across runs and platforms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInput, InvalidParameter
from .predmatrix import (
    DEFAULT_TEMPERATURE,
    LabeledPredictions,
    RawScores,
    ScoreKind,
    temper_softmax,
)

COMPOSED_FAMILY_COUNT = 3


class ShiftFamily(str, enum.Enum):
    FEATURE_NOISE = "feature_noise"
    MEAN_DRIFT = "mean_drift"
    FEATURE_SCALE = "feature_scale"


ALL_FAMILIES = tuple(ShiftFamily)


def _rng(*seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(seed))))


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed of the ``index``-th child stream of ``seed``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class WorldSpec:
    class_count: int = 10
    feature_dim: int = 32
    mean_radius: float = 4.0
    seed: int = 0
    classifier_scale: float = 0.25

    def __post_init__(self):
        if self.class_count < 2 or self.feature_dim < 2:
            raise InvalidParameter("need class_count >= 2 and feature_dim >= 2")
        if not (self.mean_radius > 0 and self.classifier_scale > 0):
            raise InvalidParameter("mean_radius and classifier_scale must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class World:
    spec: WorldSpec
    means: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.spec.classifier_scale * self.means

    def logits(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T

    def family_max(self, family: ShiftFamily) -> float:
        """Strength at the top intensity level of ``family``."""
        return {
            ShiftFamily.FEATURE_NOISE: 2.5 * self.spec.mean_radius / 4.0,
            ShiftFamily.MEAN_DRIFT: 0.5,
            ShiftFamily.FEATURE_SCALE: 1.0,
        }[ShiftFamily(family)]

    def intensity_value(self, family: ShiftFamily, level: int, levels: int = 5) -> float:
        if not 1 <= level <= levels:
            raise InvalidParameter(f"level must lie in [1, {levels}]")
        return self.family_max(family) * level / levels


def build_world(spec: WorldSpec) -> World:
    """Class means uniform on the radius-``R`` sphere."""
    g = _rng(spec.seed, 0)
    m = g.standard_normal((spec.class_count, spec.feature_dim))
    m *= spec.mean_radius / np.linalg.norm(m, axis=1, keepdims=True)
    m.setflags(write=False)
    return World(spec, m)


@dataclass(frozen=True)
class ShiftScenario:
    """One synthetic test set.

    ``composed`` lists ``(family, strength)`` transforms applied in order;
    when it is set, ``family``/``intensity_level``/``intensity_value``
    describe nothing and are ``None``/0/0.
    """

    name: str
    family: ShiftFamily | None
    intensity_level: int
    intensity_value: float
    samples_per_class: tuple[int, ...]
    seed: int
    composed: tuple[tuple[ShiftFamily, float], ...] | None = None
    imbalance: float | None = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.samples_per_class)
        if any(c < 0 for c in counts) or not any(c > 0 for c in counts):
            raise InvalidInput("samples_per_class must be non-negative with at least one positive")
        object.__setattr__(self, "samples_per_class", counts)
        if self.family is not None:
            object.__setattr__(self, "family", ShiftFamily(self.family))

    @property
    def group(self) -> str:
        if self.composed is not None:
            return "composed"
        return "clean" if self.family is None else self.family.value

    def transforms(self) -> tuple[tuple[ShiftFamily, float], ...]:
        if self.composed is not None:
            return self.composed
        if self.family is None:
            return ()
        return ((self.family, self.intensity_value),)


@dataclass(frozen=True)
class GeneratedSet:
    raw: RawScores
    labels: np.ndarray
    scenario: ShiftScenario = field(repr=False)

    def labeled(self, temperature: float = DEFAULT_TEMPERATURE) -> LabeledPredictions:
        return LabeledPredictions(temper_softmax(self.raw, temperature), self.labels)


def apply_shift(x: np.ndarray, family: ShiftFamily, strength: float, world: World,
                rng: np.random.Generator) -> np.ndarray:
    """Apply one shift transform to the point cloud ``x`` (rows are points).

    * ``FEATURE_NOISE``: ``(x + s * eps) / sqrt(1 + s**2)``; mixes in
      Gaussian noise at constant per-feature variance, so the class signal
      fades instead of the feature norm growing.
    * ``MEAN_DRIFT``: translates every point by ``s * R`` along a random
      unit direction inside the span of the class means, which pushes
      predictions toward a few classes.
    * ``FEATURE_SCALE``: multiplies feature ``i`` by ``1 + s * u_i`` with
      ``u_i ~ U(-1, 1)``, a contrast-like per-channel distortion.

    All three are exact identities at strength 0, and each draws its random
    quantities regardless of strength.
    """
    family = ShiftFamily(family)
    if family is ShiftFamily.FEATURE_NOISE:
        noise = rng.standard_normal(x.shape)
        return (x + strength * noise) / math.sqrt(1.0 + strength * strength)
    if family is ShiftFamily.MEAN_DRIFT:
        direction = rng.standard_normal(world.spec.class_count) @ world.means
        direction /= np.linalg.norm(direction)
        return x + (strength * world.spec.mean_radius) * direction
    factors = 1.0 + strength * rng.uniform(-1.0, 1.0, x.shape[1])
    return x * factors


def generate_set(world: World, scenario: ShiftScenario) -> GeneratedSet:
    """Sample the scenario's points, shift them, and emit logits with labels."""
    counts = np.asarray(scenario.samples_per_class)
    if counts.size != world.spec.class_count:
        raise InvalidInput(
            f"samples_per_class has {counts.size} entries, world has {world.spec.class_count} classes"
        )
    if counts.sum() == 0:
        raise InvalidInput("scenario has zero samples")
    g = _rng(scenario.seed)
    labels = np.repeat(np.arange(counts.size), counts)
    x = world.means[labels] + g.standard_normal((labels.size, world.spec.feature_dim))
    for family, strength in scenario.transforms():
        x = apply_shift(x, family, strength, world, g)
    raw = RawScores(world.logits(x), ScoreKind.LOGITS)
    return GeneratedSet(raw, labels, scenario)


def imbalance_counts(k: int, n_max: int, m: float) -> np.ndarray:
    """Exponentially decaying class sizes, ``round(n_max * m ** (c / (k - 1)))``."""
    if not (0.0 < m <= 1.0):
        raise InvalidParameter(f"imbalance ratio must lie in (0, 1], got {m!r}")
    if n_max < 1 or k < 2:
        raise InvalidParameter("need n_max >= 1 and k >= 2")
    c = np.arange(k)
    return np.floor(n_max * m ** (c / (k - 1)) + 0.5).astype(np.int64)


def _fraction_count(n: int, fraction: float) -> int:
    # round() first so that e.g. 0.7 * 10 = 7.000000000000001 keeps 7 rows.
    return math.ceil(round(fraction * n, 9))


def subsample_indices(n: int, fraction: float, seed: int) -> np.ndarray:
    """Sorted indices of a uniform ``ceil(fraction * n)`` sample without replacement."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidParameter(f"fraction must lie in (0, 1], got {fraction!r}")
    m = _fraction_count(n, fraction)
    if m < 1:
        raise InvalidInput("subsample would be empty")
    if m >= n:
        return np.arange(n)
    return np.sort(_rng(seed).choice(n, size=m, replace=False))


def subsample(L: LabeledPredictions, fraction: float, seed: int) -> LabeledPredictions:
    idx = subsample_indices(L.matrix.sample_count, fraction, seed)
    P = L.matrix
    sub = type(P)(P.rows[idx], P.temperature, P.source_kind)
    return LabeledPredictions(sub, L.labels[idx])


def clean_scenario(world: World, samples_per_class: int, seed: int, name: str = "clean") -> ShiftScenario:
    return ShiftScenario(
        name=name, family=None, intensity_level=0, intensity_value=0.0,
        samples_per_class=(samples_per_class,) * world.spec.class_count, seed=seed,
    )


def make_benchmark(world: World, families=ALL_FAMILIES, levels: int = 5, composed_count: int = 0,
                   seed: int = 0, samples_per_class: int | tuple[int, ...] = 200,
                   imbalance: float | None = None) -> list[ShiftScenario]:
    """The families x levels grid followed by randomly composed scenarios.

    Args:
        families: shift families to grid over (or their count, taking the
            first ones in canonical order).
        levels: intensity levels per family.
        composed_count: number of random-composition scenarios, each
            stacking up to three distinct families in random order with
            strengths uniform in ``[0, family_max]``.
        samples_per_class: per-class size, or an explicit count vector.
        imbalance: when set, class sizes decay exponentially to this ratio
            with ``samples_per_class`` as the head size.
    """
    if isinstance(families, int):
        if not 1 <= families <= len(ALL_FAMILIES):
            raise InvalidParameter(f"family count must lie in [1, {len(ALL_FAMILIES)}]")
        families = ALL_FAMILIES[:families]
    families = tuple(ShiftFamily(f) for f in families)
    if not families or levels < 1 or composed_count < 0:
        raise InvalidParameter("need at least one family, one level and composed_count >= 0")
    k = world.spec.class_count
    if imbalance is not None:
        if not isinstance(samples_per_class, int):
            raise InvalidParameter("imbalance needs a scalar head class size")
        counts = tuple(int(c) for c in imbalance_counts(k, samples_per_class, imbalance))
    elif isinstance(samples_per_class, int):
        counts = (samples_per_class,) * k
    else:
        counts = tuple(samples_per_class)

    scenarios: list[ShiftScenario] = []
    for fam in families:
        for level in range(1, levels + 1):
            idx = len(scenarios)
            scenarios.append(ShiftScenario(
                name=f"{fam.value}-{level}",
                family=fam,
                intensity_level=level,
                intensity_value=world.intensity_value(fam, level, levels),
                samples_per_class=counts,
                seed=derive_seed(seed, idx),
                imbalance=imbalance,
            ))
    pick = min(COMPOSED_FAMILY_COUNT, len(families))
    for j in range(composed_count):
        idx = len(scenarios)
        g = _rng(seed, idx, 1)
        chosen = g.permutation(len(families))[:pick]
        steps = tuple(
            (families[i], float(g.uniform(0.0, world.family_max(families[i])))) for i in chosen
        )
        scenarios.append(ShiftScenario(
            name=f"composed-{j + 1:03d}",
            family=None,
            intensity_level=0,
            intensity_value=0.0,
            samples_per_class=counts,
            seed=derive_seed(seed, idx),
            composed=steps,
            imbalance=imbalance,
        ))
    return scenarios


def with_counts(scenario: ShiftScenario, samples_per_class) -> ShiftScenario:
    return replace(scenario, samples_per_class=tuple(samples_per_class))
