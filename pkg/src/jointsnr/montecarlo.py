"""Monte Carlo comparison of the joint, compact and separate designs.

Each trial draws a hypothesis, draws the powers from the corresponding prior,
emits a zero-mean Gaussian observation vector and runs every configured
method on it. All methods see the same trials, so their metrics are paired.

Trials are generated in blocks of :data:`BLOCK_SIZE`. Block ``k`` uses its own
random stream derived from ``SeedSequence(seed, spawn_key=(k,))``, so results
do not depend on how blocks are scheduled across threads, and aggregation
always runs in trial order.

Method labels are ``"joint"``, ``"compact"`` or ``"separate"``, optionally
followed by ``@gain`` (e.g. ``"joint@0.9"``) to scale the joint or compact
signal estimate before it is used.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import CostConditionError, EmptyInputError, JointSNRError, ShapeUnderflowError
from .fusion import (
    COMPACT,
    JOINT,
    METHODS,
    SEPARATE,
    DecisionReport,
    ModelPriors,
    compact_conditions_hold,
    detect,
)
from .model import (
    CostParams,
    HypothesisPriors,
    JointPriorParams,
    NoisePriorParams,
    PowerPair,
    batch_statistic,
    sample_noise_power,
    sample_power_pair,
    sufficient_statistic,
)

BLOCK_SIZE = 1000


class SweepPathError(JointSNRError):
    """A sweep parameter does not name a configuration field."""


def parse_method(label: str) -> Tuple[str, float]:
    """Split ``"joint@0.9"`` into ``("joint", 0.9)``."""
    name, _, gain = label.partition("@")
    if name not in METHODS:
        raise JointSNRError(f"unknown method {name!r}; expected one of {METHODS}")
    if not gain:
        return name, 1.0
    if name == SEPARATE:
        raise JointSNRError("a signal gain only applies to the joint and compact methods")
    try:
        value = float(gain)
    except ValueError:
        raise JointSNRError(f"bad signal gain in method label {label!r}") from None
    if not (math.isfinite(value) and value >= 0):
        raise JointSNRError(f"bad signal gain in method label {label!r}")
    return name, value


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment protocol; defaults follow the reference simulation setup."""

    trials: int = 20000
    vector_len: int = 128
    hyp_priors: HypothesisPriors = HypothesisPriors()
    noise_prior: NoisePriorParams = NoisePriorParams(3.0, 1.0)
    joint_prior: JointPriorParams = JointPriorParams(3.0, 9.1, 0.0, math.pi / 8)
    costs: CostParams = CostParams()
    seed: int = 0
    methods: Tuple[str, ...] = (JOINT, SEPARATE)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise JointSNRError(f"trials must be a positive integer, got {self.trials}")
        if int(self.vector_len) != self.vector_len or self.vector_len < 1:
            raise JointSNRError(f"vector_len must be a positive integer, got {self.vector_len}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise JointSNRError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise JointSNRError("at least one method is required")
        if self.hyp_priors.pi0 <= 0 or self.hyp_priors.pi1 <= 0:
            raise JointSNRError("both hypotheses need positive prior probability")
        names = {parse_method(m)[0] for m in self.methods}
        self._check_shapes(names)
        if COMPACT in names and not compact_conditions_hold(self.costs):
            raise CostConditionError(
                "compact method needs b10 = a10 = b11, a11 = 0, b01 = a01 = b00, a00 = 0"
            )

    def _check_shapes(self, names) -> None:
        # joint needs second posterior moments, the others only first moments
        order = 2 if JOINT in names else 1
        half_n = 0.5 * self.vector_len
        a1 = self.joint_prior.alpha1 + half_n - 1 - order
        a0 = self.noise_prior.alpha0 + half_n - order
        if not a1 > 0:
            raise ShapeUnderflowError(
                f"alpha1 + n/2 - {1 + order} > 0 violated: alpha1={self.joint_prior.alpha1:g}, "
                f"n={self.vector_len} gives {a1:g}"
            )
        if not a0 > 0:
            raise ShapeUnderflowError(
                f"alpha0 + n/2 - {order} > 0 violated: alpha0={self.noise_prior.alpha0:g}, "
                f"n={self.vector_len} gives {a0:g}"
            )

    @property
    def priors(self) -> ModelPriors:
        return ModelPriors(self.hyp_priors, self.noise_prior, self.joint_prior)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self) | {"methods": list(self.methods)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise JointSNRError(f"unknown configuration fields: {sorted(unknown)}")
        kwargs = dict(data)
        nested = {
            "hyp_priors": HypothesisPriors,
            "noise_prior": NoisePriorParams,
            "joint_prior": JointPriorParams,
            "costs": CostParams,
        }
        defaults = cls()
        for key, typ in nested.items():
            if key in kwargs:
                base = dataclasses.asdict(getattr(defaults, key))
                extra = set(kwargs[key]) - set(base)
                if extra:
                    raise JointSNRError(f"unknown fields in {key}: {sorted(extra)}")
                kwargs[key] = typ(**(base | dict(kwargs[key])))
        if "methods" in kwargs:
            kwargs["methods"] = tuple(kwargs["methods"])
        return cls(**kwargs)


@dataclass(frozen=True)
class Trial:
    hypothesis: int
    powers: PowerPair
    observations: np.ndarray


@dataclass(frozen=True)
class TrialRecord:
    true_hypothesis: int
    true_s: float
    true_v: float
    reports: Dict[str, DecisionReport]
    costs: Dict[str, float]


@dataclass(frozen=True)
class MethodOutputs:
    """Per-trial outputs of one method across a batch."""

    decision: np.ndarray
    s_hat: np.ndarray
    v_hat: np.ndarray
    cost: np.ndarray


@dataclass(frozen=True)
class TrialBatch:
    """Columnar trial records, in trial order."""

    true_hypothesis: np.ndarray
    true_s: np.ndarray
    true_v: np.ndarray
    outputs: Dict[str, MethodOutputs]

    def __len__(self):
        return len(self.true_hypothesis)

    @classmethod
    def concatenate(cls, parts: Sequence["TrialBatch"]) -> "TrialBatch":
        labels = list(parts[0].outputs)
        return cls(
            np.concatenate([p.true_hypothesis for p in parts]),
            np.concatenate([p.true_s for p in parts]),
            np.concatenate([p.true_v for p in parts]),
            {
                m: MethodOutputs(
                    *(np.concatenate([getattr(p.outputs[m], f) for p in parts])
                      for f in ("decision", "s_hat", "v_hat", "cost"))
                )
                for m in labels
            },
        )

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord]) -> "TrialBatch":
        if not records:
            raise EmptyInputError("no trial records to aggregate")
        labels = list(records[0].reports)
        return cls(
            np.array([r.true_hypothesis for r in records]),
            np.array([r.true_s for r in records], dtype=float),
            np.array([r.true_v for r in records], dtype=float),
            {
                m: MethodOutputs(
                    np.array([r.reports[m].decision for r in records]),
                    np.array([r.reports[m].s_hat for r in records], dtype=float),
                    np.array([r.reports[m].v_hat for r in records], dtype=float),
                    np.array([r.costs[m] for r in records], dtype=float),
                )
                for m in labels
            },
        )


@dataclass(frozen=True)
class MethodMetrics:
    detection_error_prob: float
    detection_error_se: float
    signal_mse: float
    signal_mse_se: float
    noise_mse: float
    noise_mse_se: float
    empirical_bayes_risk: float
    empirical_bayes_risk_se: float


@dataclass(frozen=True)
class MetricsSummary:
    trials: int
    methods: Dict[str, MethodMetrics] = field(default_factory=dict)

    def __getitem__(self, label: str) -> MethodMetrics:
        return self.methods[label]


def realized_cost(
    hypothesis: np.ndarray,
    s: np.ndarray,
    v: np.ndarray,
    decision: np.ndarray,
    s_hat: np.ndarray,
    v_hat: np.ndarray,
    costs: CostParams,
) -> np.ndarray:
    """Quadratic cost of the (true hypothesis, decision) cell at the true powers."""
    a = np.array([[costs.a00, costs.a01], [costs.a10, costs.a11]])
    b = np.array([[costs.b00, costs.b01], [costs.b10, costs.b11]])
    h = np.asarray(hypothesis, dtype=int)
    d = np.asarray(decision, dtype=int)
    err = (np.asarray(s) - s_hat) ** 2 + (np.asarray(v) - v_hat) ** 2
    return b[h, d] * err + a[h, d]


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def generate_block(rng: np.random.Generator, config: ExperimentConfig, size: int):
    """Draw ``size`` trials: hypotheses, true powers and observation rows."""
    h1 = rng.random(size) < config.hyp_priors.pi1
    v0 = sample_noise_power(rng, config.noise_prior, size)
    pair = sample_power_pair(rng, config.joint_prior, size)
    z = rng.standard_normal((size, config.vector_len))
    s = np.where(h1, pair.s, 0.0)
    v = np.where(h1, pair.v, v0)
    y = z * np.sqrt(s + v)[:, None]
    return h1.astype(np.int8), s, v, y


def generate_trial(rng: np.random.Generator, config: ExperimentConfig) -> Trial:
    """One trial drawn from the generative model."""
    h, s, v, y = generate_block(rng, config, 1)
    return Trial(int(h[0]), PowerPair(float(s[0]), float(v[0])), y[0])


def run_trial(trial: Trial, config: ExperimentConfig) -> TrialRecord:
    """Run every configured method on one trial and score it against the truth."""
    stat = sufficient_statistic(trial.observations)
    reports, costs = {}, {}
    for label in config.methods:
        name, gain = parse_method(label)
        rep = detect(name, stat, config.priors, config.costs, gain)
        reports[label] = rep
        costs[label] = float(
            realized_cost(
                trial.hypothesis, trial.powers.s, trial.powers.v,
                rep.decision, rep.s_hat, rep.v_hat, config.costs,
            )
        )
    return TrialRecord(trial.hypothesis, float(trial.powers.s), float(trial.powers.v), reports, costs)


def _run_block(config: ExperimentConfig, block: int) -> TrialBatch:
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, config.trials - start)
    h, s, v, y = generate_block(block_rng(config.seed, block), config, size)
    stat = batch_statistic(y)
    outputs = {}
    for label in config.methods:
        name, gain = parse_method(label)
        rep = detect(name, stat, config.priors, config.costs, gain)
        decision = np.asarray(rep.decision, dtype=np.int8)
        s_hat = np.asarray(rep.s_hat, dtype=float)
        v_hat = np.asarray(rep.v_hat, dtype=float)
        outputs[label] = MethodOutputs(
            decision, s_hat, v_hat, realized_cost(h, s, v, decision, s_hat, v_hat, config.costs)
        )
    return TrialBatch(h, s, v, outputs)


def simulate(config: ExperimentConfig, threads: int = 1) -> TrialBatch:
    """All trials of an experiment, in trial order."""
    n_blocks = -(-config.trials // BLOCK_SIZE)
    if threads <= 1:
        parts = [_run_block(config, k) for k in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda k: _run_block(config, k), range(n_blocks)))
    return TrialBatch.concatenate(parts)


def _mean_se(x: np.ndarray) -> Tuple[float, float]:
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, se


def aggregate(records: Union[TrialBatch, Sequence[TrialRecord]]) -> MetricsSummary:
    """Detection error, signal/noise MSE and empirical Bayes risk per method."""
    batch = records if isinstance(records, TrialBatch) else TrialBatch.from_records(records)
    if len(batch) == 0:
        raise EmptyInputError("no trial records to aggregate")
    out = {}
    for label, o in batch.outputs.items():
        err = (o.decision != batch.true_hypothesis).astype(float)
        stats = [
            _mean_se(err),
            _mean_se((batch.true_s - o.s_hat) ** 2),
            _mean_se((batch.true_v - o.v_hat) ** 2),
            _mean_se(o.cost),
        ]
        out[label] = MethodMetrics(*itertools.chain.from_iterable(stats))
    return MetricsSummary(len(batch), out)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> MetricsSummary:
    return aggregate(simulate(config, threads))


def agreement_rate(batch: TrialBatch, a: str, b: str) -> float:
    """Fraction of trials on which two methods reach the same decision."""
    return float(np.mean(batch.outputs[a].decision == batch.outputs[b].decision))


SHARED_SHAPE = "alpha"


def with_param(config: ExperimentConfig, path: str, value) -> ExperimentConfig:
    """Copy of ``config`` with one field replaced.

    ``path`` is a field name (``"trials"``), a dotted nested field
    (``"noise_prior.beta0"``), or ``"alpha"`` to set both shape parameters.
    Setting ``hyp_priors.pi0`` or ``hyp_priors.pi1`` adjusts the other to
    keep them summing to one.
    """
    if path == SHARED_SHAPE:
        return dataclasses.replace(
            config,
            noise_prior=dataclasses.replace(config.noise_prior, alpha0=float(value)),
            joint_prior=dataclasses.replace(config.joint_prior, alpha1=float(value)),
        )
    head, _, tail = path.partition(".")
    names = {f.name for f in dataclasses.fields(config)}
    if head not in names or head == "methods":
        raise SweepPathError(f"cannot sweep over {path!r}")
    current = getattr(config, head)
    if not tail:
        if dataclasses.is_dataclass(current):
            raise SweepPathError(f"{path!r} names a group; use a dotted field such as {head}.<field>")
        return dataclasses.replace(config, **{head: type(current)(value)})
    if not dataclasses.is_dataclass(current) or tail not in {f.name for f in dataclasses.fields(current)}:
        raise SweepPathError(f"cannot sweep over {path!r}")
    if head == "hyp_priors":
        other = "pi1" if tail == "pi0" else "pi0"
        new = HypothesisPriors(**{tail: float(value), other: 1.0 - float(value)})
    else:
        new = dataclasses.replace(current, **{tail: float(value)})
    return dataclasses.replace(config, **{head: new})


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def sweep_points(
    base_config: ExperimentConfig, sweep: Sequence[Tuple[str, Iterable]]
) -> List[Tuple[Dict[str, float], ExperimentConfig]]:
    """Cartesian grid of configurations, first sweep parameter varying slowest."""
    if not sweep:
        return [({}, base_config)]
    paths = [p for p, _ in sweep]
    grids = [list(vals) for _, vals in sweep]
    points = []
    for k, combo in enumerate(itertools.product(*grids)):
        cfg = base_config
        for path, value in zip(paths, combo):
            cfg = with_param(cfg, path, value)
        cfg = dataclasses.replace(cfg, seed=point_seed(base_config.seed, k))
        points.append((dict(zip(paths, combo)), cfg))
    return points


def run_sweep(
    base_config: ExperimentConfig,
    sweep: Sequence[Tuple[str, Iterable]],
    threads: int = 1,
) -> List[Tuple[Dict[str, float], MetricsSummary]]:
    """Run the full experiment at every grid point, returning rows in grid order."""
    return [(point, run_experiment(cfg, threads)) for point, cfg in sweep_points(base_config, sweep)]
