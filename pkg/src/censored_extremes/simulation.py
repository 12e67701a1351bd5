"""Declarative, reproducible Monte-Carlo studies.

A replication is a pure function of ``(master_seed, rep_index)``: its random
stream comes from ``SeedSequence(master_seed, spawn_key=(rep_index,))``.
Per-replication results are stored by index and reduced in index order, so
the output does not depend on the number of workers.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import asymptotics as asy
from .censored_data import TailView, generate_censored, sort_with_concomitants, top_k_view, uncensored_fraction
from .distributions import Beta, Burr, Distribution, Exponential, Frechet, Pareto, Weibull, parse_distribution
from .ekm import ekm_integral, ekm_weights
from .errors import CensoredExtremesError, ConfigError, DegenerateEstimateError, GuardError
from .estimators import (
    EviEstimate,
    classical_hill,
    classify_mda,
    log_moment_target,
    moment_from_log_moments,
    moment_uncensored,
)

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "replicate_stream",
    "run_experiment",
    "run_mse_experiment",
    "run_classification_experiment",
    "run_coverage_experiment",
    "preset",
    "PRESETS",
    "METRICS",
    "censoring_index_for",
]

METRICS = ("mse", "bias", "classification", "coverage", "sd_gap")
DEFAULT_SEED = 20250101

# estimator ids understood by the harness; "name:r" forms take a log-moment order
BASE_ESTIMATORS = ("hill_censored", "moment_censored", "hill_benchmark", "moment_benchmark", "moment_uncensored")
ORDERED_ESTIMATORS = ("mhat", "km_plugin", "benchmark_plugin")


def replicate_stream(master_seed: int, rep_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed) % 2**64, spawn_key=(int(rep_index),))
    return np.random.Generator(np.random.PCG64(seq))


CUSTOM_PREFIX = "custom."


def _split_estimator(eid: str) -> tuple[str, int | None]:
    if eid.startswith(CUSTOM_PREFIX) and len(eid) > len(CUSTOM_PREFIX):
        return eid, None
    name, _, order = eid.partition(":")
    name = name.replace("-", "_")
    if order:
        if name not in ORDERED_ESTIMATORS:
            raise ConfigError(f"estimator {name!r} takes no order")
        try:
            r = int(order)
        except ValueError:
            raise ConfigError(f"bad order in estimator {eid!r}") from None
        if r < 1:
            raise ConfigError("log-moment order must be >= 1")
        return name, r
    if name in ORDERED_ESTIMATORS:
        raise ConfigError(f"estimator {name!r} needs an order, e.g. {name}:1")
    if name not in BASE_ESTIMATORS:
        raise ConfigError(f"unknown estimator {eid!r}")
    return name, None


@dataclass(frozen=True)
class ExperimentSpec:
    f_dist: Distribution
    g_dist: Distribution
    n: int
    reps: int
    k_grid: tuple[int, ...]
    estimators: tuple[str, ...]
    metrics: tuple[str, ...] = ("mse", "bias")
    normalized: bool = True
    gamma_f: float | None = None
    ci_level: float = 0.95
    master_seed: int = DEFAULT_SEED
    classification_radius: float = 0.2
    fixed_variance: float | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not self.k_grid:
            raise ConfigError("k_grid is empty")
        if any(b <= a for a, b in zip(self.k_grid, self.k_grid[1:])):
            raise ConfigError("k_grid must be strictly increasing")
        if self.k_grid[0] < 1 or self.k_grid[-1] > self.n - 1:
            raise ConfigError(f"k_grid entries must lie in [1, {self.n - 1}]")
        if not self.estimators:
            raise ConfigError("no estimators requested")
        for e in self.estimators:
            _split_estimator(e)
        bad = set(self.metrics) - set(METRICS)
        if bad:
            raise ConfigError(f"unknown metric(s) {sorted(bad)}; choose from {METRICS}")
        if not 0 < self.ci_level < 1:
            raise ConfigError("ci_level must lie in (0, 1)")
        if not self.classification_radius > 0:
            raise ConfigError("classification_radius must be positive")
        if self.fixed_variance is not None and self.fixed_variance < 0:
            raise ConfigError("fixed_variance must be nonnegative")

    @property
    def true_gamma(self) -> float:
        if self.gamma_f is not None:
            return float(self.gamma_f)
        return self.f_dist.tail_profile().gamma

    def to_dict(self) -> dict:
        d = asdict(self)
        d["f_dist"] = self.f_dist.literal()
        d["g_dist"] = self.g_dist.literal()
        d["k_grid"] = list(self.k_grid)
        d["estimators"] = list(self.estimators)
        d["metrics"] = list(self.metrics)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown spec field(s) {sorted(unknown)}")
        try:
            d["f_dist"] = parse_distribution(d["f_dist"])
            d["g_dist"] = parse_distribution(d["g_dist"])
            k_grid = d["k_grid"]
            if isinstance(k_grid, str):
                d["k_grid"] = parse_k_grid(k_grid)
            return cls(**d)
        except KeyError as exc:
            raise ConfigError(f"spec is missing field {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(f"invalid spec: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("experiment spec must be a JSON object")
        return cls.from_dict(data)


def parse_k_grid(text: str) -> tuple[int, ...]:
    """``a:b[:step]`` inclusive of both ends, or a comma-separated list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or b < a:
                raise ValueError
            return tuple(range(a, b + 1, step))
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"invalid k grid {text!r}; expected a:b[:step]") from None


# ---------------------------------------------------------------------------
# one replication


@dataclass
class _RepOutput:
    estimates: np.ndarray  # (n_estimators, n_k), nan where degenerate
    covered: np.ndarray  # 1.0 / 0.0, nan where no interval


@dataclass(frozen=True)
class _TailStats:
    view: TailView
    mass: float
    m: tuple[float, ...]  # unnormalized EKM integrals of log^r, r = 1..3

    def moment(self, r: int, normalized: bool) -> float:
        if self.mass <= 0:
            raise DegenerateEstimateError("all top-k observations are censored")
        val = self.m[r - 1]
        return val / self.mass if normalized else val


def _tail_stats(view: TailView, max_order: int) -> _TailStats:
    w = ekm_weights(view)
    ms = tuple(
        ekm_integral(view, (lambda x, r=r: np.log(x) ** r) if r > 1 else np.log, weights=w)
        for r in range(1, max_order + 1)
    )
    return _TailStats(view, w.total_mass, ms)


def _evaluate(eid: str, st: _TailStats, normalized: bool, extra) -> float:
    if eid in extra:
        return float(extra[eid](st.view))
    name, r = _split_estimator(eid)
    view = st.view
    if name == "mhat":
        return st.moment(r, normalized)
    if name == "km_plugin":
        # the normalized Hill estimate is always used here
        return math.factorial(r) * st.moment(1, True) ** r
    if name == "hill_censored":
        return st.moment(1, normalized)
    if name == "moment_censored":
        return moment_from_log_moments(st.moment(1, normalized), st.moment(2, normalized))
    p_hat = uncensored_fraction(view)
    if name == "moment_uncensored":
        return moment_uncensored(view.ratios)
    if p_hat <= 0:
        raise DegenerateEstimateError("no uncensored observation in the tail")
    if name == "hill_benchmark":
        return classical_hill(view.ratios) / p_hat
    if name == "benchmark_plugin":
        return math.factorial(r) * (classical_hill(view.ratios) / p_hat) ** r
    if name == "moment_benchmark":
        return moment_uncensored(view.ratios) / p_hat
    raise ConfigError(f"unknown estimator {eid!r}")


def _interval_covers(spec: ExperimentSpec, eid: str, view: TailView, value: float, truth: float) -> float:
    """1.0 / 0.0 for a covering / missing interval, nan when no interval exists."""
    name = eid.partition(":")[0].replace("-", "_")
    if name not in BASE_ESTIMATORS:
        return math.nan
    est = EviEstimate(value, view.k, spec.n, name, spec.normalized)
    try:
        var = spec.fixed_variance if spec.fixed_variance is not None else asy.plugin_variance(view, est)
    except GuardError:
        return math.nan
    lo, hi = asy.confidence_interval(est, var, spec.ci_level)
    return 1.0 if lo <= truth <= hi else 0.0


def _max_order(spec: ExperimentSpec) -> int:
    order = 2
    for e in spec.estimators:
        r = _split_estimator(e)[1] if ":" in e else None
        if r:
            order = max(order, r)
    return order


def _run_rep(spec: ExperimentSpec, rep: int, extra: dict) -> _RepOutput:
    rng = replicate_stream(spec.master_seed, rep)
    sample = generate_censored(spec.f_dist, spec.g_dist, spec.n, rng)
    srt = sort_with_concomitants(sample)
    n_e, n_k = len(spec.estimators), len(spec.k_grid)
    est = np.full((n_e, n_k), np.nan)
    cov = np.full((n_e, n_k), np.nan)
    want_cov = "coverage" in spec.metrics
    truth = spec.true_gamma
    order = _max_order(spec)
    for j, k in enumerate(spec.k_grid):
        try:
            view = top_k_view(srt, k)
        except CensoredExtremesError:
            continue
        st = _tail_stats(view, order)
        for i, eid in enumerate(spec.estimators):
            try:
                val = _evaluate(eid, st, spec.normalized, extra)
            except DegenerateEstimateError:
                continue
            est[i, j] = val
            if want_cov and eid not in extra:
                cov[i, j] = _interval_covers(spec, eid, view, val, truth)
    return _RepOutput(est, cov)


def _run_chunk(args) -> list[_RepOutput]:
    spec, reps, extra = args
    return [_run_rep(spec, r, extra) for r in reps]


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    # metric -> array (n_estimators, n_k); reps_effective likewise per metric
    values: dict[str, np.ndarray]
    reps_effective: dict[str, np.ndarray]
    failure_count: np.ndarray
    metadata: dict = field(default_factory=dict)
    # per-replication estimates, shape (reps, n_estimators, n_k)
    estimates: np.ndarray | None = field(default=None, repr=False, compare=False)

    def value(self, metric: str, estimator: str, k: int) -> float:
        i = self.spec.estimators.index(estimator)
        j = self.spec.k_grid.index(k)
        return float(self.values[metric][i, j])

    def effective(self, metric: str, estimator: str, k: int) -> int:
        i = self.spec.estimators.index(estimator)
        j = self.spec.k_grid.index(k)
        return int(self.reps_effective[metric][i, j])

    def failures(self, estimator: str, k: int) -> int:
        i = self.spec.estimators.index(estimator)
        j = self.spec.k_grid.index(k)
        return int(self.failure_count[i, j])

    def rows(self) -> Iterable[tuple[str, int, str, float, int]]:
        for i, eid in enumerate(self.spec.estimators):
            for j, k in enumerate(self.spec.k_grid):
                for metric in self.spec.metrics:
                    yield eid, k, metric, float(self.values[metric][i, j]), int(self.reps_effective[metric][i, j])
                yield eid, k, "failure_count", float(self.failure_count[i, j]), self.spec.reps

    def to_csv(self, scenario: str | None = None, header: bool = True) -> str:
        buf = io.StringIO()
        prefix = f"{scenario}," if scenario is not None else ""
        if header:
            buf.write(("scenario," if scenario is not None else "") + "estimator,k,metric,value,reps_effective\n")
        for eid, k, metric, val, eff in self.rows():
            buf.write(f"{prefix}{eid},{k},{metric},{format_number(val)},{eff}\n")
        return buf.getvalue()


def format_number(x: float) -> str:
    """17 significant digits; empty for NaN (undefined metric)."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _true_variance(spec: ExperimentSpec, eid: str) -> float:
    """Asymptotic variance at the true parameters, nan when no law applies."""
    name = eid.partition(":")[0].replace("-", "_")
    fp, gp = spec.f_dist.tail_profile(), spec.g_dist.tail_profile()
    gf = spec.true_gamma
    try:
        if name in ("hill_censored",):
            return asy.hill_asymptotics(gf, gp.gamma).variance
        if name == "moment_censored":
            if gf > 0:
                return asy.moment_pos(gf, gp.gamma).variance
            if gf == 0:
                return asy.moment_zero(fp.alpha_pair(gp)).variance
            return asy.moment_neg(gf, gp.gamma).variance
    except (GuardError, CensoredExtremesError):
        return math.nan
    return math.nan


def _true_label(gamma: float) -> str:
    if gamma == 0:
        return "gumbel"
    return "frechet" if gamma > 0 else "weibull"


def _target(spec: ExperimentSpec, eid: str) -> float:
    name, r = _split_estimator(eid) if ":" in eid else (eid, None)
    if r is not None:
        return log_moment_target(spec.true_gamma, r)
    return spec.true_gamma


def _aggregate(spec: ExperimentSpec, outputs: Sequence[_RepOutput]) -> ExperimentResult:
    est = np.stack([o.estimates for o in outputs])  # (reps, e, k)
    cov = np.stack([o.covered for o in outputs])
    ok = ~np.isnan(est)
    n_ok = ok.sum(axis=0)
    values: dict[str, np.ndarray] = {}
    eff: dict[str, np.ndarray] = {}
    targets = np.array([_target(spec, e) for e in spec.estimators])[:, None]
    with np.errstate(invalid="ignore", divide="ignore"), warnings.catch_warnings():
        # all-NaN columns are expected when every rep fails; they become NaN below
        warnings.simplefilter("ignore", RuntimeWarning)
        err = est - targets[None]
        for metric in spec.metrics:
            if metric == "mse":
                values[metric] = np.nanmean(np.where(ok, err**2, np.nan), axis=0)
                eff[metric] = n_ok
            elif metric == "bias":
                values[metric] = np.nanmean(err, axis=0)
                eff[metric] = n_ok
            elif metric == "classification":
                truth = _true_label(spec.true_gamma)
                radius = spec.classification_radius
                wrong = np.full(est.shape, np.nan)
                wrong[ok] = [float(classify_mda(g, radius) != truth) for g in est[ok]]
                values[metric] = np.nanmean(wrong, axis=0)
                eff[metric] = n_ok
            elif metric == "coverage":
                has = ~np.isnan(cov)
                values[metric] = np.nanmean(cov, axis=0)
                eff[metric] = has.sum(axis=0)
            elif metric == "sd_gap":
                sd = np.nanstd(est, axis=0, ddof=1)
                k = np.asarray(spec.k_grid, dtype=float)[None, :]
                tv = np.array([_true_variance(spec, e) for e in spec.estimators])[:, None]
                values[metric] = sd - np.sqrt(tv / k)
                eff[metric] = n_ok
    usable = ok.copy()
    if "coverage" in spec.metrics:
        usable &= ~np.isnan(cov)
    for metric in spec.metrics:
        values[metric] = np.where(eff[metric] > 0, values[metric], np.nan)
    meta = {"spec_hash": spec.spec_hash(), "master_seed": spec.master_seed, "reps": spec.reps}
    return ExperimentResult(spec, values, eff, spec.reps - usable.sum(axis=0), meta, est)


def run_experiment(
    spec: ExperimentSpec,
    workers: int = 1,
    extra_estimators: dict[str, Callable[[TailView], float]] | None = None,
) -> ExperimentResult:
    """Run every replication and reduce to per-(estimator, k) metrics.

    ``extra_estimators`` maps ``custom.<name>`` ids listed in
    ``spec.estimators`` to callables on a tail view; they must be picklable
    when ``workers > 1``.
    """
    extra = dict(extra_estimators or {})
    for e in extra:
        if not e.startswith(CUSTOM_PREFIX):
            raise ConfigError(f"extra estimator ids must start with {CUSTOM_PREFIX!r}")
    for e in spec.estimators:
        if e.startswith(CUSTOM_PREFIX) and e not in extra:
            raise ConfigError(f"no callable supplied for {e!r}")
    reps = list(range(spec.reps))
    if workers <= 1 or spec.reps < 2:
        outputs = [_run_rep(spec, r, extra) for r in reps]
    else:
        workers = min(workers, spec.reps)
        chunks = [reps[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(spec, c, extra) for c in chunks]))
        outputs = [None] * spec.reps
        for chunk, res in zip(chunks, parts):
            for r, o in zip(chunk, res):
                outputs[r] = o
    return _aggregate(spec, outputs)


def _with_metrics(spec: ExperimentSpec, required: tuple[str, ...]) -> ExperimentSpec:
    metrics = tuple(dict.fromkeys(spec.metrics + required))
    if metrics == spec.metrics:
        return spec
    return ExperimentSpec(**{**spec.__dict__, "metrics": metrics})


def run_mse_experiment(spec: ExperimentSpec, workers: int = 1, extra_estimators=None) -> ExperimentResult:
    return run_experiment(_with_metrics(spec, ("mse",)), workers, extra_estimators)


def run_classification_experiment(spec: ExperimentSpec, workers: int = 1, extra_estimators=None) -> ExperimentResult:
    for e in spec.estimators:
        if (extra_estimators and e in extra_estimators) or e.replace("-", "_") in (
            "moment_censored", "moment_benchmark", "moment_uncensored"
        ):
            continue
        raise ConfigError(f"classification needs moment-type estimators, got {e!r}")
    return run_experiment(_with_metrics(spec, ("classification",)), workers, extra_estimators)


def run_coverage_experiment(spec: ExperimentSpec, workers: int = 1, extra_estimators=None) -> ExperimentResult:
    return run_experiment(_with_metrics(spec, ("coverage", "sd_gap")), workers, extra_estimators)


# ---------------------------------------------------------------------------
# presets


def censoring_index_for(gamma_f: float, p: float) -> float:
    """Censoring index giving asymptotic non-censoring proportion p: p gamma_F / (1 - p)."""
    if not 0 < p < 1:
        raise ConfigError("non-censoring proportion must lie in (0, 1)")
    return p * gamma_f / (1.0 - p)


def _fig1(desk: bool) -> list[ExperimentSpec]:
    n = 1000
    reps = 200 if desk else 1000
    grid = tuple(range(5, n // 2 + 1, 5 if desk else 1))
    estimators = tuple(f"{e}:{r}" for r in (1, 2, 3) for e in ORDERED_ESTIMATORS)
    gf = 0.5
    out = []
    for fam in ("burr", "frechet"):
        for p in (0.6, 0.75, 0.9):
            gg = censoring_index_for(gf, p)
            if fam == "burr":
                c = math.sqrt(1 / gf)
                cg = math.sqrt(1 / gg)
                f, g = Burr(c, c), Burr(cg, cg)
            else:
                f, g = Frechet(1 / gf), Frechet(1 / gg)
            out.append(ExperimentSpec(f, g, n, reps, grid, estimators, ("mse",),
                                      name=f"{fam}_{round(p * 100)}"))
    return out


def _fig23_scenarios(which: str):
    if which == "fig2":
        return [
            ("a_beta", Beta(1, 2), Beta(1, 2)),
            ("b_burr", Burr(math.sqrt(2), math.sqrt(2)), Burr(1 / math.sqrt(3), 1 / math.sqrt(3))),
            ("c_weibull", Weibull(1, 1), Weibull(0.5, 1)),
        ]
    return [
        ("a_beta", Beta(1, 2), Beta(1, 2)),
        ("b_pareto", Pareto(2), Pareto(2 / 3)),
        ("c_exp", Exponential(6), Exponential(1)),
    ]


def _fig23(which: str, desk: bool) -> list[ExperimentSpec]:
    reps = 200 if desk else 1000
    sizes = (1000,) if desk else (1000, 10000)
    if which == "fig2":
        estimators, metrics = ("moment_censored", "moment_benchmark"), ("mse", "classification")
    else:
        estimators, metrics = ("moment_censored",), ("coverage", "sd_gap")
    out = []
    for n in sizes:
        step = max(1, n // 200) if desk else max(1, n // 1000)
        grid = tuple(range(max(5, step), n // 2 + 1, step))
        for label, f, g in _fig23_scenarios(which):
            out.append(ExperimentSpec(f, g, n, reps, grid, estimators, metrics, name=f"{label}_n{n}"))
    return out


PRESETS = ("fig1", "fig2", "fig3")


def preset(name: str, desk_scale: bool = True, master_seed: int | None = None) -> list[ExperimentSpec]:
    """Scenario list of one of the three simulation studies."""
    if name == "fig1":
        specs = _fig1(desk_scale)
    elif name in ("fig2", "fig3"):
        specs = _fig23(name, desk_scale)
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    if master_seed is not None:
        specs = [ExperimentSpec(**{**s.__dict__, "master_seed": master_seed}) for s in specs]
    return specs
