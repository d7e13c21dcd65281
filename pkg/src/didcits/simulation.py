"""Data-generating processes and Monte Carlo bias/coverage studies.

Replication seeds
-----------------
Rep ``i`` of a study with ``base_seed`` draws its panel from
``numpy.random.default_rng(rep_seed(base_seed, i))``, where ``rep_seed``
takes the first 64-bit word of ``SeedSequence(base_seed, spawn_key=(i,))``.
The mapping depends only on ``(base_seed, i)``, so reps can run in any order
or in parallel and still aggregate to the same summary.
"""

from __future__ import annotations

import dataclasses
import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .estimators import estimate
from .panel import ConfigurationError, Design, DesignSpec, PanelDataset

__all__ = [
    "DgpKind",
    "DgpSpec",
    "DesignMc",
    "McSummary",
    "generate_panel",
    "untreated_mean",
    "true_att",
    "monte_carlo",
    "rep_seed",
]


class DgpKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    PARALLEL_LINEAR = "parallel"
    DIVERGING_LINEAR = "diverging"
    LINEAR_CITS_TRUTH = "linear-cits"

    @classmethod
    def parse(cls, value: "DgpKind | str") -> "DgpKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "quadraticfigure1": cls.QUADRATIC,
            "parallellinear": cls.PARALLEL_LINEAR,
            "parallel-linear": cls.PARALLEL_LINEAR,
            "diverginglinear": cls.DIVERGING_LINEAR,
            "diverging-linear": cls.DIVERGING_LINEAR,
            "linearcitstruth": cls.LINEAR_CITS_TRUTH,
            "linear-cits-truth": cls.LINEAR_CITS_TRUTH,
        }
        try:
            return cls(key)
        except ValueError:
            if key in aliases or key.replace("-", "") in aliases:
                return aliases.get(key) or aliases[key.replace("-", "")]
            raise ConfigurationError(f"unknown DGP kind {value!r}") from None


@dataclass(frozen=True)
class DgpSpec:
    """Two-group panel generator.

    Untreated group means by ``kind``:

    * ``quadratic``: comparison ``(t/2)**2``, treated ``(t/3)**2``; no effect.
    * ``parallel``: ``level + slope*t``, treated shifted by ``group_gap``.
    * ``diverging``: as ``parallel`` with an extra treated slope ``trend_gap``.
    * ``linear-cits``: ``level + slope*s + (post_shift + post_slope_shift*s)*post``
      with ``s = t - t0``; treated adds ``group_gap + trend_gap*s``.

    The treated post-period outcome adds :func:`true_att`. Every unit is
    observed once per time point with i.i.d. Gaussian noise of sd
    ``noise_sd``.
    """

    kind: DgpKind | str = DgpKind.QUADRATIC
    times: tuple[float, ...] = tuple(range(1, 11))
    t0: float = 6
    units_per_group: int = 1
    noise_sd: float = 0.0
    tau: float = 0.0
    tau_series: Mapping[float, float] | None = None
    tau0: float = 0.0
    tau1: float = 0.0
    seed: int = 0
    level: float = 10.0
    slope: float = 1.0
    group_gap: float = 2.0
    trend_gap: float = 0.5
    post_shift: float = 1.0
    post_slope_shift: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "kind", DgpKind.parse(self.kind))
        times = tuple(self.times)
        object.__setattr__(self, "times", times)
        if len(times) < 2 or any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("time grid must be strictly increasing with ≥2 points")
        if not (times[0] < self.t0 <= times[-1]):
            raise ConfigurationError(f"t0={self.t0} outside time grid")
        if self.units_per_group < 1:
            raise ConfigurationError("units_per_group must be ≥ 1")
        if self.noise_sd < 0:
            raise ConfigurationError("noise_sd must be ≥ 0")

    def with_seed(self, seed: int) -> "DgpSpec":
        return dataclasses.replace(self, seed=int(seed))

    @property
    def post_times(self) -> list:
        return [t for t in self.times if t >= self.t0]


def untreated_mean(dgp: DgpSpec, group: int, t: float) -> float:
    t = float(t)
    kind = dgp.kind
    if kind is DgpKind.QUADRATIC:
        return (t / 3.0) ** 2 if group == 1 else (t / 2.0) ** 2
    if kind is DgpKind.PARALLEL_LINEAR:
        return dgp.level + dgp.slope * t + dgp.group_gap * group
    if kind is DgpKind.DIVERGING_LINEAR:
        return dgp.level + dgp.slope * t + group * (dgp.group_gap + dgp.trend_gap * t)
    s = t - float(dgp.t0)
    post = 1.0 if t >= dgp.t0 else 0.0
    base = dgp.level + dgp.slope * s + (dgp.post_shift + dgp.post_slope_shift * s) * post
    return base + group * (dgp.group_gap + dgp.trend_gap * s)


def true_att(dgp: DgpSpec, t: float) -> float:
    """Treatment effect on the treated at post time ``t``."""
    if t < dgp.t0:
        raise ConfigurationError(f"true ATT is defined for post-period times only; got t={t}")
    if dgp.kind is DgpKind.QUADRATIC:
        return 0.0
    if dgp.kind is DgpKind.LINEAR_CITS_TRUTH:
        return dgp.tau0 + dgp.tau1 * (float(t) - float(dgp.t0))
    if dgp.tau_series is not None:
        return float(dgp.tau_series[t])
    return float(dgp.tau)


def generate_panel(dgp: DgpSpec) -> PanelDataset:
    """Draw one balanced panel; identical ``dgp`` (seed included) gives identical data."""
    rng = np.random.default_rng(dgp.seed)
    units, groups, times, means = [], [], [], []
    for g, prefix in ((0, "c"), (1, "t")):
        for u in range(dgp.units_per_group):
            for t in dgp.times:
                mu = untreated_mean(dgp, g, t)
                if g == 1 and t >= dgp.t0:
                    mu += true_att(dgp, t)
                units.append(f"{prefix}{u}")
                groups.append(g)
                times.append(t)
                means.append(mu)
    y = np.asarray(means, dtype=float)
    if dgp.noise_sd > 0:
        y = y + rng.normal(0.0, dgp.noise_sd, size=y.shape[0])
    return PanelDataset.from_arrays(units, groups, times, y)


def rep_seed(base_seed: int, rep: int) -> int:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(rep),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(eq=False)
class DesignMc:
    design: str
    bias: dict
    rmse: dict
    coverage: dict
    rejection_rate: dict
    mc_se: dict
    n_failed: int = 0
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def flat(d):
            return [[_plain(t), v] for t, v in d.items()]

        return {
            "design": self.design,
            "bias": flat(self.bias),
            "rmse": flat(self.rmse),
            "coverage": flat(self.coverage),
            "rejection_rate": flat(self.rejection_rate),
            "mc_se": flat(self.mc_se),
            "n_failed": self.n_failed,
            "errors": list(self.errors),
        }


@dataclass(eq=False)
class McSummary:
    """Per-design Monte Carlo results keyed by post time.

    ``bias`` is the mean of ATT-hat minus truth; ``coverage`` the share of
    intervals containing the truth; ``rejection_rate`` the share of
    intervals excluding zero (the null rejection rate when the truth is 0);
    ``mc_se`` the Monte Carlo standard error of the bias.
    """

    reps: int
    base_seed: int
    dgp: DgpSpec
    true_att: dict
    designs: dict[str, DesignMc]

    def to_dict(self) -> dict:
        return {
            "reps": self.reps,
            "base_seed": self.base_seed,
            "dgp": _dgp_dict(self.dgp),
            "true_att": [[_plain(t), v] for t, v in self.true_att.items()],
            "designs": {k: v.to_dict() for k, v in self.designs.items()},
        }


def _plain(v):
    return v.item() if isinstance(v, np.generic) else v


def _dgp_dict(dgp: DgpSpec) -> dict:
    out = {}
    for f in dataclasses.fields(dgp):
        v = getattr(dgp, f.name)
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, tuple):
            v = [_plain(x) for x in v]
        elif isinstance(v, Mapping):
            v = [[_plain(k), x] for k, x in v.items()]
        out[f.name] = _plain(v)
    return out


def _mc_specs(dgp: DgpSpec, specs: Sequence[DesignSpec | str | Design]) -> list[DesignSpec]:
    out = []
    for s in specs:
        if isinstance(s, DesignSpec):
            out.append(s)
        else:
            out.append(DesignSpec(design=s, t0=dgp.t0))
    return out


def monte_carlo(
    dgp: DgpSpec,
    specs: Sequence[DesignSpec | str | Design],
    reps: int,
    base_seed: int = 0,
    *,
    max_workers: int | None = None,
) -> McSummary:
    """Repeat generate-and-estimate ``reps`` times and summarize each design.

    A design that raises on a rep is counted in ``n_failed`` and excluded
    from that design's statistics; other designs and reps continue.
    """
    if reps < 1:
        raise ConfigurationError("reps must be ≥ 1")
    specs = _mc_specs(dgp, specs)
    post = dgp.post_times
    truth = np.array([true_att(dgp, t) for t in post])
    keys = []
    for s in specs:
        key = s.design.value
        while key in keys:
            key += "'"
        keys.append(key)

    def one_rep(i: int):
        panel = generate_panel(dgp.with_seed(rep_seed(base_seed, i)))
        rows = []
        for spec in specs:
            try:
                res = estimate(panel, spec)
            except (ConfigurationError, ValueError) as exc:
                rows.append(f"rep {i}: {type(exc).__name__}: {exc}")
                continue
            est = {e.time: e for e in res.att}
            rows.append(
                np.array([[est[t].point, est[t].ci_low, est[t].ci_high] for t in post])
            )
        return rows

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_rep = list(pool.map(one_rep, range(reps)))
    else:
        per_rep = [one_rep(i) for i in range(reps)]

    designs = {}
    for j, key in enumerate(keys):
        ok = [r[j] for r in per_rep if not isinstance(r[j], str)]
        errors = [r[j] for r in per_rep if isinstance(r[j], str)]
        if ok:
            arr = np.stack(ok)  # reps x post x (point, lo, hi)
            err = arr[:, :, 0] - truth
            bias = err.mean(axis=0)
            rmse = np.sqrt((err**2).mean(axis=0))
            cover = ((arr[:, :, 1] <= truth) & (truth <= arr[:, :, 2])).mean(axis=0)
            reject = ((arr[:, :, 1] > 0) | (arr[:, :, 2] < 0)).mean(axis=0)
            sd = err.std(axis=0, ddof=1) if len(ok) > 1 else np.full(len(post), np.nan)
            mcse = sd / np.sqrt(len(ok))
        else:
            bias = rmse = cover = reject = mcse = np.full(len(post), np.nan)
        designs[key] = DesignMc(
            design=key,
            bias=dict(zip(post, bias.tolist())),
            rmse=dict(zip(post, rmse.tolist())),
            coverage=dict(zip(post, cover.tolist())),
            rejection_rate=dict(zip(post, reject.tolist())),
            mc_se=dict(zip(post, mcse.tolist())),
            n_failed=len(errors),
            errors=errors[:20],
        )
    return McSummary(reps, base_seed, dgp, dict(zip(post, truth.tolist())), designs)
