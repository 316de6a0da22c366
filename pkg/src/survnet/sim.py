"""Synthetic right-censored survival data from logit-hazard mixtures.

Event times are drawn step by step from a per-step hazard on a fine grid of
1000 equidistant times on (0, 100]. The logit hazard of each individual mixes
a sinusoidal, a constant and an accelerating component; the mixture weights
and component parameters are driven by nine latent scores. The observed
covariates are a redundant linear encoding of those scores (five covariates
per score, 45 in total), built so that the score is recovered exactly by a
fixed linear map. Random censoring draws from a constant per-step hazard;
anyone still event-free at the end of the grid is censored there. The exact
survival curves are returned next to the data, enabling error measurement
against the truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SurvivalDataset
from .errors import SchemaError, ValidationError
from .losses import sigmoid

N_STEPS = 1000
T_MAX = 100.0
N_LATENT = 9
DEFAULT_SUBSET = 5

# Constant per-step censoring probability calibrated by bisection so that the
# overall censored fraction is 0.37 at large n (includes end-of-grid
# censoring). See calibrate_censor_hazard.
DEFAULT_CENSOR_HAZARD = 0.00016113281249999998

_ROW_CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    n: int
    seed: int = 0
    censor_hazard: float = DEFAULT_CENSOR_HAZARD
    design_seed: int = 0
    n_steps: int = N_STEPS
    t_max: float = T_MAX
    subset_size: int = DEFAULT_SUBSET

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if not 0.0 <= self.censor_hazard < 1.0:
            raise ValidationError("censor_hazard must lie in [0, 1)")
        if self.n_steps < 1 or self.t_max <= 0:
            raise ValidationError("the fine grid needs n_steps >= 1 and t_max > 0")
        if self.subset_size < 1:
            raise ValidationError("subset_size must be at least 1")


def fine_times(n_steps: int = N_STEPS, t_max: float = T_MAX) -> np.ndarray:
    """The fine grid t_max/n_steps, 2*t_max/n_steps, ..., t_max."""
    return np.linspace(t_max / n_steps, t_max, n_steps)


@dataclass(frozen=True)
class GammaSet:
    """Hazard-shape parameters, one row of nine per individual."""

    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.atleast_2d(np.asarray(self.gamma, dtype=float))
        if gamma.shape[1] != N_LATENT:
            raise ValidationError(f"gamma needs {N_LATENT} columns")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def alpha(self) -> np.ndarray:
        """Softmax mixture weights from the last three parameters."""
        g = self.gamma[:, 6:9]
        e = np.exp(g - g.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class LatentDesign:
    """Latent scores, shared encoding coefficients and encoded covariates."""

    latent: np.ndarray
    coef: np.ndarray
    covariates: np.ndarray


@dataclass(frozen=True)
class SimResult:
    data: SurvivalDataset
    truth: np.ndarray
    times: np.ndarray
    design: LatentDesign
    gammas: GammaSet

    @property
    def censored_fraction(self) -> float:
        return float(1.0 - self.data.events.mean())


def gammas_from_latent(latent) -> GammaSet:
    """Map latent scores in [-1, 1] to the nine hazard-shape parameters."""
    x = np.atleast_2d(np.asarray(latent, dtype=float))
    if x.shape[1] != N_LATENT:
        raise ValidationError(f"latent needs {N_LATENT} columns")
    g = np.empty_like(x)
    g[:, 0] = 5.0 * x[:, 0]
    g[:, 1] = (2.0 * np.pi / 100.0) * 2.0 ** np.floor(2.5 * (x[:, 1] + 1.0) - 1.0)
    g[:, 2] = 15.0 * x[:, 2]
    g[:, 3] = 2.0 * x[:, 3] - 6.0 - np.abs(g[:, 0])
    g[:, 4] = 2.5 * (x[:, 4] + 1.0) - 8.0
    g[:, 5] = sigmoid(3.0 * (x[:, 5] + 1.0) - 5.0)
    g[:, 6] = 5.0 * (x[:, 6] + 0.6)
    g[:, 7] = 5.0 * x[:, 7]
    g[:, 8] = 5.0 * x[:, 8]
    return GammaSet(g)


def logit_hazard(gammas: GammaSet, t):
    """Mixture logit hazard at time(s) t, one row per individual.

    The three components are a sine wave, a constant and a ramp that falls
    from -10 at time zero; the softmax weights blend them.
    """
    g = gammas.gamma
    a = gammas.alpha
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))[None, :]
    g_sin = g[:, [0]] * np.sin(g[:, [1]] * (t_arr + g[:, [2]])) + g[:, [3]]
    g_con = g[:, [4]]
    g_acc = g[:, [5]] * t_arr - 10.0
    out = a[:, [0]] * g_sin + a[:, [1]] * g_con + a[:, [2]] * g_acc
    return out[:, 0] if np.ndim(t) == 0 else out


def hazard(gammas: GammaSet, t):
    """Per-step event probability: the logistic of the logit hazard."""
    return sigmoid(logit_hazard(gammas, t))


def true_survival(gammas: GammaSet, times=None) -> np.ndarray:
    """Exact survival at every fine-grid time: running product of (1 - hazard)."""
    if times is None:
        times = fine_times()
    return np.cumprod(1.0 - hazard(gammas, np.asarray(times, dtype=float)), axis=1)


def design_coefficients(design_seed: int, subset_size: int = DEFAULT_SUBSET) -> np.ndarray:
    """Standard-normal encoding coefficients, fixed by the design seed.

    Datasets generated with different draw seeds but the same design seed share
    this map, so train and test sets describe the same covariate relationship.
    """
    rng = np.random.default_rng(np.random.SeedSequence(design_seed))
    return rng.standard_normal((N_LATENT, subset_size))


def _encode_covariates(latent, coef, u):
    """Spread each latent score over its covariate subset.

    The running partial sums of covariate * coefficient are forced to be the
    uniform draws u, so every subset satisfies covariates @ coef == score
    exactly up to rounding.
    """
    n, q = latent.shape
    s = coef.shape[1]
    x = np.empty((n, q, s))
    if s == 1:
        x[:, :, 0] = latent / coef[None, :, 0]
    else:
        x[:, :, 0] = (latent - u[:, :, 0]) / coef[None, :, 0]
        for k in range(1, s - 1):
            x[:, :, k] = (u[:, :, k - 1] - u[:, :, k]) / coef[None, :, k]
        x[:, :, s - 1] = u[:, :, s - 2] / coef[None, :, s - 1]
    return x.reshape(n, q * s)


def generate_dataset(cfg: SimConfig) -> SimResult:
    """Draw a dataset plus its exact survival curves.

    Covariates, event draws and censoring draws use three independent streams
    spawned from the seed, so switching the censoring hazard leaves the event
    times untouched. Ties between an event and a censoring at the same step
    are observed as the event.
    """
    cov_ss, event_ss, cens_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    cov_rng = np.random.default_rng(cov_ss)
    event_rng = np.random.default_rng(event_ss)
    cens_rng = np.random.default_rng(cens_ss)

    coef = design_coefficients(cfg.design_seed, cfg.subset_size)
    latent = cov_rng.uniform(-1.0, 1.0, size=(cfg.n, N_LATENT))
    u = cov_rng.uniform(-1.0, 1.0, size=(cfg.n, N_LATENT, max(cfg.subset_size - 1, 0)))
    covariates = _encode_covariates(latent, coef, u)
    gammas = gammas_from_latent(latent)
    times = fine_times(cfg.n_steps, cfg.t_max)

    durations = np.empty(cfg.n)
    events = np.empty(cfg.n, dtype=int)
    truth = np.empty((cfg.n, cfg.n_steps))
    for lo in range(0, cfg.n, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, cfg.n)
        h = hazard(GammaSet(gammas.gamma[lo:hi]), times)
        truth[lo:hi] = np.cumprod(1.0 - h, axis=1)
        event_hits = event_rng.random(h.shape) < h
        has_event = event_hits.any(axis=1)
        t_event = np.where(has_event, times[event_hits.argmax(axis=1)], np.inf)
        cens_hits = cens_rng.random(h.shape) < cfg.censor_hazard
        has_cens = cens_hits.any(axis=1)
        t_cens = np.where(has_cens, times[cens_hits.argmax(axis=1)], np.inf)
        t_cens = np.minimum(t_cens, cfg.t_max)
        durations[lo:hi] = np.minimum(t_event, t_cens)
        events[lo:hi] = (t_event <= t_cens).astype(int)

    data = SurvivalDataset(durations, events, covariates)
    design = LatentDesign(latent, coef, covariates)
    return SimResult(data, truth, times, design, gammas)


def write_truth_csv(path, times, truth) -> None:
    """One row of survival values per individual; the header holds the times."""
    times = np.asarray(times, dtype=float)
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if truth.shape[1] != times.shape[0]:
        raise ValidationError("truth must have one column per time")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(repr(float(t)) for t in times) + "\n")
        for row in truth:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_truth_csv(path):
    """Inverse of write_truth_csv: (times, survival matrix)."""
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if not header:
            raise SchemaError(f"{path}: empty truth file")
        times = np.array([float(v) for v in header.split(",")])
        rows = [
            [float(v) for v in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    if not rows:
        raise SchemaError(f"{path}: truth file has no data rows")
    truth = np.asarray(rows, dtype=float)
    if truth.shape[1] != times.shape[0]:
        raise SchemaError(f"{path}: truth rows disagree with the header length")
    return times, truth


def calibrate_censor_hazard(
    target: float = 0.37, n: int = 100_000, seed: int = 12345, tol: float = 1e-3
) -> float:
    """Bisection for the per-step censoring hazard hitting a censored fraction.

    Used once to fix DEFAULT_CENSOR_HAZARD; kept for reproducibility.
    """
    def fraction(c: float) -> float:
        cfg = SimConfig(n=n, seed=seed, censor_hazard=c)
        return generate_dataset(cfg).censored_fraction

    lo, hi = 0.0, 0.01
    if fraction(lo) > target:
        return lo
    while fraction(hi) < target:
        hi *= 2
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        frac = fraction(mid)
        if abs(frac - target) < tol:
            return mid
        if frac < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
