"""Survival curves evaluable at arbitrary times.

A curve stores the survival values at the grid cuts for one or more
individuals sharing a grid; the kind decides how values are read between the
cuts: as a right-continuous step function, linearly in survival (constant
density per interval), linearly in cumulative hazard (constant hazard per
interval), or from per-interval hazard masses for the piecewise-exponential
form. All kinds extend beyond the last cut by the value there.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import ValidationError
from .grid import TimeGrid, locate_times
from .losses import sigmoid

KINDS = ("step", "cdi", "chi", "pc-hazard")

# Survival values are floored here before taking logs for the constant-hazard
# scheme, keeping cumulative hazards finite.
SURVIVAL_FLOOR = 1e-12


class SurvivalCurve:
    """Survival estimates on a shared grid for a batch of individuals.

    ``values[i, j]`` is the estimate at cut j+1 for individual i; survival at
    time 0 is 1 by definition. A single 1-d vector of values is accepted and
    treated as a batch of one.
    """

    def __init__(self, grid: TimeGrid, values, kind: str = "step", eta=None):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[1] != grid.m:
            raise ValidationError(
                f"values have {values.shape[1]} columns, grid has {grid.m} intervals"
            )
        if np.any(values < -1e-9) or np.any(values > 1 + 1e-9):
            raise ValidationError("survival values must lie in [0, 1]")
        if np.any(np.diff(values, axis=1) > 1e-9):
            raise ValidationError("survival values must be non-increasing")
        values = np.clip(values, 0.0, 1.0)
        if kind not in KINDS:
            raise ValidationError(f"unknown curve kind {kind!r}")
        if kind == "pc-hazard":
            if eta is None:
                raise ValidationError("pc-hazard curves need per-interval hazard masses")
            eta = np.atleast_2d(np.asarray(eta, dtype=float))
            if eta.shape != values.shape:
                raise ValidationError("eta shape must match values")
            if np.any(eta < 0):
                raise ValidationError("hazard masses must be nonnegative")
            implied = np.exp(-np.cumsum(eta, axis=1))
            if np.max(np.abs(implied - values)) > 1e-12:
                raise ValidationError("values inconsistent with the hazard masses")
            eta.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.kind = kind
        self.eta = eta

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def with_kind(self, kind: str) -> "SurvivalCurve":
        """Same discrete values, read with a different scheme between cuts."""
        if kind == "pc-hazard" and self.eta is None:
            raise ValidationError("cannot reinterpret as pc-hazard without hazard masses")
        return SurvivalCurve(self.grid, self.values, kind, self.eta)

    def evaluate(self, times):
        """Survival at the given time(s): shape (n,) for a scalar, (n, T) else."""
        scalar = np.ndim(times) == 0
        ts = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(ts < 0):
            raise ValidationError("evaluation times must be nonnegative")
        full = np.concatenate([np.ones((self.n, 1)), self.values], axis=1)
        if self.kind == "step":
            j = np.searchsorted(self.grid.cuts, ts, side="right") - 1
            out = full[:, np.clip(j, 0, self.grid.m)]
        elif self.kind == "cdi":
            k, rho = locate_times(ts, self.grid)
            out = full[:, k - 1] * (1.0 - rho) + full[:, k] * rho
        elif self.kind == "chi":
            k, rho = locate_times(ts, self.grid)
            hazard_cum = -np.log(np.maximum(full, SURVIVAL_FLOOR))
            out = np.exp(-(hazard_cum[:, k - 1] * (1.0 - rho) + hazard_cum[:, k] * rho))
        else:
            k, rho = locate_times(ts, self.grid)
            base = np.concatenate(
                [np.zeros((self.n, 1)), np.cumsum(self.eta, axis=1)], axis=1
            )
            out = np.exp(-(base[:, k - 1] + self.eta[:, k - 1] * rho))
        return out[:, 0] if scalar else out

    def __call__(self, times):
        return self.evaluate(times)

    def __repr__(self) -> str:
        return f"SurvivalCurve(kind={self.kind!r}, n={self.n}, m={self.grid.m})"


def surv_from_hazard(hazards, grid: TimeGrid) -> SurvivalCurve:
    """Step curve from per-interval conditional event probabilities."""
    hazards = np.atleast_2d(np.asarray(hazards, dtype=float))
    if np.any(hazards < 0) or np.any(hazards > 1):
        raise ValidationError("hazards must lie in [0, 1]")
    values = np.cumprod(1.0 - hazards, axis=1)
    return SurvivalCurve(grid, values, "step")


def pmf_probs(logits):
    """Softmax class probabilities with an implicit final logit fixed at 0.

    Returns one probability per interval plus the survive-past-the-grid class
    as the last column.
    """
    logits = np.atleast_2d(np.asarray(logits, dtype=float))
    padded = np.concatenate([logits, np.zeros((logits.shape[0], 1))], axis=1)
    padded = padded - padded.max(axis=1, keepdims=True)
    e = np.exp(padded)
    return e / e.sum(axis=1, keepdims=True)


def surv_from_pmf(logits, grid: TimeGrid) -> SurvivalCurve:
    """Step curve from softmax logits: survival is the summed probability tail."""
    probs = pmf_probs(logits)
    if probs.shape[1] != grid.m + 1:
        raise ValidationError(
            f"logits have {probs.shape[1] - 1} columns, grid has {grid.m} intervals"
        )
    tail = np.flip(np.cumsum(np.flip(probs, axis=1), axis=1), axis=1)
    return SurvivalCurve(grid, tail[:, 1:], "step")


def pc_hazard_curve(eta, grid: TimeGrid) -> SurvivalCurve:
    """Piecewise-exponential curve from per-interval hazard masses."""
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    if np.any(eta < 0):
        raise ValidationError("hazard masses must be nonnegative")
    values = np.exp(-np.cumsum(eta, axis=1))
    return SurvivalCurve(grid, values, "pc-hazard", eta=eta)


def surv_pc_hazard(eta, grid: TimeGrid, t):
    """Piecewise-exponential survival at time t; a float for a single row."""
    eta_arr = np.asarray(eta, dtype=float)
    out = pc_hazard_curve(eta_arr, grid).evaluate(t)
    if eta_arr.ndim == 1 and np.ndim(t) == 0:
        return float(out[0])
    return out


def interpolate(curve: SurvivalCurve, scheme: str, times):
    """Evaluate a discrete curve between its cuts with the given scheme."""
    if scheme not in ("cdi", "chi"):
        raise ValidationError(f"interpolation scheme must be 'cdi' or 'chi', got {scheme!r}")
    return curve.with_kind(scheme).evaluate(times)


def hazard_from_logits(logits):
    """Discrete hazards from logits, the inverse link of the hazard method."""
    return sigmoid(logits)


def cdi_hazard(curve: SurvivalCurve, times):
    """Continuous hazard rate implied by the constant-density reading.

    Within interval j the density is the per-time drop of the survival values
    and the hazard is density over interpolated survival, which grows through
    the interval. Times are clamped to the grid range.
    """
    ts = np.clip(np.atleast_1d(np.asarray(times, dtype=float)), 0.0, curve.grid.t_max)
    k, _ = locate_times(ts, curve.grid)
    full = np.concatenate([np.ones((curve.n, 1)), curve.values], axis=1)
    deltas = curve.grid.deltas
    cuts = curve.grid.cuts
    beta = (full[:, k - 1] - full[:, k]) / deltas[k - 1]
    alpha = (full[:, k - 1] * cuts[k] - full[:, k] * cuts[k - 1]) / deltas[k - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = beta / (alpha - beta * ts[None, :])
    return out[:, 0] if np.ndim(times) == 0 else out


def write_curves_csv(path, times, values) -> None:
    """Rows of (time, survival per individual), one column per curve."""
    times = np.asarray(times, dtype=float)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != times.shape[0]:
        raise ValidationError("values must have one column per evaluation time")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *(f"s{i}" for i in range(values.shape[0]))])
        for q, t in enumerate(times):
            writer.writerow([repr(float(t)), *(repr(float(v)) for v in values[:, q])])
