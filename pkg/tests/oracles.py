"""Independent brute-force reference implementations used by the tests.

Everything here is deliberately slow and direct: plain loops, exact rational
arithmetic where it matters, and no code shared with the library under test.
"""

from fractions import Fraction

import numpy as np


def km_product_limit(durations, events):
    """O(n^2) product-limit estimate in exact rational arithmetic.

    Returns (drop_times, survival_after_each_drop) as lists; survival values
    are Fractions.
    """
    durations = list(map(float, durations))
    events = list(map(int, events))
    drop_times = sorted({t for t, e in zip(durations, events) if e == 1})
    surv = []
    s = Fraction(1)
    for t in drop_times:
        at_risk = sum(1 for d in durations if d >= t)
        deaths = sum(1 for d, e in zip(durations, events) if d == t and e == 1)
        s *= Fraction(at_risk - deaths, at_risk)
        surv.append(s)
    return drop_times, surv


def km_survival_at(durations, events, t):
    """Step evaluation of the rational product-limit estimate."""
    drop_times, surv = km_product_limit(durations, events)
    value = Fraction(1)
    for dt, s in zip(drop_times, surv):
        if dt <= t:
            value = s
        else:
            break
    return value


def km_quantile_search(durations, events, m):
    """Quantile grid by linear search over the rational estimate.

    Levels step down evenly from 1 to the estimate at the largest duration;
    each interior cut is the smallest drop time at or below its level, the
    last cut is the largest duration, duplicates collapse.
    """
    drop_times, surv = km_product_limit(durations, events)
    t_max = max(durations)
    s_end = km_survival_at(durations, events, t_max)
    cuts = [0.0]
    for j in range(1, m):
        level = 1 - Fraction(j, m) * (1 - s_end)
        chosen = drop_times[-1]
        for dt, s in zip(drop_times, surv):
            if s <= level:
                chosen = dt
                break
        cuts.append(float(chosen))
    cuts.append(float(t_max))
    out = sorted(set(cuts))
    return out


def concordance_pairs(surv_at, durations, events):
    """Exhaustive pair enumeration of the time-dependent concordance.

    surv_at(i, t) must return the predicted survival of individual i at t.
    """
    n = len(durations)
    concordant = 0.0
    comparable = 0
    for i in range(n):
        if events[i] != 1:
            continue
        for j in range(n):
            if j == i:
                continue
            is_pair = durations[j] > durations[i] or (
                durations[j] == durations[i] and events[j] == 0
            )
            if not is_pair:
                continue
            comparable += 1
            si = surv_at(i, durations[i])
            sj = surv_at(j, durations[i])
            if sj > si:
                concordant += 1.0
            elif sj == si:
                concordant += 0.5
    if comparable == 0:
        raise ZeroDivisionError("no comparable pairs")
    return concordant / comparable


def brier_direct(surv_at, durations, events, times, g_before, g_at):
    """Direct double-loop censoring-weighted Brier score.

    g_before maps an individual's own duration to the censoring estimate just
    before it; g_at maps an evaluation time to the estimate at it.
    """
    n = len(durations)
    scores = []
    for t in times:
        total = 0.0
        for i in range(n):
            s = surv_at(i, t)
            if durations[i] <= t and events[i] == 1:
                w = g_before[i]
                if w > 0:
                    total += s**2 / w
            elif durations[i] > t:
                w = g_at[t]
                if w > 0:
                    total += (1 - s) ** 2 / w
        scores.append(total / n)
    return scores


def trapezoid(ys, xs):
    total = 0.0
    for k in range(1, len(xs)):
        total += 0.5 * (ys[k] + ys[k - 1]) * (xs[k] - xs[k - 1])
    return total / (xs[-1] - xs[0])


def mse_two_loops(est, truth):
    """Nested-loop mean squared error over individuals and times."""
    n, t = len(est), len(est[0])
    total = 0.0
    for i in range(n):
        for q in range(t):
            total += (est[i][q] - truth[i][q]) ** 2
    return total / (n * t)


def mtlr_nll(psi, idx, event):
    """Mean negative log-likelihood of the multi-task logistic model.

    Probabilities come straight from the sequence-of-labels formula: the
    numerator for an event in interval j sums the scores from j onward, the
    denominator sums over all sequences plus the all-zero one. Censorings
    score the survival tail past their interval.
    """
    psi = np.asarray(psi, dtype=float)
    n, m = psi.shape
    total = 0.0
    for i in range(n):
        denom = 1.0 + sum(np.exp(psi[i, k:].sum()) for k in range(m))
        f = [np.exp(psi[i, j:].sum()) / denom for j in range(m)]
        s_last = 1.0 / denom
        k = idx[i]
        if event[i] == 1:
            total -= np.log(f[k - 1])
        else:
            total -= np.log(sum(f[k:]) + s_last)
    return total / n


def pmf_nll_naive(logits, idx, event):
    """Direct softmax transcription of the interval-probability loss."""
    logits = np.asarray(logits, dtype=float)
    n, m = logits.shape
    total = 0.0
    for i in range(n):
        exps = np.exp(logits[i])
        denom = 1.0 + exps.sum()
        probs = exps / denom
        s_last = 1.0 / denom
        if event[i] == 1:
            total -= np.log(probs[idx[i] - 1])
        else:
            total -= np.log(probs[idx[i]:].sum() + s_last)
    return total / n


def logistic_hazard_nll_naive(logits, idx, event):
    """Direct probability-space transcription of the hazard loss."""
    logits = np.asarray(logits, dtype=float)
    n, m = logits.shape
    total = 0.0
    for i in range(n):
        h = 1.0 / (1.0 + np.exp(-logits[i]))
        for j in range(1, idx[i] + 1):
            y = 1.0 if (event[i] == 1 and j == idx[i]) else 0.0
            total -= y * np.log(h[j - 1]) + (1 - y) * np.log(1 - h[j - 1])
    return total / n


def pc_hazard_nll_naive(logits, idx, event, frac):
    """Direct transcription of the piecewise-constant hazard loss."""
    logits = np.asarray(logits, dtype=float)
    n, m = logits.shape
    total = 0.0
    for i in range(n):
        eta = np.log(1.0 + np.exp(logits[i]))
        k = idx[i]
        if k == 0:
            continue
        term = event[i] * np.log(eta[k - 1]) - eta[k - 1] * frac[i] - eta[: k - 1].sum()
        total -= term
    return total / n
