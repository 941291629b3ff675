"""Compiled inner loops: keyed reward generation, plan execution, cycle indices."""

import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_EDGE_MUL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _mix64(x):
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


@njit(cache=True)
def uniform(seed, step, edge, stream):
    """Uniform in [0, 1) from the key (seed, step, edge, stream); all uint64."""
    x = _mix64(seed * _GOLDEN + step)
    x = _mix64(x ^ ((_TWO * edge + stream + _ONE) * _EDGE_MUL))
    return (x >> _S11) * _INV_2_53


@njit(cache=True)
def draw(seed, step, edge, mean, gaussian, sd):
    u = uniform(seed, step, edge, np.uint64(0))
    if not gaussian:
        return 1.0 if u < mean else 0.0
    v = uniform(seed, step, edge, np.uint64(1))
    return mean + sd * math.sqrt(-2.0 * math.log1p(-u)) * math.cos(_TWO_PI * v)


@njit(cache=True)
def execute(edges, seed, t0, counts, sums, means, gaussian, sd):
    """Play ``edges`` from step ``t0``; updates ``counts``/``sums`` in place, returns reward."""
    total = 0.0
    for j in range(edges.shape[0]):
        e = edges[j]
        r = draw(seed, np.uint64(t0 + j), np.uint64(e), means[e], gaussian[e], sd[e])
        counts[e] += 1
        sums[e] += r
        total += r
    return total


@njit(cache=True)
def cycle_means(sums, counts, ptr, flat_edges):
    """Empirical gain of each cycle (average of its edges' empirical means)."""
    k = ptr.shape[0] - 1
    out = np.empty(k)
    for c in range(k):
        s = 0.0
        for j in range(ptr[c], ptr[c + 1]):
            e = flat_edges[j]
            if counts[e] > 0:
                s += sums[e] / counts[e]
        out[c] = s / (ptr[c + 1] - ptr[c])
    return out


@njit(cache=True)
def _bern_kl(p, q):
    out = 0.0
    if p > 0.0:
        if q <= 0.0:
            return math.inf
        out += p * math.log(p / q)
    if p < 1.0:
        if q >= 1.0:
            return math.inf
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


@njit(cache=True)
def _bern_mean_at_slope(p, slope):
    if slope == 0.0:
        return p
    b = 1.0 - slope
    disc = math.sqrt(b * b + 4.0 * slope * p)
    if b > 0.0:
        return 2.0 * p / (b + disc)
    return (disc - b) / (2.0 * slope)


@njit(cache=True)
def _bern_cost(p_hat, n, edges, mu):
    """Weighted KL cost at multiplier ``mu`` and its derivative in ``mu``."""
    cost = 0.0
    slope = 0.0
    for e in edges:
        lam = mu / n[e]
        p = p_hat[e]
        q = _bern_mean_at_slope(p, lam)
        cost += n[e] * _bern_kl(p, q)
        # d cost / d mu = sum_e n kl'(p, q) dq/dlam / n = sum_e lam dq/dlam
        denom = 2.0 * lam * q + 1.0 - lam
        if denom > 0.0:
            slope += lam * q * (1.0 - q) / denom
    return cost, slope


@njit(cache=True)
def bernoulli_cycle_index(p_hat, n, edges, budget):
    """Largest average of ``q`` over ``edges`` with ``sum n*kl(p_hat, q) <= budget``.

    At the optimum every edge has the same weighted KL slope ``n*kl' = mu``;
    ``mu`` is found by Newton steps kept inside a shrinking bracket.
    """
    m = edges.shape[0]
    if budget <= 0.0:
        s = 0.0
        for e in edges:
            s += p_hat[e]
        return s / m
    # starting point from the quadratic approximation kl ~ (q-p)^2 / (2p(1-p))
    spread = 0.0
    for e in edges:
        spread += max(p_hat[e] * (1.0 - p_hat[e]), 1e-6) / n[e]
    mu = math.sqrt(2.0 * budget / spread)
    lo = 0.0
    hi = math.inf
    for _ in range(200):
        cost, slope = _bern_cost(p_hat, n, edges, mu)
        gap = cost - budget
        if abs(gap) <= 1e-12 * budget:
            break
        if gap < 0.0:
            lo = mu
        else:
            hi = mu
        step = mu - gap / slope if slope > 0.0 else math.nan
        if lo < step < hi:
            if abs(step - mu) <= 1e-14 * mu:
                mu = step
                break
            mu = step
        elif hi == math.inf:
            mu = 2.0 * lo
        else:
            mu = 0.5 * (lo + hi)
            if mu <= lo or mu >= hi:
                break
    s = 0.0
    for e in edges:
        s += _bern_mean_at_slope(p_hat[e], mu / n[e])
    return s / m


@njit(cache=True)
def cycle_indices(sums, counts, ptr, flat_edges, gaussian, variance, budget):
    """Upper-confidence gain of every cycle; cycles are CSR slices of ``flat_edges``.

    Cycles with an unvisited edge get ``inf``.
    """
    k = ptr.shape[0] - 1
    p_hat = np.zeros(sums.shape[0])
    for e in range(sums.shape[0]):
        if counts[e] > 0:
            p_hat[e] = sums[e] / counts[e]
    out = np.empty(k)
    for c in range(k):
        edges = flat_edges[ptr[c]:ptr[c + 1]]
        unseen = False
        for e in edges:
            if counts[e] == 0:
                unseen = True
        if unseen:
            out[c] = math.inf
            continue
        if gaussian:
            s = 0.0
            inv = 0.0
            for e in edges:
                s += p_hat[e]
                inv += 1.0 / counts[e]
            m = edges.shape[0]
            out[c] = s / m + math.sqrt(2.0 * max(budget, 0.0) * variance * inv) / m
        else:
            out[c] = bernoulli_cycle_index(p_hat, counts, edges, budget)
    return out
