"""Independent 50-digit evaluation of the Extended-B92 key-length chain.

Written directly from the closed-form expressions with mpmath and no
imports from the package, so it can serve as an oracle for keyrate.
"""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 50


def h(x):
    x = mp.mpf(x)
    if x <= 0 or x >= 1:
        return mp.mpf(0)
    return -x * mp.log(x, 2) - (1 - x) * mp.log(1 - x, 2)


def b92_stats(theta, x, Q):
    theta, x, Q = mp.mpf(theta), mp.mpf(x), mp.mpf(Q)
    a, b = mp.cos(theta / 2), mp.sin(theta / 2)
    p = x**2 / (2 * a**2)
    p_a = 4 * p * a**2 * b**2 * (1 - 2 * Q) + 2 * p * Q
    return p, p_a, p * Q / p_a


def key_length(n_total, eps, theta, x, Q, f):
    """Return a dict with the chain's intermediate values at high precision."""
    N = int(n_total)
    m = int(mp.floor(mp.mpf(f) * N))
    n = N - m
    eps = mp.mpf(eps)
    delta = mp.sqrt(mp.mpf(m + n + 2) / (m * (m + n)) * mp.log(50 / eps**2))
    eps_cl = min(mp.mpf(1), 2 * mp.exp(-(delta**2) * m * (n + m) / (m + n + 2)))
    _, p_a, q_z = b92_stats(theta, x, Q)
    n0 = int(mp.floor(p_a * n))
    r = n * (mp.mpf(Q) + delta) / n0
    gamma = mp.mpf(n0) if r >= mp.mpf(1) / 2 else n0 * h(r)
    lam = n0 * h(min(q_z + delta, mp.mpf(1) / 2))
    ell = n0 - gamma - lam - mp.log(1 / eps_cl, 2)
    return {
        "m": m, "n": n, "n0": n0, "delta": delta, "eps_cl": eps_cl,
        "gamma": gamma, "lambda_ec": lam, "ell": max(ell, mp.mpf(0)),
    }
