"""Independent reference computations used by the unit and acceptance tests."""
import numpy as np


def mc_kl(mu_q, var_q, mu_p, var_p, n, rng):
    """Monte-Carlo KL(q || p) for scalar Gaussians: mean and standard error of log q(z) - log p(z)."""
    z = mu_q + np.sqrt(var_q) * rng.standard_normal(n)
    log_q = -0.5 * np.log(2 * np.pi * var_q) - (z - mu_q) ** 2 / (2 * var_q)
    log_p = -0.5 * np.log(2 * np.pi * var_p) - (z - mu_p) ** 2 / (2 * var_p)
    r = log_q - log_p
    return r.mean(), r.std(ddof=1) / np.sqrt(n)


def naive_mse(a, b):
    total, count = 0.0, 0
    for x, y in zip(np.ravel(a), np.ravel(b)):
        total += (x - y) ** 2
        count += 1
    return total / count


def random_walk(n, seed):
    return np.cumsum(np.random.default_rng(seed).standard_normal(n))


def ar1(n, phi, seed):
    e = np.random.default_rng(seed).standard_normal(n)
    x = np.zeros(n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x
