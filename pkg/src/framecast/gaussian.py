"""Closed-form fidelities for Gaussian position profiles.

These formulas cover distinguishability of Gaussian conditional states
in three situations: directly observed incoherent branches, branches
seen from a reference frame that is itself a Gaussian wave packet
(which convolves the two spreads), and a coherent system wave packet
observed from such a frame (where the conditional state is mixed and
the natural measure is the state overlap). A Monte-Carlo sweep
averages the macrofraction fidelity over random branch positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import ValidationError


@dataclass(frozen=True)
class GaussianBranch:
    """One Gaussian position profile: mean and positive spread."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class MacrofractionSpec:
    """Branch data for one macrofraction fidelity evaluation.

    frame_i / frame_ip describe the reference environment's wave packet
    in the two branches being compared; env_branches holds one
    (branch_i, branch_ip) pair per observed environment in the
    fraction.
    """

    frame_i: GaussianBranch
    frame_ip: GaussianBranch
    env_branches: tuple

    def __post_init__(self):
        if len(self.env_branches) == 0:
            raise ValidationError("macrofraction must contain at least one environment")
        for pair in self.env_branches:
            if len(pair) != 2:
                raise ValidationError("each environment needs branches for both outcomes")


def _check_sigma(*sigmas):
    for s in sigmas:
        if not s > 0:
            raise ValidationError(f"sigma must be positive, got {s}")


def fidelity_incoherent_pair(b1: GaussianBranch, b2: GaussianBranch) -> float:
    """Fidelity of two incoherent Gaussian position states.

    sqrt(2 s1 s2 / (s1^2 + s2^2)) * exp(-(m1 - m2)^2 / (4 (s1^2 + s2^2)))
    """
    _check_sigma(b1.sigma, b2.sigma)
    s2 = b1.sigma**2 + b2.sigma**2
    pref = math.sqrt(2.0 * b1.sigma * b2.sigma / s2)
    return pref * math.exp(-((b1.mu - b2.mu) ** 2) / (4.0 * s2))


def fidelity_transformed_env(
    e1_i: GaussianBranch,
    e1_ip: GaussianBranch,
    ej_i: GaussianBranch,
    ej_ip: GaussianBranch,
) -> float:
    """Fidelity of an environment pair seen from a Gaussian frame.

    Switching to the frame of environment 1 turns the observed
    environment's branch into the distribution of the coordinate
    difference, a Gaussian with the branch means subtracted and the
    spreads added in quadrature within each branch. The result is the
    incoherent-pair fidelity of those two convolved profiles.
    """
    _check_sigma(e1_i.sigma, e1_ip.sigma, ej_i.sigma, ej_ip.sigma)
    rel_i = GaussianBranch(
        ej_i.mu - e1_i.mu, math.hypot(ej_i.sigma, e1_i.sigma)
    )
    rel_ip = GaussianBranch(
        ej_ip.mu - e1_ip.mu, math.hypot(ej_ip.sigma, e1_ip.sigma)
    )
    return fidelity_incoherent_pair(rel_i, rel_ip)


def fidelity_transformed_system(
    x_i: float,
    x_ip: float,
    e1_i: GaussianBranch,
    e1_ip: GaussianBranch,
) -> float:
    """Fidelity of sharp system branches seen from a Gaussian frame.

    A system localized at x in the lab becomes a Gaussian centered at
    x minus the frame branch mean, with the frame branch spread.
    """
    _check_sigma(e1_i.sigma, e1_ip.sigma)
    rel_i = GaussianBranch(x_i - e1_i.mu, e1_i.sigma)
    rel_ip = GaussianBranch(x_ip - e1_ip.mu, e1_ip.sigma)
    return fidelity_incoherent_pair(rel_i, rel_ip)


def linear_fidelity_coherent_system(
    mu_s_i: float,
    sigma_s_i: float,
    mu_s_ip: float,
    sigma_s_ip: float,
    e1_i: GaussianBranch,
    e1_ip: GaussianBranch,
) -> float:
    """Overlap of coherent system branches seen from a Gaussian frame.

    The system branch is a Gaussian wave packet rather than a sharp
    position, so the frame change produces a mixed conditional state;
    the returned quantity is the overlap Tr[rho rho'].

    2 s_i s_ip * exp(-delta^2 / (2 T)) / sqrt((s_i^2 + s_ip^2) T)
    with T the sum of all four variances and delta the difference of
    the branch-relative means.
    """
    _check_sigma(sigma_s_i, sigma_s_ip, e1_i.sigma, e1_ip.sigma)
    total = sigma_s_i**2 + sigma_s_ip**2 + e1_i.sigma**2 + e1_ip.sigma**2
    delta = (e1_i.mu - mu_s_i) - (e1_ip.mu - mu_s_ip)
    pref = 2.0 * sigma_s_i * sigma_s_ip / math.sqrt(
        (sigma_s_i**2 + sigma_s_ip**2) * total
    )
    return pref * math.exp(-(delta**2) / (2.0 * total))


def macrofraction_fidelity(spec: MacrofractionSpec) -> float:
    """Product of per-environment transformed fidelities over a fraction."""
    result = 1.0
    for ej_i, ej_ip in spec.env_branches:
        result *= fidelity_transformed_env(spec.frame_i, spec.frame_ip, ej_i, ej_ip)
    return result


def _incoherent_pair_array(mu1, s1, mu2, s2):
    """Vectorized incoherent-pair fidelity on numpy arrays."""
    ssum = s1**2 + s2**2
    pref = np.sqrt(2.0 * s1 * s2 / ssum)
    return pref * np.exp(-((mu1 - mu2) ** 2) / (4.0 * ssum))


def sweep_localisation_vs_fraction(
    sigma_grid,
    fraction_sizes,
    n_samples: int = 400,
    interval=(-1.0, 1.0),
    seed: int = 0,
    frame_random: bool = True,
) -> np.ndarray:
    """Mean macrofraction fidelity over random branch positions.

    For every (sigma, fraction size) cell, branch means are drawn
    uniformly from the interval for both pointer outcomes of every
    environment (and of the frame environment itself unless
    frame_random is False, in which case the frame branches sit at the
    origin); all spreads equal sigma. Each sample reuses its draws
    across all cells, so rows are deterministic per seed and the mean
    fidelity never increases with the fraction size.

    Returns an array of shape (len(sigma_grid), len(fraction_sizes)).
    """
    sigma_grid = [float(s) for s in sigma_grid]
    fraction_sizes = [int(f) for f in fraction_sizes]
    if not sigma_grid or not fraction_sizes:
        raise ValidationError("sigma grid and fraction sizes must be nonempty")
    _check_sigma(*sigma_grid)
    if any(f < 1 for f in fraction_sizes):
        raise ValidationError("fraction sizes must be at least 1")
    if n_samples < 1:
        raise ValidationError("n_samples must be at least 1")
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValidationError(f"interval must be increasing, got ({lo}, {hi})")

    max_size = max(fraction_sizes)
    streams = np.random.SeedSequence(seed).spawn(n_samples)
    frame_mu = np.zeros((n_samples, 2))
    env_mu = np.zeros((n_samples, max_size, 2))
    for n, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        if frame_random:
            frame_mu[n] = rng.uniform(lo, hi, size=2)
        env_mu[n] = rng.uniform(lo, hi, size=(max_size, 2))

    rel_i = env_mu[:, :, 0] - frame_mu[:, None, 0]
    rel_ip = env_mu[:, :, 1] - frame_mu[:, None, 1]

    out = np.zeros((len(sigma_grid), len(fraction_sizes)))
    for s_idx, sigma in enumerate(sigma_grid):
        conv = math.sqrt(2.0) * sigma
        factors = _incoherent_pair_array(rel_i, conv, rel_ip, conv)
        cum = np.cumprod(factors, axis=1)
        for f_idx, size in enumerate(fraction_sizes):
            out[s_idx, f_idx] = float(np.mean(cum[:, size - 1]))
    return out
