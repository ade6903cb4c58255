"""Tests for the Gaussian closed-form fidelities.

Each closed form is checked against an independent grid oracle: the
profiles are discretized on a fine position grid, the conditional
states are built numerically (including the convolution for the
frame-transformed cases and the full off-diagonal kernel for the
coherent system case), and the fidelity or overlap is computed from
those matrices directly.
"""

import math

import numpy as np
import pytest

from framecast.gaussian import (
    GaussianBranch,
    MacrofractionSpec,
    fidelity_incoherent_pair,
    fidelity_transformed_env,
    fidelity_transformed_system,
    linear_fidelity_coherent_system,
    macrofraction_fidelity,
    sweep_localisation_vs_fraction,
)
from framecast.linalg import ValidationError
from oracles import (
    grid_fidelity_convolved,
    grid_fidelity_diagonal,
    grid_overlap_coherent,
)


# ---------------------------------------------------------------------------
# incoherent pair


def test_incoherent_identical_is_one():
    b = GaussianBranch(0.3, 1.7)
    assert fidelity_incoherent_pair(b, b) == pytest.approx(1.0, abs=1e-14)


def test_incoherent_ten_sigma_separation():
    b1 = GaussianBranch(0.0, 1.0)
    b2 = GaussianBranch(10.0, 1.0)
    got = fidelity_incoherent_pair(b1, b2)
    assert got == pytest.approx(math.exp(-12.5), rel=1e-12)
    assert got == pytest.approx(3.7e-6, abs=4e-7)


def test_incoherent_against_grid_oracle():
    rng = np.random.default_rng(17)
    for _ in range(100):
        b1 = GaussianBranch(rng.uniform(-3, 3), rng.uniform(0.2, 2.5))
        b2 = GaussianBranch(rng.uniform(-3, 3), rng.uniform(0.2, 2.5))
        got = fidelity_incoherent_pair(b1, b2)
        assert got == pytest.approx(grid_fidelity_diagonal(b1, b2), abs=1e-6)


def test_incoherent_in_unit_interval_and_one_iff_equal():
    rng = np.random.default_rng(18)
    for _ in range(200):
        b1 = GaussianBranch(rng.uniform(-2, 2), rng.uniform(0.1, 3))
        b2 = GaussianBranch(rng.uniform(-2, 2), rng.uniform(0.1, 3))
        f = fidelity_incoherent_pair(b1, b2)
        assert 0 < f <= 1
        if abs(b1.mu - b2.mu) > 1e-6 or abs(b1.sigma - b2.sigma) > 1e-6:
            assert f < 1


def test_incoherent_monotone_in_separation():
    values = [
        fidelity_incoherent_pair(GaussianBranch(0, 1), GaussianBranch(d, 1))
        for d in np.linspace(0, 6, 25)
    ]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_incoherent_monotone_in_sigma_ratio():
    values = [
        fidelity_incoherent_pair(GaussianBranch(0, 1), GaussianBranch(0, ratio))
        for ratio in [1, 1.5, 2.5, 4, 8, 16]
    ]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_branch_rejects_bad_sigma():
    with pytest.raises(ValidationError, match="sigma"):
        GaussianBranch(0.0, 0.0)
    with pytest.raises(ValidationError, match="sigma"):
        GaussianBranch(0.0, -1.0)


# ---------------------------------------------------------------------------
# transformed environment


def test_transformed_env_identical_branches():
    b = GaussianBranch(0.4, 0.9)
    assert fidelity_transformed_env(b, b, b, b) == pytest.approx(1.0, abs=1e-14)


def test_transformed_env_wide_sigma_decay():
    # As one spread grows the fidelity falls off like 1/sqrt(sigma).
    base = [GaussianBranch(0, 1), GaussianBranch(1, 1), GaussianBranch(2, 1)]
    vals = []
    for big in (1e4, 1e6, 1e8):
        b = GaussianBranch(0.5, big)
        vals.append(fidelity_transformed_env(base[0], base[1], base[2], b) * np.sqrt(big))
    assert vals[0] == pytest.approx(vals[1], rel=1e-3)
    assert vals[1] == pytest.approx(vals[2], rel=1e-4)


def test_transformed_env_against_convolution_oracle():
    rng = np.random.default_rng(23)
    for _ in range(100):
        branches = [
            GaussianBranch(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
            for _ in range(4)
        ]
        got = fidelity_transformed_env(*branches)
        want = grid_fidelity_convolved(*branches)
        assert got == pytest.approx(want, abs=1e-5)


def test_transformed_env_equal_sigma_closed_form():
    # With all four spreads equal the prefactor collapses to 1 and only
    # the relative-mean difference survives in the exponent.
    s = 1.3
    e1_i = GaussianBranch(0.2, s)
    e1_ip = GaussianBranch(-0.5, s)
    ej_i = GaussianBranch(1.0, s)
    ej_ip = GaussianBranch(0.1, s)
    delta = (ej_i.mu - e1_i.mu) - (ej_ip.mu - e1_ip.mu)
    want = math.exp(-(delta**2) / (16 * s**2))
    assert fidelity_transformed_env(e1_i, e1_ip, ej_i, ej_ip) == pytest.approx(
        want, rel=1e-12
    )


# ---------------------------------------------------------------------------
# transformed system


def test_transformed_system_degenerate_relative_positions():
    e1_i = GaussianBranch(1.0, 0.7)
    e1_ip = GaussianBranch(3.0, 0.7)
    # x - mu agrees across branches, equal sigma: fidelity one.
    assert fidelity_transformed_system(1.5, 3.5, e1_i, e1_ip) == pytest.approx(
        1.0, abs=1e-14
    )


def test_transformed_system_ten_sigma_shift():
    s = 0.8
    e1_i = GaussianBranch(0.0, s)
    e1_ip = GaussianBranch(0.0, s)
    got = fidelity_transformed_system(0.0, 10 * s, e1_i, e1_ip)
    assert got == pytest.approx(math.exp(-12.5), rel=1e-12)


def test_transformed_system_against_grid_oracle():
    rng = np.random.default_rng(29)
    for _ in range(100):
        e1_i = GaussianBranch(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
        e1_ip = GaussianBranch(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
        x_i = rng.uniform(-2, 2)
        x_ip = rng.uniform(-2, 2)
        got = fidelity_transformed_system(x_i, x_ip, e1_i, e1_ip)
        want = grid_fidelity_diagonal(
            GaussianBranch(x_i - e1_i.mu, e1_i.sigma),
            GaussianBranch(x_ip - e1_ip.mu, e1_ip.sigma),
        )
        assert got == pytest.approx(want, abs=1e-6)


# ---------------------------------------------------------------------------
# coherent system overlap


def test_linear_identical_pure_limit():
    tiny = GaussianBranch(0.0, 1e-9)
    got = linear_fidelity_coherent_system(0.5, 1.1, 0.5, 1.1, tiny, tiny)
    assert got == pytest.approx(1.0, abs=1e-9)


def test_linear_ten_over_twentysix():
    tiny = GaussianBranch(0.0, 1e-9)
    sig = 0.9
    got = linear_fidelity_coherent_system(0.0, sig, 0.0, 5 * sig, tiny, tiny)
    assert got == pytest.approx(10.0 / 26.0, abs=1e-9)
    assert got == pytest.approx(0.385, abs=1e-3)


def test_linear_against_kernel_oracle():
    rng = np.random.default_rng(31)
    for _ in range(100):
        e1_i = GaussianBranch(rng.uniform(-1, 1), rng.uniform(0.3, 1.5))
        e1_ip = GaussianBranch(rng.uniform(-1, 1), rng.uniform(0.3, 1.5))
        mu_s_i = rng.uniform(-1, 1)
        mu_s_ip = rng.uniform(-1, 1)
        sig_s_i = rng.uniform(0.3, 1.5)
        sig_s_ip = rng.uniform(0.3, 1.5)
        got = linear_fidelity_coherent_system(
            mu_s_i, sig_s_i, mu_s_ip, sig_s_ip, e1_i, e1_ip
        )
        want = grid_overlap_coherent(
            mu_s_i, sig_s_i, mu_s_ip, sig_s_ip, e1_i, e1_ip
        )
        assert got == pytest.approx(want, abs=1e-5)


def test_linear_rejects_bad_sigma():
    e = GaussianBranch(0.0, 1.0)
    with pytest.raises(ValidationError, match="sigma"):
        linear_fidelity_coherent_system(0.0, -1.0, 0.0, 1.0, e, e)


# ---------------------------------------------------------------------------
# macrofraction product


def test_macrofraction_single_env_equals_factor():
    frame_i = GaussianBranch(0.1, 1.0)
    frame_ip = GaussianBranch(-0.2, 1.2)
    env = (GaussianBranch(0.5, 0.8), GaussianBranch(-0.4, 1.1))
    spec = MacrofractionSpec(frame_i, frame_ip, (env,))
    assert macrofraction_fidelity(spec) == pytest.approx(
        fidelity_transformed_env(frame_i, frame_ip, *env), rel=1e-15
    )


def test_macrofraction_product_law():
    frame_i = GaussianBranch(0.0, 1.0)
    frame_ip = GaussianBranch(0.0, 1.0)
    envs = tuple(
        (GaussianBranch(0.3 * k, 1.0), GaussianBranch(-0.2 * k, 1.0))
        for k in range(1, 7)
    )
    full = macrofraction_fidelity(MacrofractionSpec(frame_i, frame_ip, envs))
    left = macrofraction_fidelity(MacrofractionSpec(frame_i, frame_ip, envs[:3]))
    right = macrofraction_fidelity(MacrofractionSpec(frame_i, frame_ip, envs[3:]))
    assert full == pytest.approx(left * right, rel=1e-12)


def test_macrofraction_fifty_envs_power_law():
    # Each environment contributes the same factor 0.9, so fifty of
    # them give 0.9 ** 50 = 5.15e-3.
    s = 1.0
    d = 4.0 * math.sqrt(math.log(1 / 0.9))
    frame = GaussianBranch(0.0, s)
    env = (GaussianBranch(0.0, s), GaussianBranch(d, s))
    factor = fidelity_transformed_env(frame, frame, *env)
    assert factor == pytest.approx(0.9, rel=1e-12)
    spec = MacrofractionSpec(frame, frame, (env,) * 50)
    got = macrofraction_fidelity(spec)
    assert got == pytest.approx(0.9**50, rel=1e-10)
    assert got == pytest.approx(5.15e-3, abs=2e-5)


def test_macrofraction_rejects_empty():
    b = GaussianBranch(0.0, 1.0)
    with pytest.raises(ValidationError, match="at least one"):
        MacrofractionSpec(b, b, ())


# ---------------------------------------------------------------------------
# Monte-Carlo sweep


def test_sweep_shape_and_determinism():
    grid1 = sweep_localisation_vs_fraction([0.1, 1.0], [1, 3], n_samples=50, seed=7)
    grid2 = sweep_localisation_vs_fraction([0.1, 1.0], [1, 3], n_samples=50, seed=7)
    assert grid1.shape == (2, 2)
    assert np.array_equal(grid1, grid2)
    grid3 = sweep_localisation_vs_fraction([0.1, 1.0], [1, 3], n_samples=50, seed=8)
    assert not np.array_equal(grid1, grid3)


def test_sweep_sharp_localisation_kills_fidelity():
    # The same draws are reused across the sigma grid, so the decay of
    # the mean fidelity toward the sharp-localisation limit is exact
    # per sample, and the smallest sigma cell is essentially zero up to
    # the rare near-coincident draws.
    grid = sweep_localisation_vs_fraction([1e-5, 1e-3, 0.1, 1.0], [1], n_samples=100, seed=3)
    col = grid[:, 0]
    assert col[0] < 0.02
    assert np.all(np.diff(col) > 0)
    assert col[0] < 0.05 * col[3]


def test_sweep_wide_packets_keep_fidelity():
    grid = sweep_localisation_vs_fraction([100.0], [1], n_samples=100, seed=3)
    assert grid[0, 0] > 0.99


def test_sweep_monotone_in_fraction_size():
    sizes = [1, 2, 5, 10, 25]
    grid = sweep_localisation_vs_fraction([0.3, 0.7], sizes, n_samples=120, seed=11)
    for row in grid:
        assert np.all(np.diff(row) <= 1e-15)


def test_sweep_fixed_frame_option_changes_result():
    a = sweep_localisation_vs_fraction([0.5], [2], n_samples=60, seed=5)
    b = sweep_localisation_vs_fraction(
        [0.5], [2], n_samples=60, seed=5, frame_random=False
    )
    assert a.shape == b.shape
    assert not np.array_equal(a, b)


def test_sweep_validates_inputs():
    with pytest.raises(ValidationError, match="nonempty"):
        sweep_localisation_vs_fraction([], [1])
    with pytest.raises(ValidationError, match="nonempty"):
        sweep_localisation_vs_fraction([1.0], [])
    with pytest.raises(ValidationError, match="at least 1"):
        sweep_localisation_vs_fraction([1.0], [0])
    with pytest.raises(ValidationError, match="sigma"):
        sweep_localisation_vs_fraction([0.0], [1])
    with pytest.raises(ValidationError, match="interval"):
        sweep_localisation_vs_fraction([1.0], [1], interval=(1.0, -1.0))
    with pytest.raises(ValidationError, match="n_samples"):
        sweep_localisation_vs_fraction([1.0], [1], n_samples=0)
