import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latmorph.homogenize import StiffnessStats, homogenize_cell, plane_stress_matrix
from latmorph.latent import TransitionRegion
from latmorph.metrics import (
    SOBEL,
    GradientKernel,
    geometric_smoothness,
    gradient_volumes,
    stiffness_continuity,
    transition_stiffness,
)

from oracles import continuity_oracle, gradient_oracle, smoothness_oracle


# --- kernel -----------------------------------------------------------------

def test_kernels_are_antisymmetric_and_zero_sum():
    for k, axis in ((SOBEL.kx, 2), (SOBEL.ky, 1), (SOBEL.kz, 0)):
        assert np.array_equal(np.flip(k, axis=axis), -k)
        assert k.sum() == 0.0
    assert SOBEL.rmse_max == 2.0 * SOBEL.kx[SOBEL.kx > 0].sum() == 32.0


def test_rmse_max_is_attained_and_never_exceeded(rng):
    # constructed extremal stack: the z-gradient flips from -16 to +16
    vol = np.zeros((4, 50, 50))
    vol[0] = 1.0
    vol[3] = 1.0
    gz = gradient_volumes(vol)[2]
    assert np.abs(np.diff(gz, axis=0)).max() == SOBEL.rmse_max
    for _ in range(20):
        cells = (rng.random((5, 50, 50)) < 0.5).astype(float)
        for g in gradient_volumes(cells):
            assert np.abs(np.diff(g, axis=0)).max() <= SOBEL.rmse_max


# --- gradient volumes ---------------------------------------------------------

def test_constant_volume_has_zero_gradients():
    cells = [np.full((50, 50), 0.42)] * 5
    for g in gradient_volumes(cells):
        assert g.shape == (3, 48, 48)
        assert np.all(g == 0.0)


def test_linear_ramp_gradient_matches_kernel_moment():
    slope = 0.013
    ramp = np.tile(np.arange(50) * slope, (6, 50, 1))
    gx, gy, gz = gradient_volumes(ramp)
    assert np.allclose(gx, 32.0 * slope)  # first moment of the kernel is 32
    assert np.allclose(gy, 0.0)
    assert np.allclose(gz, 0.0)


def test_three_cells_give_single_gradient_slice():
    cells = np.zeros((3, 50, 50))
    gx, _, _ = gradient_volumes(cells)
    assert gx.shape == (1, 48, 48)


def test_gradient_needs_three_cells():
    with pytest.raises(ValueError):
        gradient_volumes(np.zeros((2, 50, 50)))


def test_gradients_match_scipy_path(rng):
    cells = rng.random((6, 50, 50))
    ours = gradient_volumes(cells)
    ref = gradient_oracle(cells)
    for a, b in zip(ours, ref):
        assert np.allclose(a, b, atol=1e-12)


# --- geometric smoothness -----------------------------------------------------

def test_identical_cells_score_exactly_100(rng):
    cell = (rng.random((50, 50)) < 0.5).astype(float)
    res = geometric_smoothness([cell] * 6)
    assert res.c_s == 100.0
    assert np.all(res.pair_rmse == 0.0)


def test_alternating_stack_frozen_value():
    # period-2 stacks are invisible to the central-difference kernel, so
    # both the fast path and the explicit-loop transcription must give 100
    cells = [np.zeros((50, 50)) if i % 2 == 0 else np.ones((50, 50)) for i in range(6)]
    res = geometric_smoothness(cells)
    assert abs(res.c_s - 100.0) < 1e-9
    assert abs(res.c_s - smoothness_oracle(cells)) < 1e-9


def test_smoothness_matches_oracle_on_random_stacks(rng):
    for _ in range(6):
        n = int(rng.integers(4, 9))
        cells = rng.random((n, 50, 50))
        res = geometric_smoothness(cells)
        assert abs(res.c_s - smoothness_oracle(cells)) < 1e-9


def test_fade_scores_higher_than_shuffle():
    rng = np.random.default_rng(5)
    n = 10
    for _ in range(10):
        a = (rng.random((50, 50)) < 0.5).astype(float)
        b = (rng.random((50, 50)) < 0.5).astype(float)
        fade = [(1 - k / (n - 1)) * a + (k / (n - 1)) * b for k in range(n)]
        idx = rng.permutation(n)
        while np.array_equal(idx, np.arange(n)) or np.array_equal(idx, np.arange(n)[::-1]):
            idx = rng.permutation(n)
        shuffled = [fade[i] for i in idx]
        assert geometric_smoothness(fade).c_s > geometric_smoothness(shuffled).c_s


def test_smoothness_needs_four_cells():
    with pytest.raises(ValueError):
        geometric_smoothness(np.zeros((3, 50, 50)))


def test_smoothness_invariant_under_reversal_and_inversion(rng):
    cells = rng.random((7, 50, 50))
    base = geometric_smoothness(cells).c_s
    assert abs(geometric_smoothness(cells[::-1]).c_s - base) < 1e-12
    assert abs(geometric_smoothness(1.0 - cells).c_s - base) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(4, 8))
def test_smoothness_bounds_property(seed, n):
    cells = np.random.default_rng(seed).random((n, 50, 50))
    res = geometric_smoothness(cells)
    assert 0.0 <= res.c_s <= 100.0
    assert np.all(res.pair_rmse >= 0.0) and np.all(res.pair_rmse <= 1.0)


# --- stiffness continuity ------------------------------------------------------

def unit_stats():
    return StiffnessStats(cmin=np.zeros((3, 3)), cmax=np.ones((3, 3)))


def test_identical_tensors_score_100():
    t = np.full((3, 3), 0.5)
    res = stiffness_continuity([t, t, t], unit_stats())
    assert res.c_k == 100.0


def test_extreme_pair_scores_zero():
    res = stiffness_continuity([np.zeros((3, 3)), np.ones((3, 3))], unit_stats())
    assert res.c_k == 0.0
    assert res.pair_rmse[0] == 1.0


def test_affine_chain_scores_50():
    tensors = [np.zeros((3, 3)), np.full((3, 3), 0.5), np.ones((3, 3))]
    res = stiffness_continuity(tensors, unit_stats())
    assert np.allclose(res.pair_rmse, 0.5)
    assert abs(res.c_k - 50.0) < 1e-12


def test_continuity_matches_oracle_on_random_sequences(rng):
    stats = StiffnessStats(cmin=-np.ones((3, 3)), cmax=2 * np.ones((3, 3)))
    for _ in range(10):
        n = int(rng.integers(2, 12))
        tensors = rng.uniform(-1, 2, (n, 3, 3))
        res = stiffness_continuity(tensors, stats)
        assert abs(res.c_k - continuity_oracle(tensors, stats.cmin, stats.cmax)) < 1e-9


def test_continuity_needs_two_tensors():
    with pytest.raises(ValueError):
        stiffness_continuity([np.zeros((3, 3))], unit_stats())


def test_continuity_reversal_invariance(rng):
    tensors = rng.random((6, 3, 3))
    base = stiffness_continuity(tensors, unit_stats()).c_k
    assert abs(stiffness_continuity(tensors[::-1], unit_stats()).c_k - base) < 1e-12


def test_duplicating_final_tensor_never_lowers_score(rng):
    tensors = list(rng.random((5, 3, 3)))
    base = stiffness_continuity(tensors, unit_stats()).c_k
    extended = stiffness_continuity(tensors + [tensors[-1]], unit_stats()).c_k
    assert extended >= base - 1e-12


def test_legacy_pair_divisor_flag():
    tensors = [np.zeros((3, 3)), np.full((3, 3), 0.5), np.ones((3, 3)), np.ones((3, 3))]
    default = stiffness_continuity(tensors, unit_stats())
    legacy = stiffness_continuity(tensors, unit_stats(), legacy_pair_divisor=True)
    assert abs(default.mean_rmse - (0.5 + 0.5 + 0.0) / 3) < 1e-12
    assert abs(legacy.mean_rmse - (0.5 + 0.5 + 0.0) / 1) < 1e-12
    with pytest.raises(ValueError):
        stiffness_continuity(tensors[:3], unit_stats(), legacy_pair_divisor=True)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_continuity_bounds_property(seed, n):
    tensors = np.random.default_rng(seed).uniform(-3, 3, (n, 3, 3))
    stats = StiffnessStats(cmin=-np.ones((3, 3)), cmax=np.ones((3, 3)))
    res = stiffness_continuity(tensors, stats)
    assert 0.0 <= res.c_k <= 100.0


# --- transition stiffness -------------------------------------------------------

def test_transition_stiffness_identical_cells(small_dataset):
    cell = small_dataset.records[0].cell
    region = TransitionRegion(cells=[cell, cell], latents=np.zeros((2, 4)))
    tensors = transition_stiffness(region, small_dataset.material)
    assert np.array_equal(tensors[0], tensors[1])
    assert region.stiffnesses is not None and len(region.stiffnesses) == 2


def test_transition_stiffness_all_solid_closed_form():
    region = TransitionRegion(cells=[np.ones((50, 50))] * 2, latents=np.zeros((2, 4)))
    tensors = transition_stiffness(region)
    ref = plane_stress_matrix(1.0, 0.3)
    assert np.abs(tensors[0] - ref).max() / ref.max() < 1e-6


def test_transition_stiffness_matches_dataset_tensors(small_dataset):
    recs = small_dataset.records[:3]
    region = TransitionRegion(cells=[r.cell for r in recs], latents=np.zeros((3, 4)))
    tensors = transition_stiffness(region, small_dataset.material)
    for t, r in zip(tensors, recs):
        assert np.array_equal(t.astype(np.float32), r.stiffness.astype(np.float32))


def test_transition_stiffness_thresholds_grayscale(small_dataset):
    cell = small_dataset.records[0].cell
    gray = np.clip(cell * 0.8 + 0.1, 0.0, 1.0)  # 0.1 / 0.9 values
    region = TransitionRegion(cells=[gray, gray], latents=np.zeros((2, 4)))
    tensors = transition_stiffness(region, small_dataset.material)
    direct = homogenize_cell(cell, small_dataset.material)
    assert np.allclose(tensors[0], direct)
