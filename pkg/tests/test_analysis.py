import numpy as np
import pytest
import scipy.stats

from latmorph.analysis import (
    RegressionDesign,
    SingularDesignError,
    ols_fit,
    pca_project,
    regression_csv,
    significance_table,
)

from oracles import ols_oracle, pca_oracle


def make_design(rng, rows=50):
    d = rng.uniform(1, 6, rows)
    n = rng.choice([5, 10, 15], rows).astype(float)
    y = 100 - 5 * d + 0.1 * n + 0.2 * d * n + rng.normal(0, 2, rows)
    return RegressionDesign(distance=d, length=n, response=y)


def test_exact_linear_data_recovers_coefficients():
    d = np.array([1, 2, 3, 4, 5, 6, 1, 2, 3, 4, 5, 6], dtype=float)
    n = np.array([5, 5, 5, 5, 5, 5, 10, 10, 10, 10, 10, 10], dtype=float)
    y = 10.0 - 2.0 * d
    res = ols_fit(RegressionDesign(d, n, y))
    assert abs(res.terms["constant"].coefficient - 10.0) < 1e-8
    assert abs(res.terms["distance"].coefficient - (-2.0)) < 1e-8
    assert abs(res.terms["length"].coefficient) < 1e-8
    assert abs(res.terms["interaction"].coefficient) < 1e-8
    assert res.r_squared > 1.0 - 1e-12


def test_constant_response_gives_zero_slopes_and_zero_r2(rng):
    d = rng.uniform(1, 6, 30)
    n = rng.choice([5.0, 10.0, 15.0], 30)
    res = ols_fit(RegressionDesign(d, n, np.full(30, 7.0)))
    for term in ("distance", "length", "interaction"):
        assert abs(res.terms[term].coefficient) < 1e-10
    assert res.r_squared == 0.0


def test_matches_pseudo_inverse_oracle(rng):
    for _ in range(20):
        design = make_design(rng)
        res = ols_fit(design)
        beta, se, t, p, r2 = ols_oracle(design.distance, design.length, design.response)
        got = [res.terms[k] for k in ("constant", "distance", "length", "interaction")]
        assert np.allclose([g.coefficient for g in got], beta, atol=1e-8)
        assert np.allclose([g.std_error for g in got], se, atol=1e-8)
        assert np.allclose([g.t_stat for g in got], t, atol=1e-6)
        assert np.allclose([g.p_value for g in got], p, atol=1e-6)
        assert abs(res.r_squared - r2) < 1e-10


def test_p_values_match_closed_forms():
    # dof=1 and dof=2 t distributions have elementary two-sided tail forms
    rng = np.random.default_rng(0)
    for dof in (1, 2):
        rows = dof + 4
        d = rng.uniform(1, 6, rows)
        n = rng.choice([5.0, 10.0, 15.0], rows)
        y = 100 - 5 * d + 0.2 * d * n + rng.normal(0, 1, rows)
        res = ols_fit(RegressionDesign(d, n, y))
        for est in res.terms.values():
            t = abs(est.t_stat)
            if dof == 1:
                expected = 1.0 - (2.0 / np.pi) * np.arctan(t)
            else:
                expected = 1.0 - t / np.sqrt(2.0 + t * t)
            assert abs(est.p_value - expected) < 1e-12


def test_residuals_orthogonal_to_design(rng):
    design = make_design(rng)
    res = ols_fit(design)
    X = design.matrix()
    beta = np.array([res.terms[k].coefficient for k in ("constant", "distance", "length", "interaction")])
    r = design.response - X @ beta
    for col in X.T:
        assert abs(col @ r) <= 1e-8 * np.linalg.norm(col) * np.linalg.norm(design.response)


def test_duplicated_rows_shrink_standard_errors(rng):
    design = make_design(rng, rows=40)
    res1 = ols_fit(design)
    doubled = RegressionDesign(
        np.concatenate([design.distance] * 2),
        np.concatenate([design.length] * 2),
        np.concatenate([design.response] * 2),
    )
    res2 = ols_fit(doubled)
    for k in ("constant", "distance", "length", "interaction"):
        assert abs(res2.terms[k].coefficient - res1.terms[k].coefficient) < 1e-8
        assert res2.terms[k].std_error < res1.terms[k].std_error


def test_response_scaling_behaves_predictably(rng):
    design = make_design(rng)
    res1 = ols_fit(design)
    scaled = RegressionDesign(design.distance, design.length, 3.0 * design.response)
    res2 = ols_fit(scaled)
    for k in ("constant", "distance", "length", "interaction"):
        assert np.isclose(res2.terms[k].coefficient, 3.0 * res1.terms[k].coefficient)
        assert np.isclose(res2.terms[k].std_error, 3.0 * res1.terms[k].std_error)
        assert np.isclose(res2.terms[k].t_stat, res1.terms[k].t_stat)
        assert np.isclose(res2.terms[k].p_value, res1.terms[k].p_value)
    assert np.isclose(res2.r_squared, res1.r_squared)


def test_rank_deficiency_names_columns(rng):
    d = rng.uniform(1, 6, 20)
    n = np.full(20, 10.0)  # constant length makes length and interaction collinear
    y = rng.normal(size=20)
    with pytest.raises(SingularDesignError) as err:
        ols_fit(RegressionDesign(d, n, y))
    assert len(err.value.columns) >= 1
    assert set(err.value.columns) <= {"constant", "distance", "length", "interaction"}


def test_too_few_rows_rejected():
    with pytest.raises(ValueError):
        RegressionDesign(np.ones(4), np.ones(4), np.ones(4))


# --- rendering ---------------------------------------------------------------

def test_significance_star_is_strict(rng):
    design = make_design(rng)
    res = ols_fit(design)
    res.terms["length"].p_value = 0.049
    res.terms["interaction"].p_value = 0.05
    table = significance_table(res)
    length_line = next(l for l in table.splitlines() if l.startswith("Transition length"))
    interaction_line = next(l for l in table.splitlines() if l.startswith("Interaction"))
    assert length_line.endswith("*")
    assert not interaction_line.endswith("*")
    csv = regression_csv(res)
    rows = {line.split(",")[0]: line.split(",") for line in csv.strip().splitlines()[1:]}
    assert rows["length"][5] == "1"
    assert rows["interaction"][5] == "0"


# --- PCA -----------------------------------------------------------------------

def test_line_in_16d_explains_all_variance(rng):
    direction = rng.standard_normal(16)
    t = rng.standard_normal(40)
    points = np.outer(t, direction) + 3.0
    proj, ratios = pca_project(points)
    assert ratios[0] > 1.0 - 1e-12
    assert ratios[1] < 1e-12


def test_projection_is_mean_centered(rng):
    points = rng.standard_normal((30, 16))
    proj, _ = pca_project(points)
    assert np.allclose(proj.mean(axis=0), 0.0, atol=1e-12)


def test_matches_covariance_eigendecomposition_oracle(rng):
    points = rng.standard_normal((60, 16)) @ np.diag(np.linspace(3, 0.1, 16))
    proj, ratios = pca_project(points)
    ref_proj, ref_ratios = pca_oracle(points)
    assert np.allclose(ratios, ref_ratios, atol=1e-8)
    for axis in range(2):  # per-axis sign is arbitrary
        same = np.allclose(proj[:, axis], ref_proj[:, axis], atol=1e-8)
        flipped = np.allclose(proj[:, axis], -ref_proj[:, axis], atol=1e-8)
        assert same or flipped


def test_axes_orthonormal(rng):
    points = rng.standard_normal((50, 16))
    Xc = points - points.mean(axis=0)
    proj, _ = pca_project(points)
    # reconstruct the axes by least squares and check orthonormality
    axes, *_ = np.linalg.lstsq(Xc, proj, rcond=None)
    gram = axes.T @ axes
    assert np.allclose(gram, np.eye(2), atol=1e-10)
