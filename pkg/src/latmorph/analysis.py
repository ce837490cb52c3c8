"""Regression analysis of sweep results and latent-space projection.

The regression model is

    response = b0 + b1 * distance + b2 * length + b3 * distance*length

fit by ordinary least squares on one row per evaluated interpolation.
Standard errors come from sigma^2 (X^T X)^-1 with sigma^2 = SSR/(n-4),
and two-sided p-values from the exact t distribution with n-4 degrees
of freedom via the regularized incomplete beta function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import betainc

TERMS = ("constant", "distance", "length", "interaction")

TERM_LABELS = {
    "constant": "Constant",
    "distance": "Latent distance (std devs)",
    "length": "Transition length",
    "interaction": "Interaction (distance x length)",
}


class SingularDesignError(ValueError):
    """Design matrix is rank deficient; names the collinear columns."""

    def __init__(self, columns):
        self.columns = tuple(columns)
        super().__init__(f"design matrix is rank deficient in columns: {', '.join(self.columns)}")


@dataclass
class RegressionDesign:
    distance: np.ndarray
    length: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        self.distance = np.asarray(self.distance, dtype=np.float64).ravel()
        self.length = np.asarray(self.length, dtype=np.float64).ravel()
        self.response = np.asarray(self.response, dtype=np.float64).ravel()
        n = self.distance.size
        if self.length.size != n or self.response.size != n:
            raise ValueError("distance, length and response must have equal lengths")
        if n < 5:
            raise ValueError(f"need at least 5 rows to fit 4 coefficients, got {n}")

    def matrix(self) -> np.ndarray:
        return np.column_stack(
            [np.ones_like(self.distance), self.distance, self.length, self.distance * self.length]
        )

    @classmethod
    def from_records(cls, records, response: str = "c_s") -> "RegressionDesign":
        """Build a design from SweepRecord-like rows; response is 'c_s' or 'c_k'."""
        if response not in ("c_s", "c_k"):
            raise ValueError(f"response must be 'c_s' or 'c_k', got {response!r}")
        return cls(
            distance=np.array([r.distance_std for r in records]),
            length=np.array([r.length for r in records]),
            response=np.array([getattr(r, response) for r in records]),
        )


@dataclass
class TermEstimate:
    coefficient: float
    std_error: float
    t_stat: float
    p_value: float


@dataclass
class RegressionResult:
    terms: dict[str, TermEstimate]
    r_squared: float
    n_rows: int
    dof: int

    def coefficient(self, term: str) -> float:
        return self.terms[term].coefficient


def _t_sf_two_sided(t: np.ndarray, dof: int) -> np.ndarray:
    """P(|T| >= |t|) for the t distribution with `dof` degrees of freedom."""
    t = np.asarray(t, dtype=np.float64)
    out = np.ones_like(t)
    finite = np.isfinite(t)
    x = dof / (dof + t[finite] ** 2)
    out[finite] = betainc(dof / 2.0, 0.5, x)
    out[~finite] = 0.0
    return out


def ols_fit(design: RegressionDesign) -> RegressionResult:
    """Fit the four-term model; raises SingularDesignError on collinearity."""
    X = design.matrix()
    y = design.response
    n = y.size

    # rank check via pivoted QR; pivots beyond the numerical rank name the culprits
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag.max() * max(X.shape) * np.finfo(float).eps
    rank = int((diag > tol).sum())
    if rank < 4:
        raise SingularDesignError(TERMS[i] for i in sorted(piv[rank:]))

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    dof = n - 4
    sigma2 = ssr / dof

    # (X^T X)^-1 from the economic QR of the unpivoted design
    _, R2 = np.linalg.qr(X)
    Rinv = scipy.linalg.solve_triangular(R2, np.eye(4))
    xtx_inv = Rinv @ Rinv.T
    se = np.sqrt(np.clip(sigma2 * np.diag(xtx_inv), 0.0, None))

    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0.0, beta / se, np.where(beta == 0.0, 0.0, np.inf * np.sign(beta)))
    p = _t_sf_two_sided(t, dof)

    r2 = 0.0 if sst == 0.0 else float(np.clip(1.0 - ssr / sst, 0.0, 1.0))
    terms = {
        name: TermEstimate(float(beta[i]), float(se[i]), float(t[i]), float(p[i]))
        for i, name in enumerate(TERMS)
    }
    return RegressionResult(terms=terms, r_squared=r2, n_rows=n, dof=dof)


def significance_table(result: RegressionResult, alpha: float = 0.05, title: str = "") -> str:
    """Human-readable coefficient table; `*` marks p strictly below alpha."""
    width = max(len(label) for label in TERM_LABELS.values()) + 2
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'R-Squared:':<{width}}{result.r_squared:.3f}")
    for name in TERMS:
        est = result.terms[name]
        star = "*" if est.p_value < alpha else ""
        lines.append(
            f"{TERM_LABELS[name] + ':':<{width}}{est.coefficient:.4f} ±{est.std_error:.3f}{star}"
        )
    lines.append(f"(n = {result.n_rows}; * marks p < {alpha:g})")
    return "\n".join(lines)


def regression_csv(result: RegressionResult, alpha: float = 0.05) -> str:
    """CSV rendering: term,coefficient,std_error,t,p,starred (LF endings)."""
    rows = ["term,coefficient,std_error,t,p,starred"]
    for name in TERMS:
        est = result.terms[name]
        starred = "1" if est.p_value < alpha else "0"
        rows.append(
            f"{name},{est.coefficient:.6f},{est.std_error:.6f},"
            f"{est.t_stat:.6f},{est.p_value:.6f},{starred}"
        )
    return "\n".join(rows) + "\n"


def pca_project(points, dims: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Mean-centered projection onto the top principal axes.

    Returns (projected (n, dims) coordinates, explained-variance ratios).
    Axis signs are fixed so each axis' largest-magnitude loading is
    positive, keeping the output deterministic.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least 2 points to project")
    dims = min(dims, X.shape[1])
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    axes = vt[:dims]
    flip = np.sign(axes[np.arange(dims), np.argmax(np.abs(axes), axis=1)])
    flip[flip == 0.0] = 1.0
    axes = axes * flip[:, None]
    total = float((s**2).sum())
    ratios = (s[:dims] ** 2) / total if total > 0 else np.zeros(dims)
    return Xc @ axes.T, ratios
