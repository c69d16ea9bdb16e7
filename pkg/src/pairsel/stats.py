"""Numerical kernels: standardization, Pearson and Spearman correlation,
marginal correlations with the response and two-predictor R squared.

All functions are pure; nothing here keeps state between calls.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .exceptions import DegenerateInputError, SingularPairError

# |corr(x_i, x_j)| this close to 1 makes the pair regression singular.
COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class DataMatrix:
    """An n x p design with its response.

    Parameters
    ----------
    x : array_like, shape (n, p)
        Covariates, one column per variable.
    y : array_like, shape (n,)
        Response.
    column_names : sequence of str, optional
        Column labels. ``names`` falls back to ``x1 .. xp``.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"x must be 2-D, got shape {x.shape}")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError(
                f"y must be 1-D of length {x.shape[0]}, got shape {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("x and y must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.column_names is not None:
            names = tuple(str(s) for s in self.column_names)
            if len(names) != x.shape[1]:
                raise ValueError(
                    f"{len(names)} column names for {x.shape[1]} columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def names(self):
        if self.column_names is not None:
            return self.column_names
        return tuple(f"x{j + 1}" for j in range(self.p))

    def subset(self, rows):
        """Return the DataMatrix restricted to ``rows``."""
        rows = np.asarray(rows)
        return DataMatrix(self.x[rows], self.y[rows], self.column_names)


@dataclass(frozen=True)
class StandardizedDesign:
    """Columns centered and scaled so that mean(z_j**2) == 1 (1/n convention).

    ``y_centered`` is the response minus ``y_mean``; ``y`` keeps the raw
    response for likelihood-based fits.
    """

    z: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    y_centered: np.ndarray
    y: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return self.z.shape[0]

    @property
    def p(self):
        return self.z.shape[1]

    def transform(self, x_new):
        """Standardize new rows with the stored means and scales."""
        x_new = np.asarray(x_new, dtype=float)
        if x_new.ndim != 2 or x_new.shape[1] != self.p:
            raise ValueError(
                f"expected {self.p} columns, got shape {x_new.shape}")
        return (x_new - self.column_means) / self.column_scales

    def restore(self):
        """Undo the scaling: ``z * scale + mean``."""
        return self.z * self.column_scales + self.column_means


def _check_variance(a, what, column=None):
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{what} must be 1-D")
    if a.size < 2:
        raise ValueError(f"{what} needs at least 2 observations")
    if np.ptp(a) == 0.0:
        raise DegenerateInputError(f"{what} has zero variance", column=column)
    return a


def pearson_corr(a, b):
    """Pearson sample correlation of two vectors.

    Raises DegenerateInputError instead of returning NaN when either
    vector is constant.
    """
    a = _check_variance(a, "first argument")
    b = _check_variance(b, "second argument")
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    da = a - a.mean()
    db = b - b.mean()
    r = np.dot(da, db) / np.sqrt(np.dot(da, da) * np.dot(db, db))
    return float(np.clip(r, -1.0, 1.0))


def midranks(a):
    """Ranks 1..n with tied values sharing the average of their ranks."""
    return rankdata(np.asarray(a, dtype=float), method="average")


def spearman_rho(a, b):
    """Spearman's rho: Pearson correlation of the midrank vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    ra, rb = midranks(a), midranks(b)
    if np.ptp(ra) == 0.0 or np.ptp(rb) == 0.0:
        raise DegenerateInputError("all ranks tied; Spearman's rho undefined")
    return pearson_corr(ra, rb)


def _unit_columns(x, what="column"):
    """Center columns and scale them to unit Euclidean norm."""
    x = np.asarray(x, dtype=float)
    flat = np.ptp(x, axis=0) == 0.0
    if np.any(flat):
        j = int(np.flatnonzero(flat)[0])
        raise DegenerateInputError(f"{what} {j} has zero variance", column=j)
    xc = x - x.mean(axis=0)
    return xc / np.sqrt(np.einsum("ij,ij->j", xc, xc))


def correlation_matrix(x, method="pearson"):
    """p x p matrix of pairwise Pearson (or Spearman) correlations."""
    x = np.asarray(x, dtype=float)
    if method == "spearman":
        x = rankdata(x, method="average", axis=0)
    elif method != "pearson":
        raise ValueError(f"unknown method {method!r}")
    u = _unit_columns(x)
    r = u.T @ u
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return r


def response_correlations(x, y):
    """Signed Pearson correlation of every column of ``x`` with ``y``."""
    y = _check_variance(y, "response")
    u = _unit_columns(x)
    yc = y - y.mean()
    return np.clip(u.T @ (yc / np.linalg.norm(yc)), -1.0, 1.0)


def marginal_correlations(d):
    """w_j = |corr(x_j, y)| for every column of a DataMatrix."""
    return np.abs(response_correlations(d.x, d.y))


def r_squared_from_correlations(r_yi, r_yj, r_ij):
    """R^2 of y on (1, x_i, x_j) from the three pairwise correlations.

    Solves the centered 2x2 normal equations in closed form. Works
    elementwise on arrays; singular entries (|r_ij| == 1) come back as
    NaN and must be handled by the caller.
    """
    r_yi, r_yj, r_ij = np.broadcast_arrays(
        np.asarray(r_yi, float), np.asarray(r_yj, float),
        np.asarray(r_ij, float))
    det = 1.0 - r_ij**2
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = (r_yi**2 + r_yj**2 - 2.0 * r_yi * r_yj * r_ij) / det
    r2 = np.where(det <= COLLINEAR_TOL, np.nan, np.clip(r2, 0.0, 1.0))
    return r2 if r2.ndim else float(r2)


def pairwise_r_squared(d, i, j):
    """Coefficient of determination of the fit of y on (1, x_i, x_j).

    Raises SingularPairError when x_i and x_j are collinear.
    """
    if i == j:
        raise ValueError("pairwise R^2 needs two distinct columns")
    if d.n < 4:
        raise ValueError(f"pairwise R^2 needs n >= 4, got n={d.n}")
    a = _check_variance(d.x[:, i], f"column {i}", column=i)
    b = _check_variance(d.x[:, j], f"column {j}", column=j)
    c = _check_variance(d.y, "response")
    a = a - a.mean()
    b = b - b.mean()
    c = c - c.mean()
    aa, bb, ab = a @ a, b @ b, a @ b
    det = aa * bb - ab * ab
    if det <= COLLINEAR_TOL * aa * bb:
        raise SingularPairError(
            f"columns {i} and {j} are collinear", pair=(i, j))
    ac, bc = a @ c, b @ c
    coef_a = (bb * ac - ab * bc) / det
    coef_b = (aa * bc - ab * ac) / det
    r2 = (coef_a * ac + coef_b * bc) / (c @ c)
    return float(np.clip(r2, 0.0, 1.0))


def standardize(d):
    """Center and scale each column with the 1/n variance convention."""
    x = d.x
    flat = np.ptp(x, axis=0) == 0.0
    if np.any(flat):
        j = int(np.flatnonzero(flat)[0])
        raise DegenerateInputError(f"column {j} has zero variance", column=j)
    means = x.mean(axis=0)
    xc = x - means
    scales = np.sqrt(np.mean(xc**2, axis=0))
    z = xc / scales
    y_mean = float(d.y.mean())
    return StandardizedDesign(
        z=z, column_means=means, column_scales=scales, y_mean=y_mean,
        y_centered=d.y - y_mean, y=np.array(d.y))
