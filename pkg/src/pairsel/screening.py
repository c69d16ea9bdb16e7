"""Marginal (SIS) screening and pairwise correlation / R^2 screening.

Index sets are 0-based throughout. Pairs are only formed inside the SIS
subset unless ``full=True`` is requested, which keeps the pair sweep at
O(|M|^2 n) instead of O(p^2 n).
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionalityWarning, SubsetClampWarning
from .io import dumps
from .laws import LawThresholds, law_thresholds
from .stats import correlation_matrix, marginal_correlations, \
    response_correlations

METHODS = ("pearson", "spearman")
MODES = ("linear", "glm")


@dataclass(frozen=True)
class ScreenSets:
    """Result of the two-stage screen.

    m : SIS survivors, ordered by decreasing |corr(x_j, y)|.
    g : pairs (i, j), i < j, that passed the pair screen, sorted.
    c : covariates appearing in some pair of g, ascending.
    """

    m: tuple
    g: tuple
    c: tuple
    thresholds: LawThresholds
    method: str = "pearson"
    mode: str = "linear"

    def to_dict(self):
        return {
            "m": [int(j) for j in self.m],
            "g": [[int(i), int(j)] for i, j in self.g],
            "c": [int(j) for j in self.c],
            "thresholds": self.thresholds.to_dict(),
            "method": self.method,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            m=tuple(int(j) for j in data["m"]),
            g=tuple((int(i), int(j)) for i, j in data["g"]),
            c=tuple(int(j) for j in data["c"]),
            thresholds=LawThresholds.from_dict(data["thresholds"]),
            method=data.get("method", "pearson"),
            mode=data.get("mode", "linear"))

    def to_json(self):
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def replace_pairs(self, g):
        """Copy with a different pair set (and the matching paired set)."""
        g = tuple(sorted((min(i, j), max(i, j)) for i, j in g))
        return ScreenSets(self.m, g, paired_set(g), self.thresholds,
                          self.method, self.mode)


def default_subset_size(n):
    """[n / log n] with the natural logarithm."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return int(math.floor(n / math.log(n)))


def sis_screen(d, k=None):
    """Indices of the k columns most correlated with the response.

    Ties in |corr| go to the lower column index. The result is ordered by
    decreasing |corr|.
    """
    if k is None:
        k = default_subset_size(d.n)
    return top_k(marginal_correlations(d), k)


def top_k(w, k):
    """Positions of the k largest entries of w, lowest index first on ties."""
    w = np.asarray(w, dtype=float)
    p = w.size
    if k < 1:
        raise ValueError(f"subset size must be >= 1, got {k}")
    if k > p:
        warnings.warn(f"subset size {k} exceeds p={p}; using {p}",
                      SubsetClampWarning, stacklevel=3)
        k = p
    order = np.argsort(-w, kind="stable")
    return tuple(int(j) for j in order[:k])


def _pair_mask(d, idx, thresholds, method, use_r_squared):
    x = d.x[:, idx]
    if method == "pearson":
        r = correlation_matrix(x, "pearson")
        stat_ok = r**2 >= thresholds.t_star
    elif method == "spearman":
        if thresholds.s_star is None:
            raise ValueError("thresholds carry no Spearman cutoff (p < 3)")
        rs = correlation_matrix(x, "spearman")
        stat_ok = rs**2 >= thresholds.s_star
        r = correlation_matrix(x, "pearson") if use_r_squared else None
    else:
        raise ValueError(f"unknown method {method!r}")
    if not use_r_squared:
        return stat_ok
    ry = response_correlations(x, d.y)
    ri, rj = ry[:, None], ry[None, :]
    det = 1.0 - r**2
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = (ri**2 + rj**2 - 2.0 * ri * rj * r) / det
    # a collinear pair spans one direction: its R^2 is that of either member
    collinear = det <= 1e-12
    r2 = np.where(collinear, np.maximum(ri**2, rj**2), r2)
    return stat_ok & (r2 >= thresholds.r0)


def _usable(d, m):
    idx = np.asarray(sorted(set(int(j) for j in m)), dtype=int)
    if idx.size == 0:
        raise ValueError("pair screening needs a nonempty index set")
    flat = np.ptp(d.x[:, idx], axis=0) == 0.0
    if np.any(flat):
        for j in idx[flat]:
            warnings.warn(f"column {j} has zero variance; its pairs are skipped",
                          UserWarning, stacklevel=4)
        idx = idx[~flat]
    return idx


def pair_screen(d, m, thresholds, method="pearson", use_r_squared=True):
    """Pairs of ``m`` whose squared correlation and pairwise R^2 both pass.

    Returns a sorted tuple of (i, j) with i < j in original column indices.
    """
    if method == "spearman" and math.log(max(d.p, 2)) > d.n ** (1.0 / 3.0):
        warnings.warn(
            f"log p = {math.log(d.p):.2f} exceeds n^(1/3) = {d.n ** (1 / 3):.2f};"
            " the Spearman threshold may be miscalibrated",
            DimensionalityWarning, stacklevel=2)
    idx = _usable(d, m)
    if idx.size < 2:
        return ()
    mask = _pair_mask(d, idx, thresholds, method, use_r_squared)
    a, b = np.triu_indices(idx.size, k=1)
    keep = mask[a, b]
    pairs = zip(idx[a[keep]].tolist(), idx[b[keep]].tolist())
    return tuple(sorted(pairs))


def glm_pair_screen(d, m, thresholds, method="pearson"):
    """Correlation-only pair screen used for generalized linear models."""
    return pair_screen(d, m, thresholds, method, use_r_squared=False)


def paired_set(g):
    """Ascending union of the members of the pairs in ``g``."""
    return tuple(sorted({int(i) for pair in g for i in pair}))


def screen(d, alpha=0.05, delta=0.1, method="pearson", mode="linear", k=None,
           threshold_p=None, full=False):
    """Run SIS followed by the pair screen and package the result.

    Parameters
    ----------
    d : DataMatrix
    alpha, delta : float
        Level of the correlation threshold and slack of the R^2 threshold.
    method : {"pearson", "spearman"}
    mode : {"linear", "glm"}
        ``"glm"`` drops the R^2 condition.
    k : int, optional
        SIS subset size, default [n / log n].
    threshold_p : int, optional
        Dimension plugged into the thresholds. Defaults to the ambient p.
    full : bool
        Screen pairs among all p columns instead of within M.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    thresholds = law_thresholds(alpha, delta, d.n, threshold_p or d.p)
    m = sis_screen(d, k)
    pool = range(d.p) if full else m
    g = pair_screen(d, pool, thresholds, method, use_r_squared=mode == "linear")
    return ScreenSets(m=m, g=g, c=paired_set(g), thresholds=thresholds,
                      method=method, mode=mode)
