"""Cooperation matrices and the representative-strategy regression."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .tournament import InteractionCache, player_scores, rank_order

# Five-representative model as originally published; predictors are scores against S6, Reversed State Transition, Ruler, Tester, Tranquilizer.
ORIGINAL_REPRESENTATIVES = ("k60r", "k91r", "k40r", "k76r", "k67r")
ORIGINAL_COEFFICIENTS = (0.202, 0.198, 0.110, 0.072, 0.086)
ORIGINAL_INTERCEPT = 0.795


# ---------------------------------------------------------------- cooperation

@dataclass(frozen=True)
class CoopMatrix:
    entries: np.ndarray
    ordering: tuple[str, ...]

    def to_long_csv(self) -> str:
        buf = io.StringIO()
        buf.write("row_player,col_player,rate\n")
        for a, row in zip(self.ordering, self.entries):
            for b, v in zip(self.ordering, row):
                if not math.isnan(v):
                    buf.write(f"{a},{b},{float(v)!r}\n")
        return buf.getvalue()


def _permutation(cache: InteractionCache, ordering) -> list[int]:
    n = len(cache.players)
    if ordering is None:
        return list(range(n))
    perm = [cache.index(o) if isinstance(o, str) else int(o) for o in ordering]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"ordering is not a permutation of the {n} cached players: {list(ordering)}")
    return perm


def cooperation_matrix(cache: InteractionCache, ordering: Sequence | None = None) -> CoopMatrix:
    """Entry (i, j): how often player ``ordering[i]`` cooperated against ``ordering[j]``.

    ``ordering`` holds cache indices or player ids; default is cache order.
    """
    perm = _permutation(cache, ordering)
    entries = cache.mean_coop[np.ix_(perm, perm)].copy()
    return CoopMatrix(entries, tuple(cache.players[i] for i in perm))


def symmetry_deviation(c: CoopMatrix | np.ndarray) -> np.ndarray:
    m = np.asarray(c.entries if isinstance(c, CoopMatrix) else c, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    d = m - m.T
    np.fill_diagonal(d, 0.0)
    return d


def mean_cooperation(cache: InteractionCache) -> float:
    """Mean over all cached ordered pairs of the cooperation rate."""
    return float(np.nanmean(cache.mean_coop))


def ranking_order(cache: InteractionCache) -> list[int]:
    return rank_order(player_scores(cache.mean_payoff, cache.include_self))


# ---------------------------------------------------------------- regression

class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, columns: list):
        self.columns = columns
        super().__init__(f"design matrix is rank deficient; dependent columns: {columns}")


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    intercept: float
    r_squared: float
    f_values: np.ndarray
    p_values: np.ndarray
    n_obs: int
    names: tuple[str, ...] = ()

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] != len(self.coefficients):
            raise ValueError(f"model has {len(self.coefficients)} coefficients, X has {X.shape[1]} columns")
        return X @ self.coefficients + self.intercept

    def to_csv(self) -> str:
        names = self.names or tuple(f"x{i}" for i in range(len(self.coefficients)))
        buf = io.StringIO()
        buf.write("term,coefficient,f_value,p_value\n")
        for name, c, f, p in zip(names, self.coefficients, self.f_values, self.p_values):
            buf.write(f"{name},{float(c)!r},{float(f)!r},{float(p)!r}\n")
        buf.write(f"intercept,{float(self.intercept)!r},,\n")
        buf.write(f"r_squared,{float(self.r_squared)!r},,\n")
        return buf.getvalue()


def _design(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] <= X.shape[1]:
        raise ValueError(f"need more observations ({X.shape[0]}) than predictors ({X.shape[1]})")
    return X, y


def _solve(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares via column-pivoted QR; raises on rank deficiency."""
    q, r, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < A.shape[1]:
        bad = sorted(int(c) for c in piv[rank:])
        raise RankDeficientError(["intercept" if c == 0 else c - 1 for c in bad])
    z = scipy.linalg.solve_triangular(r, q.T @ y)
    beta = np.empty_like(z)
    beta[piv] = z
    return beta


def _ss_res(A, y) -> float:
    resid = y - A @ _solve(A, y)
    return float(resid @ resid)


def r_squared(y, predictions) -> float:
    y = np.asarray(y, dtype=float)
    resid = y - np.asarray(predictions, dtype=float)
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else float("nan")
    return 1.0 - ss_res / ss_tot


def ols_fit(X, y, names: Sequence[str] = ()) -> OlsFit:
    """Least-squares fit with an intercept.

    Each predictor gets a partial F test against the model without it
    (one numerator degree of freedom, ``n - k - 1`` denominator).
    """
    X, y = _design(X, y)
    n, k = X.shape
    A = np.column_stack([np.ones(n), X])
    beta = _solve(A, y)
    fitted = A @ beta
    resid = y - fitted
    ss_res = float(resid @ resid)
    df = n - k - 1
    f_values = np.full(k, np.nan)
    p_values = np.full(k, np.nan)
    for j in range(k):
        reduced = np.delete(A, j + 1, axis=1)
        extra = _ss_res(reduced, y) - ss_res
        if df == 0:
            continue
        if ss_res == 0.0:
            f_values[j] = math.inf if extra > 0 else math.nan
            p_values[j] = 0.0 if extra > 0 else math.nan
            continue
        f = max(extra, 0.0) / (ss_res / df)
        f_values[j] = f
        p_values[j] = f_sf(f, 1, df)
    return OlsFit(beta[1:], float(beta[0]), r_squared(y, fitted), f_values, p_values, n, tuple(names))


def apply_fixed_model(fit: OlsFit, X, y=None) -> tuple[np.ndarray, float | None]:
    """Predictions of an already-fitted model and, if ``y`` is given, their R²."""
    pred = fit.predict(X)
    if y is None:
        return pred, None
    y = np.asarray(y, dtype=float).ravel()
    if y.shape != pred.shape:
        raise ValueError(f"y has {y.shape[0]} entries, X has {pred.shape[0]} rows")
    return pred, r_squared(y, pred)


def fixed_model(coefficients: Sequence[float], intercept: float, names: Sequence[str] = ()) -> OlsFit:
    """A model with given coefficients and no fit statistics."""
    c = np.asarray(coefficients, dtype=float)
    nan = np.full(len(c), np.nan)
    return OlsFit(c, float(intercept), math.nan, nan, nan.copy(), 0, tuple(names))


def original_representative_model() -> OlsFit:
    return fixed_model(ORIGINAL_COEFFICIENTS, ORIGINAL_INTERCEPT, ORIGINAL_REPRESENTATIVES)


@dataclass(frozen=True)
class EliminationStep:
    retained: tuple[int, ...]
    r_squared: float


def backward_elimination(X, y) -> list[EliminationStep]:
    """Drop, one at a time, the predictor whose removal costs the least R².

    Returns one step per model size from ``k`` down to 1. Equal R² losses
    are broken by removing the earliest column.
    """
    X, y = _design(X, y)
    n, k = X.shape
    ones = np.ones(n)

    def r2(cols):
        A = np.column_stack([ones, X[:, list(cols)]])
        return r_squared(y, A @ _solve(A, y))

    retained = tuple(range(k))
    steps = [EliminationStep(retained, r2(retained))]
    while len(retained) > 1:
        best = None
        for c in retained:
            cand = tuple(x for x in retained if x != c)
            score = r2(cand)
            if best is None or score > best[1]:
                best = (cand, score)
        retained = best[0]
        steps.append(EliminationStep(retained, best[1]))
    return steps


def representative_design(cache: InteractionCache, representatives: Sequence[int | str]
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Predictors: each player's per-turn payoff against each representative.
    Response: each player's tournament score."""
    cols = [cache.index(r) if isinstance(r, str) else int(r) for r in representatives]
    X = cache.mean_payoff[:, cols].copy()
    y = player_scores(cache.mean_payoff, cache.include_self)
    keep = ~np.isnan(X).any(axis=1)
    return X[keep], y[keep]


# ---------------------------------------------------------------- F distribution

def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 3e-16) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom."""
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
