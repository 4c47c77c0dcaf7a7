"""Submodular function minimization with lattice-extreme minimizers.

Two solver paths share one result type:

* exhaustive enumeration for small grounds, which recovers the exact minimum
  and the minimal/maximal minimizers as the intersection/union of all tied
  minimizing subsets (the minimizer family of a submodular function is a
  lattice, so those are its bottom and top);
* the Fujishige-Wolfe minimum-norm-point algorithm for larger grounds,
  driven by the greedy linear-minimization oracle over the base polyhedron.

References for the min-norm route: Wolfe, "Finding the nearest point in a
polytope" (Math. Prog. 1976); Fujishige, Hayashi, Isotani, "The minimum-norm-
point algorithm applied to submodular function minimization" (RIMS 2006);
Chakrabarty, Jain, Kothari (NeurIPS 2014) for the convergence analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .setfn import CountingFunction, SetFunction, bit_indices


class ConvergenceError(RuntimeError):
    """Iteration cap hit; carries the best result found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
        self.recursion_path = None


@dataclass
class SolverConfig:
    """Tolerances and dispatch thresholds shared by all solvers.

    tie_epsilon is relative to the largest |f| magnitude observed in a solve;
    exhaustive_threshold is capped at 20 to bound the 2^n sweep.
    """

    exhaustive_threshold: int = 16
    tie_epsilon: float = 1e-9
    mnp_gap_tolerance: float = 1e-10
    max_iterations: int = 20000

    def __post_init__(self):
        if self.exhaustive_threshold > 20:
            raise ValueError("exhaustive_threshold must be <= 20")
        if min(self.tie_epsilon, self.mnp_gap_tolerance) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_CONFIG = SolverConfig()


@dataclass
class SfmResult:
    """Minimum value plus both lattice-extreme minimizers of one SFM solve."""

    min_value: float
    minimal_minimizer: frozenset
    maximal_minimizer: frozenset
    solver_used: str
    oracle_evals: int
    ground_size: int
    minimal_mask: int = field(default=0, repr=False)
    maximal_mask: int = field(default=0, repr=False)

    def to_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "minimal_minimizer": sorted(self.minimal_minimizer),
            "maximal_minimizer": sorted(self.maximal_minimizer),
            "solver_used": self.solver_used,
            "oracle_evals": self.oracle_evals,
            "ground_size": self.ground_size,
        }


def solve_sfm(f: SetFunction, config: SolverConfig | None = None,
              method: str | None = None) -> SfmResult:
    """Minimize f over all subsets of its ground (empty set included).

    Dispatches to the exhaustive sweep when the ground is at most
    ``config.exhaustive_threshold`` elements, otherwise to the min-norm-point
    path; ``method`` ("exhaustive" or "min_norm_point") overrides dispatch.
    The min-norm path assumes f is submodular; the exhaustive path does not.
    """
    config = config or DEFAULT_CONFIG
    elems = bit_indices(f.ground_mask)
    if not elems:
        return SfmResult(0.0, frozenset(), frozenset(), "exhaustive", 0, 0)
    if method is None:
        method = ("exhaustive" if len(elems) <= config.exhaustive_threshold
                  else "min_norm_point")
    if method == "exhaustive":
        return _solve_exhaustive(f, elems, config)
    if method == "min_norm_point":
        return _solve_min_norm(f, elems, config)
    raise ValueError("unknown SFM method %r" % method)


def _solve_exhaustive(f, elems, config) -> SfmResult:
    c = len(elems)
    if c > 20:
        raise ValueError("exhaustive SFM refused above 20 elements (got %d)" % c)
    counting = CountingFunction(f)
    vals = counting.all_values(elems)
    scale = max(1.0, counting.max_abs)
    tol = config.tie_epsilon * scale
    vmin = float(vals.min())
    tied = np.nonzero(vals <= vmin + tol)[0]
    union = int(np.bitwise_or.reduce(tied.astype(np.int64)))
    inter = int(np.bitwise_and.reduce(tied.astype(np.int64)))
    # Lattice self-check: the union/intersection of tied minimizers must
    # themselves attain the minimum; fall back to extremal tied subsets if
    # the input was not submodular (or ties were an epsilon artifact).
    if vals[union] > vmin + tol or vals[inter] > vmin + tol:
        by_card = sorted((int(t) for t in tied),
                         key=lambda m: (m.bit_count(), m))
        inter, union = by_card[0], by_card[-1]
    minimal_mask = _local_to_global(inter, elems)
    maximal_mask = _local_to_global(union, elems)
    return SfmResult(
        min_value=vmin,
        minimal_minimizer=frozenset(f.ground.users_of(minimal_mask)),
        maximal_minimizer=frozenset(f.ground.users_of(maximal_mask)),
        solver_used="exhaustive",
        oracle_evals=counting.evals,
        ground_size=c,
        minimal_mask=minimal_mask,
        maximal_mask=maximal_mask,
    )


def _solve_min_norm(f, elems, config) -> SfmResult:
    counting = CountingFunction(f)
    x, converged = _wolfe(counting, elems, config)
    scale = max(1.0, counting.max_abs)
    tol = config.tie_epsilon * scale

    # Round the fractional point to sets.  Sorting x ascending makes both
    # lattice-extreme minimizers prefix sets of the order; evaluating every
    # prefix is cheap and guards against threshold misclassification.
    order = np.argsort(x, kind="stable")
    pv = counting.prefix_values(np.asarray(elems, dtype=np.intp)[order])
    pmin = float(pv.min())
    tied_ks = np.nonzero(pv <= pmin + tol)[0]
    k_small, k_large = int(tied_ks[0]), int(tied_ks[-1])
    k_neg = int(np.sum(x < -tol))   # signed-threshold rule: {x < -eps}
    k_zero = int(np.sum(x <= tol))  # and {x <= +eps}
    if pv[k_neg] <= pmin + tol:
        k_small = k_neg
    if pv[k_zero] <= pmin + tol:
        k_large = k_zero
    minimal_mask = _prefix_mask(order, k_small, elems)
    maximal_mask = _prefix_mask(order, k_large, elems)
    result = SfmResult(
        min_value=pmin,
        minimal_minimizer=frozenset(f.ground.users_of(minimal_mask)),
        maximal_minimizer=frozenset(f.ground.users_of(maximal_mask)),
        solver_used="min_norm_point",
        oracle_evals=counting.evals,
        ground_size=len(elems),
        minimal_mask=minimal_mask,
        maximal_mask=maximal_mask,
    )
    if not converged:
        raise ConvergenceError(
            "min-norm-point solver hit the iteration cap (%d) on a ground of "
            "size %d" % (config.max_iterations, len(elems)),
            best=result,
        )
    return result


def _prefix_mask(order, k, elems) -> int:
    mask = 0
    for j in order[:k]:
        mask |= 1 << elems[int(j)]
    return mask


def _local_to_global(local_mask: int, elems) -> int:
    mask = 0
    for k in bit_indices(local_mask):
        mask |= 1 << elems[k]
    return mask


def min_norm_point(f: SetFunction, config: SolverConfig | None = None) -> np.ndarray:
    """Minimum-norm point of the base polyhedron of f.

    Returns the point as an array over the elements of f's ground in
    ascending position order, with Wolfe gap certified below
    ``config.mnp_gap_tolerance`` (relative to max(1, |x|^2)).
    """
    config = config or DEFAULT_CONFIG
    elems = bit_indices(f.ground_mask)
    if not elems:
        return np.zeros(0)
    counting = CountingFunction(f)
    x, converged = _wolfe(counting, elems, config)
    if not converged:
        raise ConvergenceError(
            "min-norm-point solver hit the iteration cap (%d)"
            % config.max_iterations, best=x)
    return x


def _greedy_local(counting, elems_arr, direction) -> np.ndarray:
    """Base-polyhedron vertex minimizing <direction, x>, in local coordinates."""
    order = np.argsort(direction, kind="stable")
    pv = counting.prefix_values(elems_arr[order])
    vertex = np.empty(len(order))
    vertex[order] = np.diff(pv)
    return vertex


def _wolfe(counting, elems, config):
    """Wolfe's minimum-norm-point algorithm over the base polyhedron.

    Maintains x as a convex combination of greedy vertices (rows of S with
    coefficients lam).  Major cycles add the vertex minimizing <x, .>;
    minor cycles project onto the affine hull of the active vertices and
    prune until the projection is a proper convex combination.
    """
    elems_arr = np.asarray(elems, dtype=np.intp)
    c = len(elems)
    x = _greedy_local(counting, elems_arr, np.zeros(c))
    S = x.reshape(1, c)
    lam = np.ones(1)

    for _ in range(config.max_iterations):
        q = _greedy_local(counting, elems_arr, x)
        xx = float(x @ x)
        gap = xx - float(x @ q)
        if gap <= config.mnp_gap_tolerance * max(1.0, xx):
            return x, True
        if np.any(np.all(np.abs(S - q) <= 1e-12, axis=1)):
            return x, True  # vertex already active: numerically converged
        S = np.vstack([S, q])
        lam = np.append(lam, 0.0)

        while True:
            coeff, y = _affine_minimizer(S)
            if np.all(coeff > 1e-12):
                x, lam = y, coeff
                break
            # step toward y until the first coefficient hits zero, drop it
            shrink = lam - coeff
            active = shrink > 1e-14
            if not active.any():
                # projection matches the current coefficients to precision
                lam = np.maximum(coeff, 0.0)
                lam = lam / lam.sum()
                x = S.T @ lam
                break
            theta = float(np.min(lam[active] / shrink[active]))
            theta = min(max(theta, 0.0), 1.0)
            lam = (1.0 - theta) * lam + theta * coeff
            keep = lam > 1e-12
            if keep.all():
                keep[int(np.argmin(lam))] = False
            S = S[keep]
            lam = lam[keep]
            lam = lam / lam.sum()
            x = S.T @ lam
    return x, False


def _affine_minimizer(S):
    """Least-norm point of the affine hull of the rows of S.

    Solves the bordered normal equations; falls back to least squares when
    the Gram matrix is numerically singular.
    """
    m = S.shape[0]
    if m == 1:
        return np.ones(1), S[0].copy()
    M = np.empty((m + 1, m + 1))
    M[0, 0] = 0.0
    M[0, 1:] = 1.0
    M[1:, 0] = 1.0
    M[1:, 1:] = S @ S.T
    rhs = np.zeros(m + 1)
    rhs[0] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    coeff = sol[1:]
    return coeff, S.T @ coeff
