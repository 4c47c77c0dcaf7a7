"""Fair allocations over the rate region and tools to compare them.

Implements the Shapley value (an exact subset sweep, a permutation-sampling
estimator, and the full permutation average used for cross-checks),
region-membership verification against both constraint forms, and an
independent quadratic solver for the weighted egalitarian point based on
away-step conditional gradients (Guelat & Marcotte 1986; Lacoste-Julien &
Jaggi 2015 for the linear-rate analysis).  The conditional-gradient route
shares no code with the recursive splitting solver on purpose: it is the
correctness oracle the splitter is tested against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .setfn import (
    BRUTE_FORCE_LIMIT,
    CountingFunction,
    GroundSetTooLargeError,
    SetFunction,
    WeightVector,
    bit_indices,
)
from .sfm import ConvergenceError
from .split import RateVector


def shapley_exact(f: SetFunction, limit: int = BRUTE_FORCE_LIMIT) -> RateVector:
    """Expected marginal value of each user over random arrival orders.

    r_i = sum over subsets C not containing i of
          |C|! (n-|C|-1)! / n! * (f(C + i) - f(C)),
    computed by one sweep over all 2^n subsets.  Refused above ``limit``
    elements; use :func:`shapley_sampled` there instead.
    """
    elems = bit_indices(f.ground_mask)
    c = len(elems)
    if c > limit:
        raise GroundSetTooLargeError(
            "exact Shapley needs a 2^n sweep; %d elements exceeds limit %d "
            "(use shapley_sampled)" % (c, limit))
    vals = f.all_values(elems)
    submasks = np.arange(1 << c, dtype=np.uint32)
    sizes = np.bitwise_count(submasks).astype(np.intp)
    n_fact = math.factorial(c)
    w_by_size = np.array([math.factorial(s) * math.factorial(c - s - 1) / n_fact
                          for s in range(c)])
    rates = np.zeros(f.ground.n)
    for k, e in enumerate(elems):
        bit = np.uint32(1 << k)
        without = submasks[(submasks & bit) == 0]
        marginals = vals[without | bit] - vals[without]
        rates[e] = float(w_by_size[sizes[without]] @ marginals)
    return RateVector(f.ground, rates, f.ground_mask)


def shapley_permutation_average(f: SetFunction, limit: int = 10) -> RateVector:
    """Average of the greedy vertices over all n! permutations.

    Mathematically identical to :func:`shapley_exact`; kept as an
    independent cross-check route (and for the CLI's enumerate-all mode).
    """
    elems = bit_indices(f.ground_mask)
    if len(elems) > limit:
        raise GroundSetTooLargeError(
            "full permutation enumeration refused above %d elements" % limit)
    acc = np.zeros(f.ground.n)
    count = 0
    for perm in itertools.permutations(elems):
        acc += _greedy_global(f, np.asarray(perm, dtype=np.intp))
        count += 1
    return RateVector(f.ground, acc / count, f.ground_mask)


def shapley_sampled(f: SetFunction, samples: int, seed=None):
    """Monte-Carlo Shapley estimate from uniformly sampled arrival orders.

    Returns (rates, standard_error) where standard_error has one entry per
    ground position.  The estimator is the sample mean of greedy vertices,
    unbiased for the exact value and reproducible under a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    elems = np.asarray(bit_indices(f.ground_mask), dtype=np.intp)
    rng = np.random.default_rng(seed)
    draws = np.empty((samples, f.ground.n))
    for s in range(samples):
        order = elems[rng.permutation(len(elems))]
        draws[s] = _greedy_global(f, order)
    mean = draws.mean(axis=0)
    if samples > 1:
        se = draws.std(axis=0, ddof=1) / math.sqrt(samples)
    else:
        se = np.full(f.ground.n, np.nan)
    return RateVector(f.ground, mean, f.ground_mask), se


def _greedy_global(f, order):
    vals = f.prefix_values(order)
    out = np.zeros(f.ground.n)
    out[order] = np.diff(vals)
    return out


@dataclass
class MembershipReport:
    in_region: bool
    worst_constraint: frozenset
    slack: float
    sum_gap: float

    def to_dict(self) -> dict:
        return {
            "in_region": self.in_region,
            "worst_constraint": sorted(self.worst_constraint),
            "slack": self.slack,
            "sum_gap": self.sum_gap,
        }


def verify_membership(f: SetFunction, r, tolerance: float = 1e-8,
                      limit: int = BRUTE_FORCE_LIMIT) -> MembershipReport:
    """Exhaustively check that r is an achievable allocation for f.

    Tests every lower constraint r(X) >= f(C) - f(C without X), the sum
    constraint |r(C) - f(C)| <= tolerance, and cross-checks the equivalent
    upper form r(X) <= f(X).  Reports the tightest (or most violated)
    constraint subset and its slack.
    """
    elems = bit_indices(f.ground_mask)
    c = len(elems)
    if c > limit:
        raise GroundSetTooLargeError(
            "membership verification is exhaustive; %d elements exceeds "
            "limit %d" % (c, limit))
    rates = r.rates if isinstance(r, RateVector) else np.asarray(r, dtype=float)
    vals = f.all_values(elems)
    full = (1 << c) - 1
    r_sub = np.zeros(1 << c)
    submasks = np.arange(1 << c, dtype=np.uint32)
    for k, e in enumerate(elems):
        r_sub[(submasks & np.uint32(1 << k)) != 0] += rates[e]
    sum_gap = float(r_sub[full] - vals[full])
    lower_slack = r_sub - (vals[full] - vals[full ^ submasks])
    lower_slack[0] = np.inf  # the empty set is vacuous
    upper_slack = vals - r_sub
    worst_local = int(np.argmin(lower_slack))
    min_slack = float(lower_slack[worst_local])
    in_region = (min_slack >= -tolerance
                 and float(upper_slack[1:].min(initial=np.inf)) >= -tolerance
                 and abs(sum_gap) <= tolerance)
    worst_mask = 0
    for k in bit_indices(worst_local):
        worst_mask |= 1 << elems[k]
    return MembershipReport(in_region, frozenset(f.ground.users_of(worst_mask)),
                            min_slack, sum_gap)


def exchange_capacity(f: SetFunction, r, donor: str, receiver: str,
                      limit: int = BRUTE_FORCE_LIMIT) -> float:
    """Largest rate transferable from donor to receiver while staying feasible.

    min of f(X) - r(X) over subsets X containing the receiver but not the
    donor; zero means the receiver's rate cannot be raised at the donor's
    expense.
    """
    elems = bit_indices(f.ground_mask)
    c = len(elems)
    if c > limit:
        raise GroundSetTooLargeError(
            "exchange capacity is exhaustive; %d elements exceeds limit %d"
            % (c, limit))
    rates = r.rates if isinstance(r, RateVector) else np.asarray(r, dtype=float)
    pos = {e: k for k, e in enumerate(elems)}
    bit_r = np.uint32(1 << pos[f.ground.index[receiver]])
    bit_d = np.uint32(1 << pos[f.ground.index[donor]])
    vals = f.all_values(elems)
    submasks = np.arange(1 << c, dtype=np.uint32)
    r_sub = np.zeros(1 << c)
    for k, e in enumerate(elems):
        r_sub[(submasks & np.uint32(1 << k)) != 0] += rates[e]
    sel = ((submasks & bit_r) != 0) & ((submasks & bit_d) == 0)
    return float((vals[sel] - r_sub[sel]).min())


def egalitarian_oracle_fw(f: SetFunction, w: WeightVector,
                          gap_tolerance: float = 1e-9,
                          max_iterations: int = 200000) -> RateVector:
    """Weighted egalitarian point by away-step conditional gradients.

    Minimizes sum(r_i^2 / w_i) over the base polyhedron of f, using the
    greedy vertex as the linear-minimization oracle and exact line search
    (the objective is quadratic).  Terminates when the duality gap drops
    below ``gap_tolerance``; hitting the iteration cap raises
    :class:`ConvergenceError` carrying the best iterate.
    """
    elems = np.asarray(bit_indices(f.ground_mask), dtype=np.intp)
    counting = CountingFunction(f)
    w_loc = w.values[elems]

    x = _greedy_local(counting, elems)
    atoms = {x.tobytes(): [x.copy(), 1.0]}

    for _ in range(max_iterations):
        grad = 2.0 * x / w_loc
        s = _greedy_local(counting, elems, grad)
        gap = float(grad @ (x - s))
        if gap <= gap_tolerance:
            return _to_rate_vector(f, elems, x)

        away_key = max(atoms, key=lambda k: float(grad @ atoms[k][0]))
        a, alpha_a = atoms[away_key]
        if gap >= float(grad @ (a - x)) or len(atoms) == 1:
            d = s - x
            gamma_max = 1.0
            target = s
            away = False
        else:
            d = x - a
            gamma_max = alpha_a / (1.0 - alpha_a) if alpha_a < 1.0 else np.inf
            target = a
            away = True

        quad = float(d * d @ (1.0 / w_loc))
        if quad <= 0.0:
            return _to_rate_vector(f, elems, x)
        gamma = min(max(-float(grad @ d) / (2.0 * quad), 0.0), gamma_max)
        if gamma <= 0.0:
            return _to_rate_vector(f, elems, x)

        x = x + gamma * d
        if away:
            for entry in atoms.values():
                entry[1] *= 1.0 + gamma
            atoms[away_key][1] -= gamma
            if atoms[away_key][1] <= 1e-14:
                del atoms[away_key]
        else:
            if gamma >= 1.0:
                atoms = {}
            else:
                for entry in atoms.values():
                    entry[1] *= 1.0 - gamma
            key = target.tobytes()
            if key in atoms:
                atoms[key][1] += gamma
            else:
                atoms[key] = [target.copy(), gamma]
    raise ConvergenceError(
        "conditional-gradient solver hit the iteration cap (%d)"
        % max_iterations, best=_to_rate_vector(f, elems, x))


def _greedy_local(counting, elems, direction=None):
    if direction is None:
        order = np.arange(len(elems))
    else:
        order = np.argsort(direction, kind="stable")
    pv = counting.prefix_values(elems[order])
    out = np.empty(len(elems))
    out[order] = np.diff(pv)
    return out


def _to_rate_vector(f, elems, x) -> RateVector:
    rates = np.zeros(f.ground.n)
    rates[elems] = x
    return RateVector(f.ground, rates, f.ground_mask)


def minmax_check(f: SetFunction, w: WeightVector, r, trials: int = 200,
                 seed=None, tolerance: float = 1e-9) -> bool:
    """Spot-check that r is min-max and max-min optimal in weighted ratio.

    Samples random points of the rate region (Dirichlet combinations of
    greedy vertices from random permutations) and confirms none beats r's
    largest ratio from below or r's smallest ratio from above.
    """
    elems = np.asarray(bit_indices(f.ground_mask), dtype=np.intp)
    rates = r.rates if isinstance(r, RateVector) else np.asarray(r, dtype=float)
    ratios = rates[elems] / w.values[elems]
    hi, lo = float(ratios.max()), float(ratios.min())
    rng = np.random.default_rng(seed)
    k = len(elems) + 1
    for _ in range(trials):
        verts = np.stack([
            _greedy_global(f, elems[rng.permutation(len(elems))])[elems]
            for _ in range(k)
        ])
        q = rng.dirichlet(np.ones(k)) @ verts
        q_ratios = q / w.values[elems]
        if hi > float(q_ratios.max()) + tolerance:
            return False
        if lo < float(q_ratios.min()) - tolerance:
            return False
    return True


@dataclass
class FairnessReport:
    """Side-by-side comparison of allocation methods on one source."""

    methods: dict
    max_ratio: dict
    lifetime_proxy: dict
    sum_rate: dict
    in_region: dict
    min_slack: dict

    def to_dict(self) -> dict:
        return {
            name: {
                "rates": self.methods[name].as_dict(),
                "max_ratio": self.max_ratio[name],
                "lifetime_proxy": self.lifetime_proxy[name],
                "sum_rate": self.sum_rate[name],
                "in_region": self.in_region[name],
                "min_slack": self.min_slack[name],
            }
            for name in self.methods
        }

    def to_text(self) -> str:
        lines = ["%-14s %12s %12s %12s %9s" % (
            "method", "sum_rate", "max_ratio", "lifetime", "member")]
        for name in self.methods:
            lines.append("%-14s %12.6f %12.6f %12.6f %9s" % (
                name, self.sum_rate[name], self.max_ratio[name],
                self.lifetime_proxy[name],
                "yes" if self.in_region[name] else "NO"))
        return "\n".join(lines)


def build_report(f: SetFunction, w: WeightVector, methods: dict,
                 tolerance: float = 1e-8) -> FairnessReport:
    """Assemble a :class:`FairnessReport` for named rate vectors."""
    max_ratio, lifetime, sum_rate, member, slack = {}, {}, {}, {}, {}
    for name, rv in methods.items():
        idx = bit_indices(rv.subset_mask)
        rates = rv.rates[idx]
        max_ratio[name] = float((rates / w.values[idx]).max())
        peak = float(rates.max())
        lifetime[name] = 1.0 / peak if peak > 0 else np.inf
        sum_rate[name] = rv.total()
        rep = verify_membership(f, rv, tolerance)
        member[name] = rep.in_region
        slack[name] = rep.slack
    return FairnessReport(dict(methods), max_ratio, lifetime, sum_rate,
                          member, slack)
