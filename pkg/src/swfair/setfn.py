"""Ground sets and set-function oracles.

Subsets of the ground set are encoded as integer bitmasks (bit k set means
user at position k is in the subset), which Python ints support at any
ground-set size.  All oracles are normalized, f(empty) = 0, and immutable
after construction, so they can be shared freely across concurrent solves.

Two concrete source models are provided:

* :class:`BitPoolSource` - each user observes a subset of independent random
  bits; the joint entropy of a user subset is the total entropy of the bits
  covered by it (a weighted coverage function, hence submodular and monotone).
* :class:`TableSource` - an explicit, complete table of values for every
  nonempty subset, used for arbitrary test fixtures.

Derived oracles (:func:`restrict`, :func:`reduce`, modular shifts) are
represented by a single affine wrapper so chains of reductions stay O(1)
per evaluation and keep the fast vectorized paths of the underlying source.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence

import numpy as np


class InvalidSubsetError(ValueError):
    """A subset argument mentions users outside the ground set."""


class IncompleteTableError(ValueError):
    """An explicit table source is missing entries."""


class InvalidReductionError(ValueError):
    """reduce() called with an empty or full pivot subset."""


class ModelLoadError(ValueError):
    """A source-model file could not be parsed."""


class GroundSetTooLargeError(ValueError):
    """An exhaustive (2^n) operation was requested above the size limit."""


# Exhaustive sweeps (membership checks, submodularity checks, exact Shapley)
# are refused above this many elements unless the caller raises the limit.
BRUTE_FORCE_LIMIT = 20


def bit_indices(mask: int) -> list[int]:
    """Positions of the set bits of ``mask``, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def mask_from_indices(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


class GroundSet:
    """Ordered set of distinct user identifiers with bitmask encoding."""

    __slots__ = ("users", "index", "n", "full_mask")

    def __init__(self, users: Sequence[str]):
        users = tuple(str(u) for u in users)
        if len(users) == 0:
            raise ValueError("ground set must contain at least one user")
        if len(set(users)) != len(users):
            raise ValueError("duplicate user identifiers: %r" % (users,))
        self.users = users
        self.index = {u: i for i, u in enumerate(users)}
        self.n = len(users)
        self.full_mask = (1 << self.n) - 1

    def mask_of(self, subset: Iterable[str]) -> int:
        """Bitmask of a collection of user ids; rejects unknown users."""
        mask = 0
        for u in subset:
            try:
                mask |= 1 << self.index[u]
            except KeyError:
                raise InvalidSubsetError(
                    "unknown user %r (ground set: %s)" % (u, ", ".join(self.users))
                ) from None
        return mask

    def as_mask(self, subset) -> int:
        """Coerce a subset given as a bitmask or an iterable of ids."""
        if isinstance(subset, int):
            if subset < 0 or subset & ~self.full_mask:
                raise InvalidSubsetError("mask %#x outside ground set" % subset)
            return subset
        return self.mask_of(subset)

    def users_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.users[i] for i in bit_indices(mask))

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.users)

    def __eq__(self, other):
        return isinstance(other, GroundSet) and self.users == other.users

    def __hash__(self):
        return hash(self.users)

    def __repr__(self):
        return "GroundSet(%r)" % (list(self.users),)


class SetFunction:
    """Oracle for a real-valued set function with f(empty) = 0.

    Subclasses implement :meth:`value`.  The two optional bulk entry points,
    :meth:`prefix_values` and :meth:`all_values`, have generic fallbacks here
    and vectorized overrides where the structure allows; solvers call them so
    that a fast source accelerates every solver for free.
    """

    ground: GroundSet
    ground_mask: int

    def value(self, mask: int) -> float:
        raise NotImplementedError

    def prefix_values(self, order: np.ndarray, base: int = 0) -> np.ndarray:
        """Values f(base), f(base|{o0}), f(base|{o0,o1}), ... along ``order``.

        ``order`` holds global element positions; the result has length
        len(order) + 1.
        """
        vals = np.empty(len(order) + 1)
        mask = base
        vals[0] = self.value(mask)
        for k, idx in enumerate(order):
            mask |= 1 << int(idx)
            vals[k + 1] = self.value(mask)
        return vals

    def all_values(self, elements: Sequence[int], base: int = 0) -> np.ndarray:
        """Values for every subset of ``elements``, indexed by local submask."""
        c = len(elements)
        n_sub = 1 << c
        bit_of = [1 << int(e) for e in elements]
        gmask = np.empty(n_sub, dtype=object)
        gmask[0] = base
        vals = np.empty(n_sub)
        vals[0] = self.value(base)
        for lm in range(1, n_sub):
            low = lm & -lm
            gmask[lm] = gmask[lm ^ low] | bit_of[low.bit_length() - 1]
            vals[lm] = self.value(gmask[lm])
        return vals


class CountingFunction(SetFunction):
    """Per-solve wrapper that tallies oracle evaluations.

    Counters live on the wrapper, never on the wrapped oracle, so concurrent
    solves on a shared source do not contend; callers merge tallies at join.
    """

    def __init__(self, inner: SetFunction):
        self.inner = inner
        self.ground = inner.ground
        self.ground_mask = inner.ground_mask
        self.evals = 0
        self.max_abs = 0.0

    def value(self, mask: int) -> float:
        v = self.inner.value(mask)
        self.evals += 1
        a = abs(v)
        if a > self.max_abs:
            self.max_abs = a
        return v

    def prefix_values(self, order, base: int = 0) -> np.ndarray:
        vals = self.inner.prefix_values(order, base)
        self.evals += len(vals)
        m = float(np.max(np.abs(vals))) if len(vals) else 0.0
        if m > self.max_abs:
            self.max_abs = m
        return vals

    def all_values(self, elements, base: int = 0) -> np.ndarray:
        vals = self.inner.all_values(elements, base)
        self.evals += len(vals)
        m = float(np.max(np.abs(vals))) if len(vals) else 0.0
        if m > self.max_abs:
            self.max_abs = m
        return vals


class BitPoolSource(SetFunction):
    """Entropy oracle for users observing pools of independent random bits.

    ``bits`` maps bit id -> entropy in bits (> 0); ``observes`` maps user id
    -> iterable of bit ids.  H(X) is the summed entropy of all bits observed
    by at least one user in X.
    """

    def __init__(self, ground: GroundSet, bits: Mapping[str, float],
                 observes: Mapping[str, Iterable[str]]):
        self.ground = ground
        self.ground_mask = ground.full_mask
        self.bit_ids = tuple(bits.keys())
        h = np.array([float(bits[b]) for b in self.bit_ids])
        if len(h) and h.min() <= 0.0:
            raise ValueError("bit entropies must be strictly positive")
        self.bit_entropy = h
        bit_pos = {b: j for j, b in enumerate(self.bit_ids)}
        obs = np.zeros((ground.n, len(self.bit_ids)), dtype=bool)
        for user, seen in observes.items():
            if user not in ground.index:
                raise InvalidSubsetError("observes entry for unknown user %r" % user)
            for b in seen:
                if b not in bit_pos:
                    raise ValueError("user %r observes unknown bit %r" % (user, b))
                obs[ground.index[user], bit_pos[b]] = True
        self.observes = obs

    def value(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        covered = self.observes[bit_indices(mask)].any(axis=0)
        return float(self.bit_entropy @ covered)

    def prefix_values(self, order, base: int = 0) -> np.ndarray:
        order = np.asarray(order, dtype=np.intp)
        if base:
            start = self.observes[bit_indices(base)].any(axis=0)
        else:
            start = np.zeros(self.observes.shape[1], dtype=bool)
        stack = np.vstack([start[None, :], self.observes[order]])
        covered = np.logical_or.accumulate(stack, axis=0)
        return covered @ self.bit_entropy

    def all_values(self, elements, base: int = 0) -> np.ndarray:
        c = len(elements)
        submasks = np.arange(1 << c, dtype=np.uint32)
        vals = np.zeros(1 << c)
        base_cov = (self.observes[bit_indices(base)].any(axis=0)
                    if base else np.zeros(self.observes.shape[1], dtype=bool))
        local_obs = self.observes[np.asarray(elements, dtype=np.intp)]
        for j in range(self.observes.shape[1]):
            if base_cov[j]:
                vals += self.bit_entropy[j]
                continue
            obs_local = 0
            for k in range(c):
                if local_obs[k, j]:
                    obs_local |= 1 << k
            if obs_local:
                vals[(submasks & np.uint32(obs_local)) != 0] += self.bit_entropy[j]
        return vals

    def total_entropy(self) -> float:
        return self.value(self.ground_mask)


class TableSource(SetFunction):
    """Explicit set function given by a complete table over nonempty subsets.

    Missing entries are an error at construction time rather than defaulted;
    H(empty) = 0 is implicit.
    """

    def __init__(self, ground: GroundSet, values: Mapping):
        self.ground = ground
        self.ground_mask = ground.full_mask
        table = {}
        for key, v in values.items():
            mask = ground.as_mask(key) if not isinstance(key, str) else (
                ground.mask_of(key.split(",")) if key else 0)
            if mask == 0:
                if float(v) != 0.0:
                    raise ValueError("H(empty) must be 0, got %r" % v)
                continue
            if mask in table:
                raise ValueError("duplicate table entry for %s"
                                 % (ground.users_of(mask),))
            table[mask] = float(v)
        missing = [m for m in range(1, ground.full_mask + 1) if m not in table]
        if missing:
            raise IncompleteTableError(
                "table missing %d of %d nonempty subsets, first: %s"
                % (len(missing), ground.full_mask, ground.users_of(missing[0]))
            )
        self._table = table

    def value(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        return self._table[mask]


class ShiftedFunction(SetFunction):
    """Affine view of a source oracle.

    value(X) = inner(X | pivot) - constant - sum(coeffs[i] for i in X),
    defined over ``ground_mask`` (disjoint from ``pivot``).  Restriction,
    reduction, and modular shifts are all instances of this one form, and
    composing any of them flattens back to a single layer over the source.
    """

    def __init__(self, inner: SetFunction, ground_mask: int, pivot: int,
                 constant: float, coeffs: np.ndarray | None):
        self.inner = inner
        self.ground = inner.ground
        self.ground_mask = ground_mask
        self.pivot = pivot
        self.constant = constant
        self.coeffs = coeffs

    def value(self, mask: int) -> float:
        if mask == 0:
            return 0.0
        v = self.inner.value(mask | self.pivot) - self.constant
        if self.coeffs is not None:
            v -= float(self.coeffs[bit_indices(mask)].sum())
        return v

    def prefix_values(self, order, base: int = 0) -> np.ndarray:
        order = np.asarray(order, dtype=np.intp)
        vals = self.inner.prefix_values(order, base | self.pivot) - self.constant
        if self.coeffs is not None:
            shift = np.concatenate(([0.0], np.cumsum(self.coeffs[order])))
            if base:
                shift += self.coeffs[bit_indices(base)].sum()
            vals = vals - shift
        if base == 0:
            vals[0] = 0.0
        return vals

    def all_values(self, elements, base: int = 0) -> np.ndarray:
        vals = self.inner.all_values(elements, base | self.pivot) - self.constant
        if self.coeffs is not None:
            submasks = np.arange(1 << len(elements), dtype=np.uint32)
            for k, e in enumerate(elements):
                ce = self.coeffs[int(e)]
                if ce != 0.0:
                    vals[(submasks & np.uint32(1 << k)) != 0] -= ce
            if base:
                vals -= self.coeffs[bit_indices(base)].sum()
        if base == 0:
            vals[0] = 0.0
        return vals


def _parts(f: SetFunction):
    """Decompose into (source, pivot, constant, coeffs) for flattening."""
    if isinstance(f, ShiftedFunction):
        return f.inner, f.pivot, f.constant, f.coeffs
    return f, 0, 0.0, None


def restrict(f: SetFunction, subset) -> SetFunction:
    """The same oracle viewed over a sub-ground; no values change."""
    sub = f.ground.as_mask(subset)
    if sub & ~f.ground_mask:
        raise InvalidSubsetError("restriction outside the oracle's ground")
    inner, pivot, const, coeffs = _parts(f)
    return ShiftedFunction(inner, sub, pivot, const, coeffs)


def add_modular(f: SetFunction, coeffs: np.ndarray) -> SetFunction:
    """f minus the modular function with the given per-user coefficients."""
    inner, pivot, const, old = _parts(f)
    merged = coeffs.copy() if old is None else old + coeffs
    return ShiftedFunction(inner, f.ground_mask, pivot, const, merged)


class WeightVector:
    """Strictly positive per-user weights with subset sums."""

    __slots__ = ("ground", "values")

    def __init__(self, ground: GroundSet, values):
        arr = np.asarray(values, dtype=float)
        if arr.shape != (ground.n,):
            raise ValueError("expected %d weights, got shape %s" % (ground.n, arr.shape))
        if arr.min() <= 0.0:
            raise ValueError("weights must be strictly positive")
        self.ground = ground
        self.values = arr
        self.values.setflags(write=False)

    def of_mask(self, mask: int) -> float:
        return float(self.values[bit_indices(mask)].sum())

    def __getitem__(self, user: str) -> float:
        return float(self.values[self.ground.index[user]])

    @classmethod
    def ones(cls, ground: GroundSet) -> "WeightVector":
        return cls(ground, np.ones(ground.n))


def entropy(source: SetFunction, subset) -> float:
    """H(X) of a subset of the source's ground set."""
    return source.value(source.ground.as_mask(subset))


def conditional_entropy(source: SetFunction, subset) -> float:
    """H(X | V without X) = H(V) - H(V without X)."""
    mask = source.ground.as_mask(subset)
    full = source.ground_mask
    return source.value(full) - source.value(full & ~mask)


def reduce(f: SetFunction, pivot, w: WeightVector) -> SetFunction:
    """Contract the pivot block out of f, rescaled for the complement solve.

    g(X) = f(X | pivot) - f(pivot) * (w(X)/w(pivot) + 1) over the complement
    of the pivot inside f's ground.  g(empty) = 0 exactly, and g inherits
    submodularity from f (it differs from a restriction of f by a modular
    function).
    """
    pmask = f.ground.as_mask(pivot)
    if pmask == 0 or pmask == f.ground_mask or pmask & ~f.ground_mask:
        raise InvalidReductionError(
            "pivot must be a nonempty strict subset of the oracle's ground")
    f_pivot = f.value(pmask)
    w_pivot = w.of_mask(pmask)
    inner, old_pivot, _old_const, old_coeffs = _parts(f)
    new_pivot = old_pivot | pmask
    # inner(new_pivot) equals old_const + old_modular(pmask) + f(pmask)
    # exactly, so using it as the constant pins g(empty) to 0 bit-for-bit.
    new_const = inner.value(new_pivot)
    extra = (f_pivot / w_pivot) * w.values
    merged = extra if old_coeffs is None else old_coeffs + extra
    return ShiftedFunction(inner, f.ground_mask & ~pmask, new_pivot,
                           new_const, merged)


def greedy_vertex(f: SetFunction, order) -> np.ndarray:
    """Marginal-value vector of f along a permutation of its ground.

    Returns a full-length array over the ground set; positions outside f's
    ground are 0.  The coordinates telescope to f(C), and for submodular f
    the result is a vertex of the base polyhedron.
    """
    idx = _order_indices(f, order)
    vals = f.prefix_values(idx)
    out = np.zeros(f.ground.n)
    out[idx] = np.diff(vals)
    return out


def _order_indices(f: SetFunction, order) -> np.ndarray:
    elems = bit_indices(f.ground_mask)
    if len(order) and not isinstance(order[0], (int, np.integer)):
        idx = [f.ground.index.get(u, -1) for u in order]
        if -1 in idx:
            raise InvalidSubsetError("unknown user in order: %r" % (order,))
    else:
        idx = [int(i) for i in order]
    if sorted(idx) != elems:
        raise ValueError("order is not a permutation of the oracle's ground")
    return np.asarray(idx, dtype=np.intp)


def check_submodular(f: SetFunction, limit: int = BRUTE_FORCE_LIMIT):
    """Exhaustively test diminishing returns; O(2^n * n^2), gated by size.

    Returns (True, None) or (False, (X, Y, i)) with a witness triple where
    the marginal of i onto X is strictly below its marginal onto Y despite
    X being a subset of Y.
    """
    elems = bit_indices(f.ground_mask)
    c = len(elems)
    if c > limit:
        raise GroundSetTooLargeError(
            "submodularity check is exhaustive; %d elements exceeds limit %d"
            % (c, limit))
    vals = f.all_values(elems)
    for lm in range(1 << c):
        for a in range(c):
            if lm >> a & 1:
                continue
            m_a = vals[lm | 1 << a] - vals[lm]
            for b in range(c):
                if b == a or lm >> b & 1:
                    continue
                if vals[lm | 1 << a | 1 << b] - vals[lm | 1 << b] > m_a + 1e-12:
                    X = _local_to_global(lm, elems)
                    Y = X | 1 << elems[b]
                    return False, (f.ground.users_of(X), f.ground.users_of(Y),
                                   f.ground.users[elems[a]])
    return True, None


def check_monotone(f: SetFunction, limit: int = BRUTE_FORCE_LIMIT):
    """Exhaustively test that single-element marginals are nonnegative."""
    elems = bit_indices(f.ground_mask)
    c = len(elems)
    if c > limit:
        raise GroundSetTooLargeError(
            "monotonicity check is exhaustive; %d elements exceeds limit %d"
            % (c, limit))
    vals = f.all_values(elems)
    for lm in range(1 << c):
        for a in range(c):
            if lm >> a & 1:
                continue
            if vals[lm | 1 << a] < vals[lm] - 1e-12:
                X = _local_to_global(lm, elems)
                return False, (f.ground.users_of(X), f.ground.users[elems[a]])
    return True, None


def _local_to_global(local_mask: int, elements: Sequence[int]) -> int:
    mask = 0
    for k in bit_indices(local_mask):
        mask |= 1 << elements[k]
    return mask


# ---------------------------------------------------------------------------
# Source-model JSON files
# ---------------------------------------------------------------------------

def source_from_dict(doc: Mapping) -> SetFunction:
    """Build a source model from its JSON document form."""
    try:
        kind = doc["type"]
    except (KeyError, TypeError):
        raise ModelLoadError("source model document lacks a 'type' field")
    if kind == "bit_pool":
        try:
            ground = GroundSet(doc["users"])
            return BitPoolSource(ground, doc["bits"], doc["observes"])
        except KeyError as e:
            raise ModelLoadError("bit_pool model missing field %s" % e) from None
        except (ValueError, TypeError) as e:
            raise ModelLoadError("bad bit_pool model: %s" % e) from None
    if kind == "table":
        try:
            ground = GroundSet(doc["users"])
            return TableSource(ground, doc["values"])
        except KeyError as e:
            raise ModelLoadError("table model missing field %s" % e) from None
        except IncompleteTableError:
            raise
        except (ValueError, TypeError) as e:
            raise ModelLoadError("bad table model: %s" % e) from None
    raise ModelLoadError("unknown source model type: %r" % (kind,))


def load_source(path) -> SetFunction:
    """Load a bit_pool or table source model from a JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelLoadError("invalid JSON in %s: %s" % (path, e)) from None
    return source_from_dict(doc)


def source_to_dict(source: SetFunction) -> dict:
    """Document form of a source model (inverse of :func:`source_from_dict`)."""
    if isinstance(source, BitPoolSource):
        observes = {}
        for i, user in enumerate(source.ground.users):
            seen = [source.bit_ids[j] for j in np.nonzero(source.observes[i])[0]]
            observes[user] = seen
        return {
            "type": "bit_pool",
            "users": list(source.ground.users),
            "bits": {b: float(h) for b, h in zip(source.bit_ids, source.bit_entropy)},
            "observes": observes,
        }
    if isinstance(source, TableSource):
        values = {}
        for mask in range(1, source.ground.full_mask + 1):
            key = ",".join(source.ground.users_of(mask))
            values[key] = source.value(mask)
        return {"type": "table", "users": list(source.ground.users), "values": values}
    raise TypeError("not a serializable source model: %r" % type(source).__name__)
