"""Certificate construction: weak certification, binary-search winnowing,
safe winnowing, L1 winnowing, greedy covers, and dimension computations.

The iterative procedures here make two engineering commitments:

* Determinism.  Search order is always members by class index, then
  inputs in increasing (lexicographic) order, so traces are
  bit-reproducible.
* Verification.  safe_winnow and l1_winnow check their own conclusions
  exhaustively before returning; a run that fails its check raises
  VerificationDefect rather than reporting a result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .concepts import (BooleanFunction, Certificate, ConceptClass,
                       Distribution, InputDomain, PConceptClass, RealFunction,
                       dist_inf, dist_one, distance_expected, is_isolated,
                       xor_shift)
from .errors import (DimensionCapExceeded, RejectedInputError,
                     VerificationDefect)

#: Hard cap on dimension search: sets larger than this raise instead of
#: silently truncating.
DIMENSION_CAP = 12


def ceil_log(value: int, base_num: int, base_den: int = 1) -> int:
    """Smallest integer t with (base_num/base_den)^t >= value, exactly."""
    if value <= 1:
        return 0
    t = 0
    num, den = 1, 1
    while num < value * den:
        num *= base_num
        den *= base_den
        t += 1
    return t


# ---------------------------------------------------------------------------
# Binary-search winnowing and weak certification
# ---------------------------------------------------------------------------

def binary_search_winnow(S: ConceptClass) -> tuple:
    """Winnow S down to a single function by halving.

    At each step: take the lexicographically smallest input on which the
    survivors disagree; pin it to 0 if that at least halves the survivor
    count, else pin it to 1.  Either branch halves, so at most
    ceil(log2 |S|) assignments are added.  Returns (f, C) with S[C] = {f}.
    """
    C = Certificate.empty(S.domain)
    survivors = list(S)
    V = np.stack([f.values() for f in survivors]) if len(survivors) > 1 else None
    while len(survivors) > 1:
        sums = V.sum(axis=0, dtype=np.int64)
        splits = np.nonzero((sums > 0) & (sums < len(survivors)))[0]
        assert len(splits) > 0, "distinct members must disagree somewhere"
        split_x = int(splits[0])
        zero_count = len(survivors) - int(sums[split_x])
        bit = 0 if 2 * zero_count <= len(survivors) else 1
        C = C.extended(split_x, bit)
        keep = V[:, split_x] == bit
        survivors = [f for f, k in zip(survivors, keep) if k]
        V = V[keep]
    return survivors[0], C


@dataclass(frozen=True)
class WeakCertifyResult:
    """A member isolated by a small certificate and agreeing with the
    target on at least 90% of the distribution's mass."""

    f: BooleanFunction
    C: Certificate
    error_mass: float

    def validate(self, S: ConceptClass) -> None:
        if not is_isolated(S, self.C, self.f):
            raise VerificationDefect("weak certify result is not isolated")
        if self.error_mass > 0.1 + 1e-15:
            raise VerificationDefect(f"error mass {self.error_mass} exceeds 1/10")


def weak_certify(S: ConceptClass, f_star: BooleanFunction, D: Distribution) -> WeakCertifyResult:
    """Find (f, C) with S[C] = {f} and Pr_{x~D}[f != f_star] <= 1/10.

    Stage 1 works in the XOR-shifted class where the target is the zero
    function.  A member is "heavy" when its weight Pr_D[f(x)=1] exceeds
    0.1; pinning input x to 0 kills every surviving member with f(x)=1.
    The greedy step picks the input killing the most surviving heavy
    members (ties to the smallest input).  Averaging over x ~ D shows the
    best input kills more than a tenth of the heavy survivors, so at most
    ceil(log_{10/9} |S|) pins are needed; the greedy choice is a
    derandomization of the probabilistic existence argument and meets the
    same bound.  Stage 2 isolates one survivor by binary search, adding
    at most ceil(log2 |S|) more pins.
    """
    idx = S.index_of(f_star)
    shifted = xor_shift(S, f_star)
    zero = shifted[idx]
    assert zero.bits == 0

    V = shifted.value_matrix().astype(np.int64)
    weights = V @ D.weights
    survivor_mask = np.ones(len(shifted), dtype=bool)
    heavy_weight = weights > 0.1
    pinned = np.zeros(S.domain.size, dtype=bool)
    C_sh = Certificate.empty(S.domain)
    t_bound = ceil_log(len(S), 10, 9)
    steps = 0
    while True:
        heavy = survivor_mask & heavy_weight
        if not heavy.any():
            break
        kills = V[heavy].sum(axis=0)
        kills[pinned] = -1
        best_x = int(np.argmax(kills))  # ties resolve to the smallest input
        if kills[best_x] <= 0:
            raise VerificationDefect("no input kills any heavy member")
        C_sh = C_sh.extended(best_x, 0)
        pinned[best_x] = True
        survivor_mask &= V[:, best_x] == 0
        steps += 1
        if steps > t_bound:
            raise VerificationDefect("stage-1 greedy exceeded its log_{10/9} bound")
    survivors = [i for i in range(len(shifted)) if survivor_mask[i]]

    surviving_class = ConceptClass(S.domain, (shifted[i] for i in survivors))
    f_sh, C2 = binary_search_winnow(surviving_class)
    merged = C_sh
    for x, b in C2.assignments:
        merged = merged.extended(x, b)

    C = merged.xor_shifted(f_star)
    f = f_sh.xor(f_star)
    error = distance_expected(f.to_real(), f_star.to_real(), D)
    result = WeakCertifyResult(f=f, C=C, error_mass=error)
    result.validate(S)
    if C.size > t_bound + ceil_log(len(S), 2):
        raise VerificationDefect("certificate exceeds combined size bound")
    return result


def isolate_member(S: ConceptClass, f: BooleanFunction) -> Certificate:
    """Smallest-first greedy certificate pinning S down to the given f.

    Unlike binary_search_winnow this isolates a *chosen* member, so no
    logarithmic size bound applies (point-function classes force size
    2^n - 1 for the zero function).
    """
    S.index_of(f)
    C = Certificate.empty(S.domain)
    survivors = [g for g in S]
    while len(survivors) > 1:
        for x in S.domain.inputs():
            if any(g(x) != f(x) for g in survivors):
                C = C.extended(x, f(x))
                survivors = [g for g in survivors if g(x) == f(x)]
                break
        else:
            raise VerificationDefect("distinct survivors agree everywhere")
    return C


# ---------------------------------------------------------------------------
# Covers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverResult:
    """A subset of S within sup-distance epsilon of every member."""

    cover: PConceptClass
    epsilon: float

    def validate(self, S: PConceptClass) -> None:
        for g in self.cover:
            if g not in S:
                raise RejectedInputError("cover member outside the class")
        for f in S:
            if not any(dist_inf(f, g) <= self.epsilon for g in self.cover):
                raise RejectedInputError("cover does not cover the class")

    @property
    def k(self) -> float:
        """log2 |cover|, the halving budget of safe winnowing."""
        return math.log2(len(self.cover))


def epsilon_cover(S: PConceptClass, eps: float) -> CoverResult:
    """Greedy cover: repeatedly add the member covering the most
    still-uncovered members (ties to the lowest index)."""
    if eps < 0:
        raise RejectedInputError("epsilon must be non-negative")
    V = S.value_matrix()
    # covers[i, j] = member i covers member j
    covers = (np.abs(V[:, None, :] - V[None, :, :]).max(axis=2) <= eps)
    uncovered = np.ones(len(S), dtype=bool)
    chosen = []
    while uncovered.any():
        gains = (covers & uncovered[None, :]).sum(axis=1)
        i = int(np.argmax(gains))  # argmax takes the lowest index on ties
        chosen.append(i)
        uncovered &= ~covers[i]
    chosen.sort()
    return CoverResult(cover=PConceptClass(S.domain, [S[i] for i in chosen]), epsilon=eps)


# ---------------------------------------------------------------------------
# Dimensions
# ---------------------------------------------------------------------------

def _shattered_sets_of_size(V: np.ndarray, candidates: list, size: int) -> list:
    """Filter candidate input tuples to those shattered by the 0/1 matrix V."""
    if not candidates:
        return []
    if V.shape[0] < (1 << size):
        return []
    weights = (1 << np.arange(size)).astype(np.int64)
    cand = np.asarray(candidates, dtype=np.intp)  # (n_cand, size)
    codes = V.astype(np.int64)[:, cand]           # (|S|, n_cand, size)
    packed = codes @ weights                      # (|S|, n_cand)
    packed.sort(axis=0)
    distinct = 1 + (np.diff(packed, axis=0) != 0).sum(axis=0)
    mask = distinct == (1 << size)
    return [candidates[i] for i in np.nonzero(mask)[0]]


def vc_dim(S: ConceptClass, cap: int = DIMENSION_CAP) -> int:
    """Exact VC dimension by level-wise brute force.

    Shattered sets are closed under subsets, so candidates of size s+1
    are built only from shattered sets of size s (apriori pruning).
    Raises DimensionCapExceeded if sets of size ``cap`` still shatter.
    """
    V = S.value_matrix()
    n_inputs = S.domain.size
    shattered = [()]  # the empty set is trivially shattered
    dim = 0
    while True:
        size = dim + 1
        cand = []
        seen = set()
        for A in shattered:
            start = A[-1] + 1 if A else 0
            for x in range(start, n_inputs):
                B = A + (x,)
                if B not in seen:
                    seen.add(B)
                    cand.append(list(B))
        good = _shattered_sets_of_size(V, cand, size)
        if not good:
            return dim
        dim = size
        if dim >= cap:
            raise DimensionCapExceeded(cap)
        shattered = [tuple(A) for A in good]


def _margin_pairs(values: np.ndarray, gamma: float) -> list:
    """Candidate (low-set, high-set) witness splits at one input.

    A witness level r yields low = {f: f(x) <= r - gamma} and
    high = {f: f(x) >= r + gamma}.  Any real r with both sides non-empty
    is dominated (low equal, high no smaller) by the level anchored at
    v_a + gamma where v_a is the largest member value at most r - gamma,
    so levels anchored at member values form a sufficient witness grid
    for finite classes.  Among anchors sharing a high set only the one
    with the largest low set is kept.
    """
    m = len(values)
    vals = [float(v) for v in values]
    order = sorted(range(m), key=lambda i: vals[i])
    anchors = sorted(set(vals))
    raw = []
    for va in anchors:
        low = 0
        high = 0
        for i in order:
            if vals[i] <= va:
                low |= 1 << i
            if vals[i] >= va + 2.0 * gamma:
                high |= 1 << i
        if low and high:
            raw.append((low, high))
    pairs = []
    for j, (low, high) in enumerate(raw):
        # low grows with the anchor, so the last pair of each high run wins
        if j + 1 < len(raw) and raw[j + 1][1] == high:
            continue
        pairs.append((low, high))
    return pairs


def _fat_shatters(V: np.ndarray, A: list, gamma: float, pair_cache: dict) -> bool:
    """Is the input set A gamma-shattered by the class with value matrix V?"""
    options = []
    for x in A:
        if x not in pair_cache:
            pair_cache[x] = _margin_pairs(V[:, x], gamma)
        pairs = pair_cache[x]
        if not pairs:
            return False
        options.append(pairs)

    full = (1 << V.shape[0]) - 1

    def descend(depth: int, intersections: list) -> bool:
        if depth == len(A):
            return True
        for low, high in options[depth]:
            nxt = []
            ok = True
            for mask in intersections:
                a = mask & low
                b = mask & high
                if not a or not b:
                    ok = False
                    break
                nxt.append(a)
                nxt.append(b)
            if ok and descend(depth + 1, nxt):
                return True
        return False

    return descend(0, [full])


def fat_shattering_dim(S: PConceptClass, gamma: float, cap: int = DIMENSION_CAP) -> int:
    """Exact gamma-fat-shattering dimension by level-wise brute force.

    Witness levels are searched over the midpoint grid described in
    _margin_pairs, which is sufficient for finite classes.  Same cap
    discipline as vc_dim.
    """
    if not gamma > 0:
        raise RejectedInputError("gamma must be positive")
    V = S.value_matrix()
    n_inputs = S.domain.size
    pair_cache: dict = {}
    shattered = [()]
    dim = 0
    while True:
        size = dim + 1
        seen = set()
        good = []
        for A in shattered:
            start = A[-1] + 1 if A else 0
            for x in range(start, n_inputs):
                B = A + (x,)
                if B in seen:
                    continue
                seen.add(B)
                if _fat_shatters(V, list(B), gamma, pair_cache):
                    good.append(B)
        if not good:
            return dim
        dim = size
        if dim >= cap:
            raise DimensionCapExceeded(cap)
        shattered = good


# ---------------------------------------------------------------------------
# Safe winnowing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SafeWinnowStep:
    """One iteration of safe winnowing: the split input, which side was
    kept, whether f moved to g, and the surviving cover-intersection size."""

    z: int
    branch: str  # "low" or "high"
    replaced: bool
    cover_survivors: int


@dataclass(frozen=True)
class SafeWinnowResult:
    f: RealFunction
    Z: frozenset
    trace: tuple

    def z_count(self) -> int:
        return len(self.Z)


def safe_winnow(S: PConceptClass, f_star: RealFunction, Y: Iterable[int], eps: float,
                cover: CoverResult) -> SafeWinnowResult:
    """Safely isolate a function of S under sup-norm constraints.

    Iteratively maintains (S_t, f_t, constraint set); whenever some g in
    S_t agrees with f_t within delta = eps/(5k) on Y and the added points
    yet differs by more than 3*eps somewhere, the class is split at the
    midpoint value v of the disagreement input and the half with the
    *smaller* cover-intersection is kept (that is what halves the cover
    intersection and caps |Z| at k = log2 |cover|).  Search order: members
    by index, inputs in increasing order.

    Postconditions, verified exhaustively before returning:
      (i)  every g in S with sup-dist <= delta from f on Y u Z has
           sup-dist <= 3*eps from f everywhere;
      (ii) f agrees with f_star within eps/5 on Y.

    A singleton cover makes k = 0; delta is then eps/5 (k treated as
    max(k, 1)), sound because the loop body never runs with one cover
    survivor.
    """
    if not eps > 0:
        raise RejectedInputError("eps must be positive")
    S.index_of(f_star)
    cover.validate(S)
    Y = frozenset(S.domain.check_input(x) for x in Y)

    k = max(cover.k, 1.0)
    delta = eps / (5.0 * k)

    cover_keys = {g.key() for g in cover.cover}
    current = list(S)
    f_t = f_star
    Z: set = set()
    trace = []

    def cover_count(members) -> int:
        return sum(1 for g in members if g.key() in cover_keys)

    while cover_count(current) > 1:
        constraint = Y | Z
        found = None
        for g in current:
            if dist_inf(f_t, g, constraint) > delta:
                continue
            for z in S.domain.inputs():
                if abs(f_t(z) - g(z)) > 3.0 * eps:
                    found = (g, z)
                    break
            if found:
                break
        if found is None:
            break
        g, z = found
        Z.add(z)
        v = 0.5 * (f_t(z) + g(z))
        low = [h for h in current if h(z) < v]
        high = [h for h in current if h(z) >= v]
        if cover_count(low) < cover_count(high):
            kept, branch = low, "low"
        else:
            kept, branch = high, "high"
        replaced = False
        if not any(h.key() == f_t.key() for h in kept):
            f_t = g
            replaced = True
        current = kept
        trace.append(SafeWinnowStep(z=z, branch=branch, replaced=replaced,
                                    cover_survivors=cover_count(current)))

    result = SafeWinnowResult(f=f_t, Z=frozenset(Z), trace=tuple(trace))

    # exhaustive postcondition check over S x domain
    if len(result.Z) > cover.k + 1e-12:
        raise VerificationDefect("safe winnow added more points than log2|cover|")
    constraint = Y | result.Z
    for g in S:
        if dist_inf(result.f, g, constraint) <= delta and dist_inf(result.f, g) > 3.0 * eps:
            raise VerificationDefect("safe winnow conclusion (i) fails")
    if dist_inf(result.f, f_star, Y) > eps / 5.0:
        raise VerificationDefect("safe winnow conclusion (ii) fails")
    return result


# ---------------------------------------------------------------------------
# L1 winnowing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class L1WinnowStep:
    y: int
    replaced: bool
    progress: float


@dataclass(frozen=True)
class L1WinnowResult:
    f: RealFunction
    X: frozenset
    progress_log: tuple  # M values, starting with the initial |cover|

    def steps(self) -> tuple:
        return self.progress_log


def l1_winnow(S: PConceptClass, eps: float, cover: CoverResult,
              trace_out: Optional[list] = None) -> L1WinnowResult:
    """Winnow under L1 constraints via the exponential progress measure.

    Weight each cover member h by P_{f,X}(h) = exp(-Delta_1(f,h)[X]) and
    track M_{f,X}, the sum of those weights.  While some g in S has
    weight at least e^{-0.4 eps} under (f, X) yet |f(y)-g(y)| > 2 eps at
    some input y, adjoin y and move to whichever of (f, X u {y}),
    (g, X u {y}) has the smaller measure.  Each step shrinks M by a
    factor below 1 - eps/20, which bounds |X| by O(log|cover| / eps).

    Postcondition, verified exhaustively: every g in S with
    Delta_1(f,g)[X] <= 0.4 eps has sup-distance <= 2 eps from f.
    """
    if not eps > 0:
        raise RejectedInputError("eps must be positive")
    cover.validate(S)

    f = S[0]  # the source construction starts anywhere; lowest index is canonical
    X: set = set()

    def measure(candidate: RealFunction, points: set) -> float:
        return float(sum(math.exp(-dist_one(candidate, h, points)) for h in cover.cover))

    M = measure(f, X)
    log = [M]
    steps = []
    threshold = 0.4 * eps
    while True:
        found = None
        for g in S:
            if g.key() == f.key():
                continue
            if dist_one(f, g, X) > threshold:
                continue
            for y in S.domain.inputs():
                if abs(f(y) - g(y)) > 2.0 * eps:
                    found = (g, y)
                    break
            if found:
                break
        if found is None:
            break
        g, y = found
        Xn = X | {y}
        M_f = measure(f, Xn)
        M_g = measure(g, Xn)
        if M_g < M_f:
            f, M_new, replaced = g, M_g, True
        else:
            M_new, replaced = M_f, False
        if M_new >= (1.0 - eps / 20.0) * M:
            raise VerificationDefect("L1 winnow step failed to shrink the measure")
        X = Xn
        M = M_new
        log.append(M)
        steps.append(L1WinnowStep(y=y, replaced=replaced, progress=M))

    result = L1WinnowResult(f=f, X=frozenset(X), progress_log=tuple(log))
    if trace_out is not None:
        trace_out.extend(steps)

    for g in S:
        if dist_one(result.f, g, result.X) <= threshold and dist_inf(result.f, g) > 2.0 * eps:
            raise VerificationDefect("L1 winnow postcondition fails")
    return result


# ---------------------------------------------------------------------------
# The L2 impossibility family
# ---------------------------------------------------------------------------

class L2Family:
    """The family of step functions f(x) = a_x / n with non-negative
    integer numerators summing to n^2 (so each a_x <= n).

    ``corrupt`` realizes the witness that no L2 analogue of L1 winnowing
    can hold: it perturbs f into another family member that is within
    1/sqrt(n) of f in L2 over the observed set X yet at sup-distance
    exactly 1.
    """

    def __init__(self, n: int):
        if n < 2:
            raise RejectedInputError("family requires n >= 2")
        self.n = n
        self.domain = InputDomain(n)

    def member(self, numerators) -> RealFunction:
        arr = np.asarray(list(numerators), dtype=np.int64)
        if arr.shape != (self.domain.size,):
            raise RejectedInputError("need one numerator per input")
        if np.any(arr < 0) or np.any(arr > self.n) or int(arr.sum()) != self.n * self.n:
            raise RejectedInputError("numerators must lie in [0,n] and sum to n^2")
        return RealFunction(self.domain, arr / float(self.n))

    def enumerate_class(self) -> PConceptClass:
        """Explicit enumeration; feasible only for n <= 3."""
        if self.n > 3:
            raise RejectedInputError("explicit enumeration only for n <= 3; sample instead")
        members = []
        size = self.domain.size
        target = self.n * self.n

        def rec(pos: int, remaining: int, acc: list):
            if pos == size:
                if remaining == 0:
                    members.append(self.member(acc))
                return
            slots_left = size - pos - 1
            lo = max(0, remaining - slots_left * self.n)
            hi = min(self.n, remaining)
            for a in range(lo, hi + 1):
                rec(pos + 1, remaining - a, acc + [a])

        rec(0, target, [])
        return PConceptClass(self.domain, members)

    def sample_member(self, rng: np.random.Generator) -> RealFunction:
        """Random member: n^2 unit increments at uniform inputs, redrawing
        any input already holding n increments."""
        arr = np.zeros(self.domain.size, dtype=np.int64)
        for _ in range(self.n * self.n):
            while True:
                x = int(rng.integers(self.domain.size))
                if arr[x] < self.n:
                    arr[x] += 1
                    break
        return self.member(arr)

    def sample_class(self, count: int, rng: np.random.Generator) -> PConceptClass:
        return PConceptClass(self.domain, [self.sample_member(rng) for _ in range(count)])

    def corrupt(self, f: RealFunction, X: Iterable[int]) -> RealFunction:
        """Return g in the family with Delta_2(f,g)[X] <= 1/sqrt(n) and
        Delta_inf(f,g) = 1.

        Z is the first n inputs where f > 0; y is the first input outside
        X where f = 0 (it exists whenever |X| < 2^n - n^2, and may exist
        for larger X too; absence is rejected).
        """
        if f.domain != self.domain:
            raise RejectedInputError("function from a different domain")
        Xs = {self.domain.check_input(x) for x in X}
        Z = [x for x in self.domain.inputs() if f(x) > 0.0][: self.n]
        assert len(Z) == self.n, "sum n of values <= 1 forces >= n positive inputs"
        y = next((x for x in self.domain.inputs() if x not in Xs and f(x) == 0.0), None)
        if y is None:
            raise RejectedInputError(
                "no unobserved zero of f: pigeonhole precondition |X| < 2^n - n^2 violated")
        numer = np.rint(f.table * self.n).astype(np.int64)
        numer[y] = self.n
        for x in Z:
            numer[x] -= 1
        return self.member(numer)


def l2_counterexample(n: int) -> L2Family:
    """The generator/corruptor pair witnessing L2 non-winnowability."""
    return L2Family(n)
