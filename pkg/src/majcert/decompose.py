"""Majority-certificates decompositions: Boolean, robust, and real-valued,
plus the untrusted-oracle evaluator and the sample-complexity check.

Construction is Monte Carlo against an optimal game strategy, but every
returned decomposition has had its defining property verified
exhaustively over the whole domain; a decomposition object in hand is
proof, not evidence.  Where an asymptotic bound would need an unknown
constant, a verify-then-escalate schedule replaces it, so the guarantees
rest on the exact checks rather than on the constants.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .concepts import (BooleanFunction, ConceptClass, Distribution,
                       PConceptClass, RealFunction, dist_inf,
                       distance_expected, is_isolated, pointwise_majority)
from .errors import (RejectedInputError, RetriesExhausted, VerificationDefect)
from .games import AliceStrategy, double_oracle_solve, solve_zero_sum
from .rng import substream
from .winnow import epsilon_cover, fat_shattering_dim, safe_winnow

FAIL = "FAIL"


def smallest_odd_at_least(x: float) -> int:
    m = max(1, math.ceil(x))
    return m if m % 2 == 1 else m + 1


# ---------------------------------------------------------------------------
# Boolean decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MajorityDecomposition:
    """m certificates pinning down m members whose pointwise majority is
    exactly the target."""

    target: BooleanFunction
    certs: tuple
    funcs: tuple
    m: int

    def __post_init__(self):
        if self.m != len(self.certs) or self.m != len(self.funcs):
            raise RejectedInputError("m must match the support length")
        if self.m % 2 == 0:
            raise RejectedInputError("m must be odd")

    def majority(self) -> BooleanFunction:
        return pointwise_majority(list(self.funcs))

    def validate(self, S: ConceptClass) -> None:
        for cert, f in zip(self.certs, self.funcs):
            if not is_isolated(S, cert, f):
                raise VerificationDefect("decomposition slot is not isolated")
        if self.majority().bits != self.target.bits:
            raise VerificationDefect("pointwise majority differs from target")

    def max_certificate_size(self) -> int:
        return max(c.size for c in self.certs)


@dataclass(frozen=True)
class RobustDecomposition:
    """Majority decomposition with approximate-majority margins: slot sums
    reach at least ceil(2m/3) on target-1 inputs and at most floor(m/3)
    on target-0 inputs."""

    target: BooleanFunction
    certs: tuple
    funcs: tuple
    m: int

    def __post_init__(self):
        if self.m != len(self.certs) or self.m != len(self.funcs):
            raise RejectedInputError("m must match the support length")
        if self.m % 2 == 0:
            raise RejectedInputError("m must be odd")

    @property
    def upper_threshold(self) -> int:
        return math.ceil(2 * self.m / 3)

    @property
    def lower_threshold(self) -> int:
        return math.floor(self.m / 3)

    def slot_sums(self) -> np.ndarray:
        total = np.zeros(self.target.domain.size, dtype=np.int64)
        for f in self.funcs:
            total += f.values()
        return total

    def validate(self, S: ConceptClass) -> None:
        for cert, f in zip(self.certs, self.funcs):
            if not is_isolated(S, cert, f):
                raise VerificationDefect("decomposition slot is not isolated")
        sums = self.slot_sums()
        star = self.target.values()
        for x in self.target.domain.inputs():
            if star[x] == 1 and sums[x] < self.upper_threshold:
                raise VerificationDefect(f"margin failure at input {x}: sum {sums[x]}")
            if star[x] == 0 and sums[x] > self.lower_threshold:
                raise VerificationDefect(f"margin failure at input {x}: sum {sums[x]}")

    def margin_histogram(self) -> dict:
        sums = self.slot_sums()
        hist: Counter = Counter(int(s) for s in sums)
        return dict(sorted(hist.items()))


def _sample_verified(S: ConceptClass, f_star: BooleanFunction, strategy: AliceStrategy,
                     m: int, seed: int, attempts: int, stream: int, check) -> Optional[tuple]:
    for attempt in range(attempts):
        rng = substream(seed, stream, attempt)
        pairs = strategy.sample_pairs(rng, m)
        certs = tuple(c for c, _ in pairs)
        funcs = tuple(f for _, f in pairs)
        if check(funcs):
            return certs, funcs
    return None


def majority_certificates(S: ConceptClass, f_star: BooleanFunction,
                          seed: int = 0) -> MajorityDecomposition:
    """Draw m = smallest odd >= 20n slots i.i.d. from the 0.9-optimal game
    strategy and keep the first draw whose majority reproduces the target
    exactly on all 2^n inputs (64 attempts, then one m-doubling)."""
    strategy = double_oracle_solve(S, f_star)
    n = S.domain.n
    m = 1 if len(S) == 1 else smallest_odd_at_least(20 * n)

    star_bits = f_star.bits

    def check(funcs) -> bool:
        return pointwise_majority(list(funcs)).bits == star_bits

    for stream, m_try in enumerate((m, smallest_odd_at_least(2 * m))):
        got = _sample_verified(S, f_star, strategy, m_try, seed, 64, stream, check)
        if got is not None:
            decomposition = MajorityDecomposition(target=f_star, certs=got[0],
                                                  funcs=got[1], m=m_try)
            decomposition.validate(S)
            return decomposition
    raise RetriesExhausted("majority sampling",
                           "no verified majority in 64 attempts at m and 2m")


def robust_majority_certificates(S: ConceptClass, f_star: BooleanFunction,
                                 seed: int = 0) -> RobustDecomposition:
    """As majority_certificates with m = smallest odd >= 60n and the
    2m/3 - m/3 margins verified exhaustively."""
    strategy = double_oracle_solve(S, f_star)
    n = S.domain.n
    m = 1 if len(S) == 1 else smallest_odd_at_least(60 * n)
    star = f_star.values()

    def check(funcs) -> bool:
        sums = np.zeros(S.domain.size, dtype=np.int64)
        for f in funcs:
            sums += f.values()
        m_cur = len(funcs)
        hi = math.ceil(2 * m_cur / 3)
        lo = math.floor(m_cur / 3)
        return bool(np.all(np.where(star == 1, sums >= hi, sums <= lo)))

    for stream, m_try in enumerate((m, smallest_odd_at_least(2 * m))):
        got = _sample_verified(S, f_star, strategy, m_try, seed, 64, stream + 2, check)
        if got is not None:
            decomposition = RobustDecomposition(target=f_star, certs=got[0],
                                                funcs=got[1], m=m_try)
            decomposition.validate(S)
            return decomposition
    raise RetriesExhausted("robust majority sampling",
                           "no verified margins in 64 attempts at m and 2m")


def untrusted_oracle_evaluate(D: RobustDecomposition, claims: Sequence[BooleanFunction],
                              x: int):
    """Evaluate the target at x from untrusted per-slot claims.

    Any claim inconsistent with its certificate yields FAIL; otherwise
    the answer is the (approximate-)majority bit of the claims at x.
    When every claim actually belongs to the decomposition's class,
    consistency forces each claim to equal its slot function, so the
    output is never the wrong bit.
    """
    if len(claims) != D.m:
        raise RejectedInputError(f"expected {D.m} claims, got {len(claims)}")
    D.target.domain.check_input(x)
    for cert, claim in zip(D.certs, claims):
        if not cert.consistent(claim):
            return FAIL
    total = sum(claim(x) for claim in claims)
    return 1 if 2 * total >= D.m else 0


# ---------------------------------------------------------------------------
# Occam / sample-size machinery shared by the real decomposition
# ---------------------------------------------------------------------------

def occam_implication_holds(S: PConceptClass, f: RealFunction, D: Distribution,
                            eps: float, X: Iterable[int]) -> bool:
    """Exhaustive test: every h in S with sup-dist <= eps from f on X is
    within 11*eps of f in D-weighted L1."""
    Xs = set(X)
    for h in S:
        if dist_inf(h, f, Xs) <= eps and distance_expected(h, f, D) > 11.0 * eps:
            return False
    return True


def occam_check(S: PConceptClass, f: RealFunction, D: Distribution, eps: float,
                m: int, trials: int, seed: int = 0) -> float:
    """Fraction of i.i.d. m-samples X from D for which the Occam
    implication above holds over all of S."""
    if f not in S:
        raise RejectedInputError("hypothesis target must belong to the class")
    passed = 0
    for t in range(trials):
        rng = substream(seed, 5, t)
        X = set(int(x) for x in D.sample(rng, m)) if m > 0 else set()
        if occam_implication_holds(S, f, D, eps, X):
            passed += 1
    return passed / trials if trials else 0.0


def schedule_start(fat: int, beta: float) -> int:
    """Initial sample size of the doubling schedule: 4*fat*ceil(ln^2(1/beta))+8."""
    return 4 * max(fat, 1) * math.ceil(math.log(1.0 / beta) ** 2) + 8


def find_valid_sample_size(S: PConceptClass, f_star: RealFunction, D: Distribution,
                           beta: float, seed: int, stream: tuple = (),
                           fat: Optional[int] = None, start: Optional[int] = None,
                           max_doublings: int = 40) -> tuple:
    """Run the doubling schedule until a sampled constraint set validates.

    Returns (M, Y): the first size at which one of 8 seeded draws Y
    satisfies the exhaustive check that sup-closeness beta on Y forces
    D-mean closeness 11*beta, together with that Y.
    """
    if start is None:
        if fat is None:
            fat = fat_shattering_dim(S, beta)
        start = schedule_start(fat, beta)
    M = start
    for doubling in range(max_doublings):
        for r in range(8):
            rng = substream(seed, 6, *stream, doubling, r)
            Y = frozenset(int(x) for x in D.sample(rng, M))
            if occam_implication_holds(S, f_star, D, beta, Y):
                return M, Y
        M *= 2
    raise RetriesExhausted("stage-1 sample validation",
                           f"no valid sample up to {max_doublings} doublings")


# ---------------------------------------------------------------------------
# Real-valued decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealDecomposition:
    """m (function, constraint-set) slots whose slot-wise admissible
    averages stay within eps of the target in sup-norm."""

    target: RealFunction
    funcs: tuple
    points: tuple  # of frozenset, one per slot
    alpha: float
    m: int
    eps: float
    realized_t: float = 1.0

    def __post_init__(self):
        if self.m != len(self.funcs) or self.m != len(self.points):
            raise RejectedInputError("m must match the slot count")
        if self.alpha < 0 or self.eps < 0:
            raise RejectedInputError("alpha and eps must be non-negative")
        object.__setattr__(self, "points", tuple(frozenset(p) for p in self.points))

    def slot_certificate(self, i: int):
        """Slot i as a real certificate: match f_i on X_i within alpha."""
        from .concepts import RealCertificate
        f_i, X_i = self.funcs[i], self.points[i]
        return RealCertificate(self.target.domain, X_i,
                               tuple((x, f_i(x)) for x in sorted(X_i)),
                               max(self.alpha, 1e-300))


def slot_envelope(S: PConceptClass, f_i: RealFunction, X_i: frozenset,
                  alpha: float) -> Optional[tuple]:
    """Pointwise (min, max) over the admissible slot set
    {g in S : sup-dist(f_i, g) <= alpha on X_i}; None when empty."""
    V = S.value_matrix()
    xs = sorted(X_i)
    if xs:
        mask = np.max(np.abs(V[:, xs] - f_i.table[xs][None, :]), axis=1) <= alpha
    else:
        mask = np.ones(len(S), dtype=bool)
    if not mask.any():
        return None
    sub = V[mask]
    return sub.min(axis=0), sub.max(axis=0)


def verify_real_decomposition(S: PConceptClass, D: RealDecomposition) -> bool:
    """Exact check of the decomposition guarantee over finite S.

    Slot choices decouple, so the extreme averages are the means of the
    per-slot pointwise extremes; the guarantee holds iff both extreme
    averages stay within eps of the target everywhere, and fails too if
    any slot admits no member at all.
    """
    groups: Counter = Counter()
    keyed = {}
    for f_i, X_i in zip(D.funcs, D.points):
        key = (f_i.key(), X_i)
        groups[key] += 1
        keyed[key] = (f_i, X_i)
    size = D.target.domain.size
    lo_sum = np.zeros(size)
    hi_sum = np.zeros(size)
    for key, count in groups.items():
        f_i, X_i = keyed[key]
        env = slot_envelope(S, f_i, X_i, D.alpha)
        if env is None:
            return False
        lo_sum += count * env[0]
        hi_sum += count * env[1]
    lo = lo_sum / D.m
    hi = hi_sum / D.m
    dev = np.maximum(np.abs(D.target.table - hi), np.abs(D.target.table - lo))
    return bool(np.all(dev <= D.eps))


@dataclass(frozen=True)
class RealSlotStrategy:
    """One Alice pure strategy of the real game: a member plus its
    constraint set, with the realized winnowing parameters."""

    f: RealFunction
    X: frozenset
    alpha: float
    t: float
    sample_size: int
    penalties: np.ndarray = field(compare=False)


def _real_alice_response(S: PConceptClass, f_star: RealFunction, D: Distribution,
                         beta: float, eps: float, seed: int, stream: int,
                         fat: int) -> RealSlotStrategy:
    """Best-response generator of the real game.

    Stage 1 draws a validated constraint sample Y from D (doubling
    schedule).  Stage 2 safe-winnows the surviving subclass at tolerance
    4*beta, yielding (f, Z) and the realized alpha = 0.4*beta/t with
    t = max(log2 of the 4*beta-cover size, 1).  The candidate strategy is
    kept only if its exactly-measured expected penalty against D is at
    most eps/2; otherwise the sample size doubles and the stage reruns.
    """
    V = S.value_matrix()
    star = f_star.table
    base = schedule_start(fat, beta)
    for escalation in range(12):
        M, Y = find_valid_sample_size(S, f_star, D, beta, seed,
                                      stream=(stream, escalation), fat=fat,
                                      start=base * (2 ** escalation))

        survivors = [g for g in S if dist_inf(f_star, g, Y) <= beta]
        S_prime = PConceptClass(S.domain, survivors)
        cover = epsilon_cover(S_prime, 4.0 * beta)
        t = max(math.log2(len(cover.cover)), 1.0)
        winnowed = safe_winnow(S_prime, f_star, Y, 4.0 * beta, cover)
        alpha = 0.4 * beta / t
        X = frozenset(Y) | winnowed.Z
        f = winnowed.f

        xs = sorted(X)
        admissible = np.max(np.abs(V[:, xs] - f.table[xs][None, :]), axis=1) <= alpha
        pen = np.abs(V[admissible] - star[None, :]).max(axis=0)
        measured = float(D.weights @ pen)
        if measured <= eps / 2.0 + 1e-12:
            return RealSlotStrategy(f=f, X=X, alpha=alpha, t=t, sample_size=M,
                                    penalties=pen)
    raise RetriesExhausted("alice response",
                           "measured penalty stayed above eps/2 after 12 escalations")


def real_majority_certificates(S: PConceptClass, f_star: RealFunction, eps: float,
                               seed: int = 0) -> RealDecomposition:
    """Real-valued majority-certificates decomposition of f_star over S.

    Runs a double-oracle game where Alice mixes over (member, constraint
    set) strategies produced by the stage-1/stage-2 generator and Bob
    plays inputs; Alice's penalty at x is the exact worst deviation
    |f_star(x) - g(x)| over her slot's admissible members.  The outer
    loop stops when Alice's mix holds Bob's best response to expected
    penalty eps/2.  Then m = ceil(20 n / eps^2) slots are sampled from
    the mix (m = 1 for a singleton class) and the decomposition is kept
    only once verify_real_decomposition passes (resampling up to 64
    times).  The decomposition's alpha is the smallest realized slot
    alpha, which only tightens the verified slots.
    """
    if not (0 < eps):
        raise RejectedInputError("eps must be positive")
    S.index_of(f_star)
    beta = eps / 48.0
    n = S.domain.n

    if len(S) == 1:
        slot = RealSlotStrategy(f=f_star, X=frozenset(), alpha=0.4 * beta, t=1.0,
                                sample_size=0,
                                penalties=np.zeros(S.domain.size))
        decomposition = RealDecomposition(target=f_star, funcs=(f_star,),
                                          points=(frozenset(),), alpha=slot.alpha,
                                          m=1, eps=eps, realized_t=1.0)
        if not verify_real_decomposition(S, decomposition):
            raise VerificationDefect("singleton decomposition failed verification")
        return decomposition

    fat = fat_shattering_dim(S, beta)
    slots: list = []
    slot_keys: set = set()
    # bootstrap Bob at the first input so constraint sets grow from the
    # game dynamics rather than from a blanket uniform sample
    D = Distribution.point_mass(S.domain, 0)
    w = np.ones(0)
    worst = math.inf
    cap = 10 * len(S) + 10
    for iteration in range(cap):
        if slots:
            Pen = np.stack([s.penalties for s in slots])
            _, w, d = solve_zero_sum(-Pen)
            worst = float((w @ Pen).max())
            if worst <= eps / 2.0 + 1e-12:
                break
            D = Distribution.from_weights(S.domain, d)
        slot = _real_alice_response(S, f_star, D, beta, eps, seed, iteration, fat)
        key = (slot.f.key(), slot.X)
        if key in slot_keys:
            raise VerificationDefect("real game generated a duplicate strategy")
        slot_keys.add(key)
        slots.append(slot)
    else:
        raise RetriesExhausted("real game outer loop",
                               f"no eps/2 mix within {cap} iterations")

    alpha = min(s.alpha for s in slots)
    realized_t = max(s.t for s in slots)
    m = max(1, math.ceil(20.0 * n / (eps * eps)))
    weights = w / w.sum()
    for attempt in range(64):
        rng = substream(seed, 8, attempt)
        idx = rng.choice(len(slots), size=m, p=weights)
        funcs = tuple(slots[int(i)].f for i in idx)
        points = tuple(slots[int(i)].X for i in idx)
        decomposition = RealDecomposition(target=f_star, funcs=funcs, points=points,
                                          alpha=alpha, m=m, eps=eps,
                                          realized_t=realized_t)
        if verify_real_decomposition(S, decomposition):
            return decomposition
    raise RetriesExhausted("real decomposition sampling",
                           "no verified decomposition in 64 resamples")
