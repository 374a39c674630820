"""Zero-sum game solving for certificate decompositions.

The Boolean game: Alice plays a (certificate, isolated member) pair, Bob
plays an input x, and Alice wins when her isolated member agrees with
the target at x.  Alice's payoff depends on her pair only through the
isolated member, which is what makes column generation over members
converge to the exact game value.

LP solving goes through scipy's HiGHS backend, which is deterministic
for fixed inputs; reported game values are always recomputed exactly
from the returned support and weights by a naive scan, never read off
the solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .concepts import (BooleanFunction, Certificate, ConceptClass,
                       Distribution)
from .errors import (EnumerationBudgetExceeded, RejectedInputError,
                     VerificationDefect)
from .winnow import isolate_member, weak_certify

#: Hard cap on isolating certificates enumerated by the full LP oracle.
FULL_LP_BUDGET = 100_000
#: Guard on raw (subset, bit-pattern) combinations before filtering.
ENUMERATION_GUARD = 2_000_000


def solve_zero_sum(payoff: np.ndarray) -> tuple:
    """Solve max_w min_x w^T P for the row player of a matrix game.

    Returns (value, row_mix, col_mix); the value is the LP optimum, the
    mixes are clipped to non-negative and renormalized.
    """
    P = np.asarray(payoff, dtype=np.float64)
    rows, cols = P.shape
    if rows == 0 or cols == 0:
        raise RejectedInputError("empty payoff matrix")

    # row player: variables (w, v), maximize v
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-P.T, np.ones((cols, 1))])
    b_ub = np.zeros(cols)
    A_eq = np.zeros((1, rows + 1))
    A_eq[0, :rows] = 1.0
    bounds = [(0.0, 1.0)] * rows + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                  method="highs")
    if not res.success:
        raise VerificationDefect(f"row LP failed: {res.message}")
    w = np.clip(res.x[:rows], 0.0, None)
    w /= w.sum()

    # column player: variables (d, u), minimize u
    c2 = np.zeros(cols + 1)
    c2[-1] = 1.0
    A_ub2 = np.hstack([P, -np.ones((rows, 1))])
    b_ub2 = np.zeros(rows)
    A_eq2 = np.zeros((1, cols + 1))
    A_eq2[0, :cols] = 1.0
    res2 = linprog(c2, A_ub=A_ub2, b_ub=b_ub2, A_eq=A_eq2, b_eq=[1.0], bounds=[(0.0, 1.0)] * cols + [(None, None)],
                   method="highs")
    if not res2.success:
        raise VerificationDefect(f"column LP failed: {res2.message}")
    d = np.clip(res2.x[:cols], 0.0, None)
    d /= d.sum()

    value = float(res.x[-1])
    if abs(value - float(res2.x[-1])) > 1e-6:
        raise VerificationDefect("primal/dual game values disagree beyond tolerance")
    return value, w, d


@dataclass(frozen=True)
class AliceStrategy:
    """A mixed strategy over (certificate, isolated member) pairs.

    ``game_value`` is the worst case over Bob's pure strategies of the
    weighted probability that the isolated member agrees with the target,
    recomputed exactly from support and weights.
    """

    f_star: BooleanFunction
    support: tuple  # of (Certificate, BooleanFunction)
    weights: np.ndarray
    game_value: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "support", tuple(self.support))
        if len(self.support) != len(w):
            raise RejectedInputError("support/weight length mismatch")

    def agreement_value(self, x: int) -> float:
        """Weighted probability of agreeing with the target at x."""
        return float(sum(wt for (c, f), wt in zip(self.support, self.weights)
                         if f(x) == self.f_star(x)))

    def recompute_value(self) -> float:
        return min(self.agreement_value(x) for x in self.f_star.domain.inputs())

    def validate(self, S: ConceptClass) -> None:
        if np.any(self.weights < -1e-12):
            raise VerificationDefect("negative strategy weight")
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise VerificationDefect("strategy weights do not sum to 1")
        from .concepts import is_isolated
        for cert, f in self.support:
            if not is_isolated(S, cert, f):
                raise VerificationDefect("support pair is not isolated")
        if abs(self.recompute_value() - self.game_value) > 1e-9:
            raise VerificationDefect("stored game value disagrees with naive scan")

    def sample_pairs(self, rng: np.random.Generator, m: int) -> list:
        w = self.weights / self.weights.sum()
        idx = rng.choice(len(self.support), size=m, p=w)
        return [self.support[int(i)] for i in idx]


def _payoff_rows(pairs, f_star: BooleanFunction) -> np.ndarray:
    star = f_star.values()
    return np.stack([(f.values() == star).astype(np.float64) for _, f in pairs])


def solve_game_full_lp(S: ConceptClass, f_star: BooleanFunction, k: int,
                       budget: int = FULL_LP_BUDGET) -> AliceStrategy:
    """Exact minimax strategy by enumerating every isolating certificate
    of size at most k and solving the full payoff matrix as an LP.

    Rejected (with the offending count) when enumeration would exceed the
    budget; this oracle exists to cross-check double_oracle_solve on
    small instances, not to scale.
    """
    S.index_of(f_star)
    domain = S.domain
    raw_count = sum(math.comb(domain.size, s) * (2 ** s) for s in range(k + 1))
    if raw_count > ENUMERATION_GUARD:
        raise EnumerationBudgetExceeded(ENUMERATION_GUARD, raw_count,
                                        "raw size-<=k certificate space")
    pairs = list(_isolating_certificates(S, k, budget))
    if not pairs:
        raise RejectedInputError(f"no certificate of size <= {k} isolates any member")
    P = _payoff_rows(pairs, f_star)
    _, w, _ = solve_zero_sum(P)
    exact_value = float((w @ P).min())
    strategy = AliceStrategy(f_star=f_star, support=tuple(pairs), weights=w,
                             game_value=exact_value)
    strategy.validate(S)
    return strategy


def _isolating_certificates(S: ConceptClass, k: int, budget: int = None):
    """Yield every (certificate, isolated member) pair with |C| <= k.

    Enumeration is per input subset: bucketing members by their value
    pattern on the subset finds exactly the patterns matched by a single
    member, and each such pattern is one isolating certificate.
    """
    domain = S.domain
    V = S.value_matrix().astype(np.int64)
    count = 0
    for s in range(k + 1):
        weights = (1 << np.arange(s)).astype(np.int64)
        for points in itertools.combinations(domain.inputs(), s):
            codes = V[:, list(points)] @ weights if s else np.zeros(len(S), dtype=np.int64)
            values, counts = np.unique(codes, return_counts=True)
            for value, cnt in zip(values, counts):
                if cnt != 1:
                    continue
                row = int(np.nonzero(codes == value)[0][0])
                cert = Certificate.of(domain, {x: (int(value) >> j) & 1
                                               for j, x in enumerate(points)})
                count += 1
                if budget is not None and count > budget:
                    raise EnumerationBudgetExceeded(budget, count,
                                                    "isolating certificates")
                yield cert, S[row]


def first_k_reaching(S: ConceptClass, f_star: BooleanFunction, target: float = 0.9,
                     k_max: int = None) -> tuple:
    """Smallest certificate-size bound k at which the k-bounded game value
    reaches ``target``, with the achieved value at each k along the way.

    When no k up to ``k_max`` (default: the domain size) reaches the
    target, returns (None, achieved) with the full per-k value list; the
    achieved values are reported rather than errored.
    """
    if k_max is None:
        k_max = S.domain.size
    achieved = []
    for k in range(k_max + 1):
        try:
            value = solve_game_full_lp(S, f_star, k).game_value
        except RejectedInputError:
            achieved.append(None)
            continue
        achieved.append(value)
        if value >= target - 1e-12:
            return k, achieved
    return None, achieved


def k_isolatable_members(S: ConceptClass, k: int) -> set:
    """Indices of members isolated by some certificate of size <= k.

    Used to pick game instances on which the k-bounded full-LP oracle
    and the unbounded double oracle solve the same matrix game (payoffs
    depend only on the isolated member).
    """
    found: set = set()
    for _, member in _isolating_certificates(S, k):
        found.add(S.index_of(member))
        if len(found) == len(S):
            break
    return found


def double_oracle_solve(S: ConceptClass, f_star: BooleanFunction,
                        target_value: float = 0.9,
                        value_trace: list = None) -> AliceStrategy:
    """Column generation for the certificate game.

    Repeat: solve the restricted game over the current Alice rows (Bob
    always has every input available), read off Bob's optimal mixed
    strategy D, and stop once Alice's restricted mix already achieves
    ``target_value`` against Bob's best response.  Otherwise ask the weak
    certifier for a row beating D with probability at least 0.9.  While
    the restricted value is below 0.9 that row is always new (Bob's
    optimal mix caps every existing row at the restricted value).  If the
    certifier repeats a known member, fall back to the exact best
    response member against D; when that member is also known the
    restricted value equals the full game value and the loop stops, so
    passing target_value = 1.0 runs the solver to exact convergence.
    """
    S.index_of(f_star)
    domain = S.domain
    rows: list = []
    row_members: set = set()
    cap = 10 * len(S) + 10
    star = f_star.values()
    member_matrix = S.value_matrix()
    agreements = (member_matrix == star[None, :]).astype(np.float64)

    D = Distribution.uniform(domain)
    w = np.ones(0)
    worst = -1.0
    for _ in range(cap):
        if rows:
            P = _payoff_rows(rows, f_star)
            _, w, d = solve_zero_sum(P)
            worst = float((w @ P).min())
            if value_trace is not None:
                value_trace.append(worst)
            if worst >= target_value - 1e-12:
                break
            D = Distribution.from_weights(domain, d)

        cert_result = weak_certify(S, f_star, D)
        if cert_result.f.bits not in row_members:
            rows.append((cert_result.C, cert_result.f))
            row_members.add(cert_result.f.bits)
            continue

        # exact best-response fallback (only reachable with target > 0.9)
        payoffs = agreements @ D.weights
        best_member = S[int(np.argmax(payoffs))]
        if best_member.bits in row_members:
            # Bob's mix caps every known row, so the restricted value is
            # already the full game value: converged below target.
            break
        rows.append((isolate_member(S, best_member), best_member))
        row_members.add(best_member.bits)
    else:
        raise VerificationDefect("double oracle failed to terminate within its iteration cap")

    strategy = AliceStrategy(f_star=f_star, support=tuple(rows), weights=w,
                             game_value=worst)
    strategy.validate(S)
    return strategy
