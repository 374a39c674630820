"""Compiling advice states into classically-checkable verification
protocols, and the machines that consume them.

The compiled object pairs trusted classical data (per-slot constraint
sets X_i, dyadic target probabilities r_{i,z}, and a tolerance alpha)
with untrusted quantum advice (m registers, honestly a tensor product of
per-slot states).  Machine A checks the registers against the classical
constraints; machine B answers inputs by running the verification
circuit on a uniformly random register; both depend on the supplied
registers only through their reduced states.

Soundness scope: the decomposition guarantee is proven (exactly) over
the finite compiled class of advice states; soundness over the full
continuum of states is probed empirically by adversary_search, never
asserted.  Reports carry that distinction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .concepts import (BooleanFunction, InputDomain, PConceptClass,
                       RealFunction)
from .decompose import RealDecomposition, real_majority_certificates
from .errors import RejectedInputError, VerificationDefect
from .qsim import (Circuit, DensityMatrix, measurement_operator,
                   params_to_state, random_mixed_state, reduced_state,
                   state_to_params)
from .rng import substream
from .winnow import fat_shattering_dim


def circuit_domain(circuit: Circuit) -> InputDomain:
    """Input domain implied by the highest input bit any gate reads."""
    bits = [g.when_bit for g in circuit.gates if g.when_bit is not None]
    return InputDomain(max(bits) + 1 if bits else 1)


def induced_function(circuit: Circuit, domain: InputDomain,
                     state: DensityMatrix) -> RealFunction:
    table = np.empty(domain.size)
    for x in domain.inputs():
        M = measurement_operator(circuit, x, state.qubits)
        table[x] = float(np.real(np.trace(state.entries @ M)))
    return RealFunction(domain, np.clip(table, 0.0, 1.0))


def induced_with_states(circuit: Circuit, domain: InputDomain,
                        states: Sequence[DensityMatrix]) -> tuple:
    """(p-concept class, aligned states): one function per state, with
    exact-duplicate functions dropped (first state kept)."""
    members = []
    kept_states = []
    seen = set()
    for s in states:
        f = induced_function(circuit, domain, s)
        k = f.key()
        if k not in seen:
            seen.add(k)
            members.append(f)
            kept_states.append(s)
    return PConceptClass(domain, members), tuple(kept_states)


def induced_pconcept(circuit: Circuit, domain: InputDomain,
                     states: Sequence[DensityMatrix]) -> PConceptClass:
    """The p-concept class induced by the sampled advice states."""
    cls, _ = induced_with_states(circuit, domain, states)
    return cls


@dataclass(frozen=True)
class AdviceProtocol:
    """A compiled (classical advice, honest quantum advice) pair.

    classical part: slot constraint sets ``points``, dyadic rationals
    ``targets[i][z]`` approximating the honest acceptance probabilities,
    and ``alpha`` (machine A accepts at deviation <= 5*alpha).
    quantum part: ``honest_advice``, one state per slot.
    """

    circuit: Circuit
    domain: InputDomain
    advice_qubits: int
    points: tuple  # per-slot frozenset of inputs
    targets: tuple  # per-slot tuple of (z, Fraction) pairs
    alpha: float
    honest_advice: tuple  # per-slot DensityMatrix
    language: BooleanFunction
    decomposition: RealDecomposition
    compiled_class: PConceptClass
    compiled_states: tuple

    @property
    def m(self) -> int:
        return len(self.honest_advice)

    def target_map(self, i: int) -> dict:
        return dict(self.targets[i])

    def validate(self) -> None:
        if not (len(self.points) == len(self.targets) == self.m):
            raise VerificationDefect("slot arity mismatch")
        for i in range(self.m):
            f_i = induced_function(self.circuit, self.domain, self.honest_advice[i])
            for z, r in self.targets[i]:
                if abs(float(r) - f_i(z)) > self.alpha + 1e-12:
                    raise VerificationDefect(
                        f"stored rational at slot {i}, input {z} misses alpha")


def _resolve_registers(P: AdviceProtocol, sigma) -> list:
    """Accept either per-register states or one joint state; a joint
    state is split by partial trace, which is exactly what the machines
    may depend on."""
    if isinstance(sigma, DensityMatrix):
        p = P.advice_qubits
        if sigma.qubits != P.m * p:
            raise RejectedInputError(
                f"joint state has {sigma.qubits} qubits, expected {P.m * p}")
        return [reduced_state(sigma, range(i * p, (i + 1) * p)) for i in range(P.m)]
    regs = list(sigma)
    if len(regs) != P.m:
        raise RejectedInputError(f"expected {P.m} registers, got {len(regs)}")
    for r in regs:
        if r.qubits != P.advice_qubits:
            raise RejectedInputError("register width mismatch")
    return regs


def _slot_probability_cache(P: AdviceProtocol, registers: list) -> dict:
    """acceptance probabilities keyed by (state key, input), shared by
    repeated registers."""
    ops = {x: measurement_operator(P.circuit, x, P.advice_qubits)
           for x in P.domain.inputs()}
    cache: dict = {}
    for reg in registers:
        k = reg.key()
        if k not in cache:
            cache[k] = {x: float(np.real(np.trace(reg.entries @ ops[x])))
                        for x in P.domain.inputs()}
    return cache


def verifier_A(P: AdviceProtocol, sigma) -> float:
    """Worst deviation |Pr[Q(z, sigma[i]) accepts] - r_{i,z}| over all
    slots i and constrained inputs z; the protocol accepts when this is
    at most 5*alpha."""
    registers = _resolve_registers(P, sigma)
    cache = _slot_probability_cache(P, registers)
    worst = 0.0
    for i, reg in enumerate(registers):
        probs = cache[reg.key()]
        for z, r in P.targets[i]:
            worst = max(worst, abs(probs[z] - float(r)))
    return worst


def verifier_accepts(P: AdviceProtocol, sigma) -> bool:
    return verifier_A(P, sigma) <= 5.0 * P.alpha


def machine_B(P: AdviceProtocol, sigma, x: int) -> float:
    """Acceptance probability of running the circuit on a uniformly
    random register: the mean over slots of Pr[Q(x, sigma[i]) accepts]."""
    P.domain.check_input(x)
    registers = _resolve_registers(P, sigma)
    cache = _slot_probability_cache(P, registers)
    return float(np.mean([cache[reg.key()][x] for reg in registers]))


def machine_b_error(P: AdviceProtocol, sigma) -> float:
    """max_x |machine_B - L(x)|."""
    registers = _resolve_registers(P, sigma)
    cache = _slot_probability_cache(P, registers)
    worst = 0.0
    for x in P.domain.inputs():
        b = float(np.mean([cache[reg.key()][x] for reg in registers]))
        worst = max(worst, abs(b - P.language(x)))
    return worst


def dyadic_approximation(value: float, alpha: float) -> Fraction:
    """Closest dyadic rational with denominator 2^(ceil(log2(1/alpha))+1),
    ties rounded half-up; always within alpha of the value."""
    d = math.ceil(math.log2(1.0 / alpha)) + 1
    den = 1 << d
    num = math.floor(value * den + 0.5)
    return Fraction(num, den)


def compile_advice(circuit: Circuit, rho_n: DensityMatrix, language: BooleanFunction,
                   eps: float, state_sample: Sequence[DensityMatrix],
                   seed: int = 0) -> AdviceProtocol:
    """Compile a (circuit, honest state) pair into an advice protocol.

    Requires the true-advice premise |f_rho(z) - L(z)| <= 0.2 everywhere.
    The honest state plus the sample induce a finite class; the real
    decomposition of f_rho at the given eps supplies slots (f_i, X_i),
    which map back to representative states.  The protocol alpha is the
    decomposition alpha divided by 6 so the verifier's 5*alpha slack plus
    the encoding slack compose exactly to the verified tolerance.
    """
    domain = language.domain
    S, states = induced_with_states(circuit, domain, [rho_n, *state_sample])
    f_star = induced_function(circuit, domain, rho_n)
    for z in domain.inputs():
        if abs(f_star(z) - language(z)) > 0.2:
            raise RejectedInputError(
                f"true-advice premise fails at input {z}: |f-L| = "
                f"{abs(f_star(z) - language(z)):.4f} > 0.2")

    decomposition = real_majority_certificates(S, f_star, eps, seed=seed)
    alpha = decomposition.alpha / 6.0

    state_of = {f.key(): s for f, s in zip(S.members, states)}
    honest = []
    targets = []
    for f_i, X_i in zip(decomposition.funcs, decomposition.points):
        honest.append(state_of[f_i.key()])
        targets.append(tuple((z, dyadic_approximation(f_i(z), alpha))
                             for z in sorted(X_i)))

    protocol = AdviceProtocol(circuit=circuit, domain=domain,
                              advice_qubits=rho_n.qubits,
                              points=decomposition.points,
                              targets=tuple(targets), alpha=alpha,
                              honest_advice=tuple(honest), language=language,
                              decomposition=decomposition, compiled_class=S,
                              compiled_states=states)
    protocol.validate()
    return protocol


def with_inflated_alpha(P: AdviceProtocol, factor: float) -> AdviceProtocol:
    """A deliberately broken variant accepting deviations factor times
    larger; used to show the adversary search has teeth."""
    return AdviceProtocol(circuit=P.circuit, domain=P.domain,
                          advice_qubits=P.advice_qubits, points=P.points,
                          targets=P.targets, alpha=P.alpha * factor,
                          honest_advice=P.honest_advice, language=P.language,
                          decomposition=P.decomposition,
                          compiled_class=P.compiled_class,
                          compiled_states=P.compiled_states)


# ---------------------------------------------------------------------------
# QMA+ style amplification
# ---------------------------------------------------------------------------

def _count_distribution_product(probs: Sequence[float]) -> np.ndarray:
    dist = np.array([1.0])
    for p in probs:
        dist = np.convolve(dist, [1.0 - p, p])
    return dist


def qma_plus_amplify(circuits: Sequence[tuple], targets: Sequence[Fraction],
                     q: Fraction, K: int, sigma, i: int) -> float:
    """Exact acceptance probability of the amplified constraint test.

    The test applies circuit i (a (Circuit, input) pair) to each of K
    registers and accepts iff the fraction a of accepting invocations
    satisfies |a - r_i| <= 2/q; the comparison is exact rational
    arithmetic.  ``sigma`` is either a list of K per-register states
    (independent registers, count distribution by convolution; supports
    large K) or one joint DensityMatrix over all K registers (width
    capped at 6 qubits; outcome patterns enumerated exactly).
    """
    circuit, x = circuits[i]
    r = Fraction(targets[i])
    q = Fraction(q)
    if K < 1:
        raise RejectedInputError("K must be positive")

    if isinstance(sigma, DensityMatrix):
        p = sigma.qubits // K
        if p < 1 or p * K != sigma.qubits:
            raise RejectedInputError("joint state does not split into K registers")
        M = measurement_operator(circuit, x, p)
        E1 = M
        E0 = np.eye(1 << p, dtype=np.complex128) - M
        dist = np.zeros(K + 1)
        for pattern in range(1 << K):
            op = np.array([[1.0 + 0j]])
            ones = 0
            for k in range(K):
                bit = (pattern >> (K - 1 - k)) & 1
                ones += bit
                op = np.kron(op, E1 if bit else E0)
            dist[ones] += float(np.real(np.trace(sigma.entries @ op)))
    else:
        regs = list(sigma)
        if len(regs) != K:
            raise RejectedInputError(f"expected {K} registers, got {len(regs)}")
        probs = []
        for reg in regs:
            M = measurement_operator(circuit, x, reg.qubits)
            probs.append(float(np.real(np.trace(reg.entries @ M))))
        dist = _count_distribution_product(probs)

    accept = 0.0
    for j in range(K + 1):
        if abs(Fraction(j, K) - r) <= 2 / q:
            accept += float(dist[j])
    return min(max(accept, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Adversary search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdversarySearchResult:
    best_error: float
    best_deviation: float
    violation_found: bool
    registers: Optional[tuple]  # per-slot states of the best feasible candidate


def adversary_search(P: AdviceProtocol, budget: int = 1000, seed: int = 0,
                     steps_per_restart: int = 40) -> AdversarySearchResult:
    """Best-effort search for advice passing machine A yet misleading
    machine B (error above 1/3 at some input).

    Random restarts plus coordinate perturbation over per-slot
    purification parameters.  Both machines depend on registers only
    through reduced states, and slots with identical constraints admit a
    common optimal register (the objective is linear in each register),
    so the search walks one parameter block per distinct slot.
    Deterministic given the seed.  Finding nothing is a report, not a
    proof.
    """
    ops = {x: measurement_operator(P.circuit, x, P.advice_qubits)
           for x in P.domain.inputs()}
    lang = np.array([float(P.language(x)) for x in P.domain.inputs()])

    groups: dict = {}
    order = []
    for i in range(P.m):
        key = (P.honest_advice[i].key(), P.points[i], P.targets[i])
        if key not in groups:
            groups[key] = {"count": 0, "targets": P.targets[i],
                           "honest": P.honest_advice[i]}
            order.append(key)
        groups[key]["count"] += 1
    blocks = [groups[k] for k in order]
    weights = np.array([b["count"] / P.m for b in blocks])

    op_stack = np.stack([ops[x] for x in P.domain.inputs()])

    def block_values(state: DensityMatrix) -> np.ndarray:
        return np.real(np.einsum("xab,ba->x", op_stack, state.entries))

    def evaluate(states: list) -> tuple:
        vals = np.stack([block_values(s) for s in states])
        b_vec = weights @ vals
        err = float(np.max(np.abs(b_vec - lang)))
        dev = 0.0
        for blk, v in zip(blocks, vals):
            for z, r in blk["targets"]:
                dev = max(dev, abs(float(v[z]) - float(r)))
        return err, dev

    threshold = 5.0 * P.alpha
    penalty_weight = 10.0
    dim = 2 * (1 << (2 * P.advice_qubits))

    best_error = -1.0
    best_dev = 0.0
    best_states: Optional[list] = None

    for restart in range(budget):
        rng = substream(seed, 20, restart)
        if restart == 0:
            params = [state_to_params(b["honest"]) for b in blocks]
        else:
            params = [rng.normal(size=dim) for _ in blocks]
        states = [params_to_state(p, P.advice_qubits) for p in params]
        err, dev = evaluate(states)
        score = err - penalty_weight * max(0.0, dev - threshold)

        scale = 0.5
        for step in range(steps_per_restart):
            g = int(rng.integers(len(blocks)))
            proposal = params[g] + rng.normal(scale=scale, size=dim)
            cand_states = list(states)
            cand_states[g] = params_to_state(proposal, P.advice_qubits)
            cand_err, cand_dev = evaluate(cand_states)
            cand_score = cand_err - penalty_weight * max(0.0, cand_dev - threshold)
            if cand_score > score:
                params[g] = proposal
                states = cand_states
                err, dev, score = cand_err, cand_dev, cand_score
            scale = max(0.05, scale * 0.93)

        if dev <= threshold and err > best_error:
            best_error = err
            best_dev = dev
            best_states = states
            if best_error > 1.0 / 3.0:
                break

    registers = None
    if best_states is not None:
        expanded = []
        index_of = {k: j for j, k in enumerate(order)}
        for i in range(P.m):
            key = (P.honest_advice[i].key(), P.points[i], P.targets[i])
            expanded.append(best_states[index_of[key]])
        registers = tuple(expanded)
    return AdversarySearchResult(best_error=max(best_error, 0.0),
                                 best_deviation=best_dev,
                                 violation_found=best_error > 1.0 / 3.0,
                                 registers=registers)


def conditional_soundness_bound(P: AdviceProtocol) -> float:
    """Exact worst machine-B error over all assignments of compiled-class
    members to registers that machine A would accept.

    Slot choices decouple, so the bound is computed from per-slot
    extremes of the members satisfying that slot's r-constraints at
    threshold 5*alpha (the same extremal-envelope technique that
    verifies real decompositions).  An accepted assignment always
    exists (the honest one), so the value is finite.
    """
    V = P.compiled_class.value_matrix()
    size = P.domain.size
    groups: dict = {}
    for i in range(P.m):
        key = (P.targets[i],)
        groups.setdefault(key, {"count": 0, "targets": P.targets[i]})
        groups[key]["count"] += 1
    lo_sum = np.zeros(size)
    hi_sum = np.zeros(size)
    for info in groups.values():
        mask = np.ones(len(P.compiled_class), dtype=bool)
        for z, r in info["targets"]:
            mask &= np.abs(V[:, z] - float(r)) <= 5.0 * P.alpha
        if not mask.any():
            raise VerificationDefect("a slot admits no compiled-class member")
        sub = V[mask]
        lo_sum += info["count"] * sub.min(axis=0)
        hi_sum += info["count"] * sub.max(axis=0)
    lo = lo_sum / P.m
    hi = hi_sum / P.m
    lang = np.array([float(P.language(x)) for x in P.domain.inputs()])
    return float(np.max(np.maximum(np.abs(lang - hi), np.abs(lang - lo))))


def bloch_affine_map(circuit: Circuit, domain: InputDomain) -> tuple:
    """For one advice qubit: f_sigma(x) = c[x] + m[x] . b where b is the
    Bloch vector; returns (c, m) with m of shape (2^n, 3)."""
    paulis = [np.array([[0, 1], [1, 0]], dtype=np.complex128),
              np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
              np.array([[1, 0], [0, -1]], dtype=np.complex128)]
    c = np.zeros(domain.size)
    m = np.zeros((domain.size, 3))
    for x in domain.inputs():
        M = measurement_operator(circuit, x, 1)
        c[x] = float(np.real(np.trace(M))) / 2.0
        for j, P in enumerate(paulis):
            m[x, j] = float(np.real(np.trace(M @ P))) / 2.0
    return c, m


def _state_from_bloch(b: np.ndarray) -> DensityMatrix:
    norm = float(np.linalg.norm(b))
    if norm > 1.0:
        b = b / norm
    sx, sy, sz = b
    entries = 0.5 * np.array([[1 + sz, sx - 1j * sy], [sx + 1j * sy, 1 - sz]])
    return DensityMatrix(1, entries)


def bloch_extremal_states(circuit: Circuit, domain: InputDomain,
                          target: RealFunction) -> list:
    """Single-qubit states matching ``target`` exactly on each input
    subset T while extremizing the acceptance probability at each input
    outside T.

    These witness the full-state-space extremes of the induced family,
    so a compile class seeded with them measures game penalties against
    the whole Bloch ball rather than against a sparse sample; without
    them the compiled protocol can look sound against its own class yet
    be wide open to arbitrary states.
    """
    c, m = bloch_affine_map(circuit, domain)
    states = []
    inputs = list(domain.inputs())

    def solve(T: tuple, x_star: int, sign: float) -> Optional[DensityMatrix]:
        if T:
            A = m[list(T)]
            d = np.array([target(t) - c[t] for t in T])
            b0, *_ = np.linalg.lstsq(A, d, rcond=None)
            if np.max(np.abs(A @ b0 - d)) > 1e-9 or np.linalg.norm(b0) > 1.0 + 1e-12:
                return None
            _, sv, vt = np.linalg.svd(A)
            rank = int(np.sum(sv > 1e-10))
            null = vt[rank:].T
        else:
            b0 = np.zeros(3)
            null = np.eye(3)
        direction = null @ (null.T @ (sign * m[x_star]))
        norm = float(np.linalg.norm(direction))
        if norm < 1e-12:
            b = b0
        else:
            u = direction / norm
            proj = float(b0 @ u)
            slack = proj * proj + 1.0 - float(b0 @ b0)
            if slack < 0:
                return None
            b = b0 + (-proj + math.sqrt(slack)) * u
        return _state_from_bloch(b)

    from itertools import combinations
    for size in range(0, len(inputs)):
        for T in combinations(inputs, size):
            for x_star in inputs:
                if x_star in T:
                    continue
                for sign in (1.0, -1.0):
                    state = solve(T, x_star, sign)
                    if state is not None:
                        states.append(state)
    return states


def fat_dim_quantum_check(p: int, gamma: float, samples: int, circuit: Circuit,
                          domain: InputDomain, seed: int = 0) -> dict:
    """Measure the fat-shattering dimension of a sampled induced class
    and report it next to the p/gamma^2 learnability bound."""
    if p > 2:
        raise RejectedInputError("quantum dimension check capped at 2 advice qubits")
    rng = substream(seed, 21)
    states = [random_mixed_state(p, rng) for _ in range(samples)]
    cls = induced_pconcept(circuit, domain, states)
    measured = fat_shattering_dim(cls, gamma)
    return {"measured": measured, "bound": p / (gamma * gamma),
            "class_size": len(cls)}
