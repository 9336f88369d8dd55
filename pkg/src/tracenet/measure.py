"""The uniform measure on infinite executions, evaluated on cylinders.

A cylinder value is root^(length) times the weight ratio between the start
state and the state reached; everything else in this module is derived from
those values alone: the first-clique law by inclusion-exclusion over
super-cliques, and the finite-depth prefix probabilities by
inclusion-exclusion over violation cylinders. The two derivations are
independent computation paths and are held against each other in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, NumericError
from .monoid import Clique, Trace
from .system import AsyncSystem, Cocycle

DEFAULT_CLAMP_TOL = 1e-12
DEFAULT_NORM_TOL = 1e-9
DEFAULT_DEPTH_CAP = 3
DEFAULT_ORACLE_BUDGET = 1 << 20


@dataclass(frozen=True)
class FirstCliqueLaw:
    """Distribution of the first normal-form clique from a given state."""

    state: int
    weights: dict[Clique, float]

    def support(self) -> tuple[Clique, ...]:
        return tuple(c for c, w in self.weights.items() if w > 0)

    def total(self) -> float:
        return sum(self.weights.values())


class UniformMeasure:
    """Cylinder evaluator for one asynchronous system and cocycle."""

    def __init__(self, system: AsyncSystem, cocycle: Cocycle, gamma_table=None):
        self.system = system
        self.cocycle = cocycle
        self.q0 = cocycle.q0.midpoint
        if gamma_table is None:
            gamma_table = cocycle.gamma_table()
        self.gamma = np.array(gamma_table, dtype=float)

    def with_corrupted_gamma(self, eps: float) -> "UniformMeasure":
        """Copy with off-diagonal weight ratios perturbed; breaks the
        multiplicative structure on purpose (sensitivity testing)."""
        table = self.gamma.copy()
        n = table.shape[0]
        for s in range(n):
            for t in range(n):
                if s < t:
                    table[s, t] *= 1.0 + eps
        return UniformMeasure(self.system, self.cocycle, table)

    def with_root(self, q0_value: float) -> "UniformMeasure":
        """Copy evaluating cylinders at a different root value (sensitivity
        testing); the certified enclosure is left untouched."""
        clone = UniformMeasure(self.system, self.cocycle, self.gamma)
        clone.q0 = float(q0_value)
        return clone

    # -- cylinders ---------------------------------------------------------

    def cylinder_probability(self, s: int, x: Trace) -> float:
        t = self.system.act(s, x)
        if t is None:
            return 0.0
        return self.q0 ** len(x) * float(self.gamma[s, t])

    # -- first-clique law --------------------------------------------------

    def first_clique_law(
        self,
        s: int,
        check: bool = True,
        clamp_tol: float = DEFAULT_CLAMP_TOL,
        norm_tol: float = DEFAULT_NORM_TOL,
    ) -> FirstCliqueLaw:
        """Law of the first clique via inclusion-exclusion over super-cliques:
        the cylinder of a clique covers every first clique containing it, so
        alternating sums over supersets isolate the exact-clique events.

        With check on (the default), numeric dust is clamped to zero, larger
        negatives and normalization failures abort. With check off, the raw
        alternating sums come back untouched, so a deliberately broken
        measure can still state its predictions for comparison."""
        monoid = self.system.monoid
        cliques = monoid.cliques()
        cylinder = {}
        for c in cliques:
            t = self.system.clique_action(s, c)
            cylinder[c] = (
                0.0 if t is None else self.q0 ** len(c) * float(self.gamma[s, t])
            )
        weights: dict[Clique, float] = {}
        for c in cliques:
            base = set(c)
            acc = 0.0
            for d in cliques:
                if base <= set(d):
                    sign = -1.0 if (len(d) - len(c)) % 2 else 1.0
                    acc += sign * cylinder[d]
            if check:
                if abs(acc) <= clamp_tol:
                    acc = 0.0
                elif acc < 0:
                    raise NumericError(
                        f"first-clique weight for {c!r} at state "
                        f"{self.system.state_labels[s]} is {acc:.3e} < 0 beyond "
                        f"numeric slack"
                    )
            weights[c] = acc
        law = FirstCliqueLaw(s, weights)
        if check and abs(law.total() - 1.0) > norm_tol:
            raise NumericError(
                f"first-clique law at state {self.system.state_labels[s]} sums "
                f"to {law.total():.12f}, off by more than {norm_tol:.1e}"
            )
        return law

    # -- finite-depth prefix probabilities ----------------------------------

    def prefix_probability(
        self,
        s: int,
        prefix,
        depth_cap: int = DEFAULT_DEPTH_CAP,
        budget: int = DEFAULT_ORACLE_BUDGET,
        check: bool = True,
    ) -> float:
        """Probability that the normal form starts with exactly the given
        clique sequence.

        Within the cylinder of the prefix, the normal form differs exactly
        when some extra letter merges into one of its cliques; each such
        violation is itself a cylinder (the prefix up to that clique with the
        letter added), and the union over violations expands by
        inclusion-exclusion with least-upper-bound intersections.
        """
        monoid = self.system.monoid
        cliques_seq = tuple(monoid.clique(c) for c in prefix)
        if len(cliques_seq) > depth_cap:
            raise CapExceededError(
                f"prefix depth {len(cliques_seq)} exceeds cap {depth_cap}"
            )
        x = monoid.trace(cliques_seq)
        base = self.cylinder_probability(s, x)

        generators: list[Trace] = []
        seen: set[tuple[Clique, ...]] = set()
        for i, g in enumerate(cliques_seq):
            head = tuple(a for c in cliques_seq[:i] for a in c) + g
            for a in monoid.alphabet:
                if a in g or not all(monoid.independent(a, b) for b in g):
                    continue
                violation = monoid.normalize(head + (a,))
                merged = monoid.lub(x, violation)
                if merged is None or merged.cliques in seen:
                    continue
                seen.add(merged.cliques)
                generators.append(merged)
        generators = [
            g
            for g in generators
            if not any(
                h is not g and monoid.is_prefix(h, g) for h in generators
            )
        ]

        union = 0.0
        remaining = budget

        def expand(start: int, current: Trace, size: int):
            nonlocal union, remaining
            for j in range(start, len(generators)):
                remaining -= 1
                if remaining < 0:
                    raise CapExceededError(
                        "inclusion-exclusion budget exhausted in prefix oracle"
                    )
                merged = (
                    generators[j]
                    if size == 0
                    else monoid.lub(current, generators[j])
                )
                if merged is None:
                    continue
                sign = 1.0 if size % 2 == 0 else -1.0
                union += sign * self.cylinder_probability(s, merged)
                expand(j + 1, merged, size + 1)

        expand(0, x, 0)
        value = base - union
        if check and value < 0:
            if value < -1e-9:
                raise NumericError(
                    f"prefix probability came out {value:.3e} < 0"
                )
            value = 0.0
        return value
