"""Trace monoid acting on reachable markings with an absorbing sink.

The sink (spelled None throughout) swallows every action that is not a
firing sequence from the current marking. On top of the action sit the
counting structures: the state-indexed alternating clique matrix, its
determinant (the theta polynomial), the certified characteristic root, and
the positive state-weight vector whose ratios form the cocycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KernelDegeneracyError, NotIrreducibleError, NumericError
from .monoid import DEFAULT_CLIQUE_CAP, Clique, Trace, TraceMonoid
from .petri import PetriNet, ReachabilityGraph
from .polynomials import IntPolynomial, RootEnclosure, count_roots, smallest_root

DEFAULT_ROOT_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_KERNEL_RTOL = 1e-6


@dataclass(frozen=True)
class PolyMatrix:
    """Square matrix of integer polynomials over the canonical state order."""

    entries: tuple[tuple[IntPolynomial, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def evaluate(self, x: float) -> np.ndarray:
        return np.array(
            [[p(float(x)) for p in row] for row in self.entries], dtype=float
        )

    def determinant(self) -> IntPolynomial:
        """Fraction-free elimination; every division is exact in Z[z]."""
        n = self.size
        a = [list(row) for row in self.entries]
        sign = 1
        prev = IntPolynomial.one()
        for k in range(n - 1):
            if a[k][k].is_zero:
                pivot_row = next(
                    (r for r in range(k + 1, n) if not a[r][k].is_zero), None
                )
                if pivot_row is None:
                    return IntPolynomial.zero()
                a[k], a[pivot_row] = a[pivot_row], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                    a[i][j] = num.divide_exact(prev)
            prev = a[k][k]
        det = a[n - 1][n - 1]
        return det if sign == 1 else -det

    def determinant_cofactor(self) -> IntPolynomial:
        """Expansion along the first row; independent cross-check for small
        matrices."""

        def det(rows: tuple[int, ...], cols: tuple[int, ...]) -> IntPolynomial:
            if len(rows) == 1:
                return self.entries[rows[0]][cols[0]]
            acc = IntPolynomial.zero()
            rest = rows[1:]
            for k, c in enumerate(cols):
                minor = det(rest, cols[:k] + cols[k + 1:])
                term = self.entries[rows[0]][c] * minor
                acc = acc + (term if k % 2 == 0 else -term)
            return acc

        idx = tuple(range(self.size))
        return det(idx, idx)


@dataclass(frozen=True)
class Cocycle:
    """Certified characteristic root and positive state weights; the weight
    ratio h(t)/h(s) is the multiplicative correction between states."""

    q0: RootEnclosure
    h: tuple[float, ...]

    def gamma(self, s: int, t: int) -> float:
        return self.h[t] / self.h[s]

    def gamma_table(self) -> np.ndarray:
        vec = np.array(self.h, dtype=float)
        return vec[np.newaxis, :] / vec[:, np.newaxis]


class AsyncSystem:
    """Right action of a trace monoid on a finite state set plus sink."""

    def __init__(self, monoid: TraceMonoid, state_labels, letter_action):
        self.monoid = monoid
        self.state_labels: tuple[str, ...] = tuple(state_labels)
        # letter_action[s][letter] -> state index or None (the sink)
        self.letter_action: tuple[dict[str, int | None], ...] = tuple(
            dict(row) for row in letter_action
        )
        if len(self.letter_action) != len(self.state_labels):
            raise ValueError("one action row per state required")
        self._assert_well_defined()

    @property
    def state_count(self) -> int:
        return len(self.state_labels)

    def _assert_well_defined(self):
        # The action must factor through commutation of independent letters.
        for s in range(self.state_count):
            for pair in self.monoid.independent_pairs:
                a, b = tuple(pair)
                ab = self.act_letter(self.act_letter(s, a), b)
                ba = self.act_letter(self.act_letter(s, b), a)
                assert ab == ba, (
                    f"action not well defined at state {self.state_labels[s]}: "
                    f"{a}{b} leads to {ab}, {b}{a} leads to {ba}"
                )

    def act_letter(self, s: int | None, a: str) -> int | None:
        if s is None:
            return None
        return self.letter_action[s][a]

    def act_word(self, s: int | None, word) -> int | None:
        for a in word:
            s = self.act_letter(s, a)
            if s is None:
                return None
        return s

    def act(self, s: int | None, x: Trace) -> int | None:
        return self.act_word(s, x.letters)

    def enabled_letters(self, s: int) -> tuple[str, ...]:
        return tuple(
            a for a in self.monoid.alphabet if self.letter_action[s][a] is not None
        )

    def is_irreducible(self) -> bool:
        """Every state reaches every state through a non-empty action."""
        n = self.state_count
        succ = [
            {t for t in (self.letter_action[s][a] for a in self.monoid.alphabet) if t is not None}
            for s in range(n)
        ]
        if n == 1:
            return bool(succ[0])
        pred = [set() for _ in range(n)]
        for s, targets in enumerate(succ):
            for t in targets:
                pred[t].add(s)
        return _reaches_all(succ, n) and _reaches_all(pred, n)

    # -- counting structures ----------------------------------------------

    def clique_action(self, s: int, clique: Clique) -> int | None:
        return self.act_word(s, clique)

    def mobius_matrix(self, cap: int = DEFAULT_CLIQUE_CAP) -> PolyMatrix:
        """Entry (s,t): alternating count of cliques sending s to t, with the
        empty clique contributing 1 on the diagonal."""
        n = self.state_count
        max_len = max((len(c) for c in self.monoid.cliques(cap)), default=0)
        coeffs = [[[0] * (max_len + 1) for _ in range(n)] for _ in range(n)]
        for s in range(n):
            coeffs[s][s][0] = 1
            for c in self.monoid.cliques(cap):
                t = self.clique_action(s, c)
                if t is not None:
                    k = len(c)
                    coeffs[s][t][k] += -1 if k % 2 else 1
        return PolyMatrix(
            tuple(
                tuple(IntPolynomial(tuple(coeffs[s][t])) for t in range(n))
                for s in range(n)
            )
        )

    def growth_matrix_coefficients(
        self, n: int, cap: int = DEFAULT_CLIQUE_CAP
    ) -> list[list[list[int]]]:
        """counts[s][t][k] = number of traces of length k sending s to t,
        by dynamic programming over (last clique, current state, length)."""
        cliques = self.monoid.cliques(cap)
        succ = {
            g: tuple(h for h in cliques if self.monoid.is_normal_pair(g, h))
            for g in cliques
        }
        size = self.state_count
        counts = [[[0] * (n + 1) for _ in range(size)] for _ in range(size)]
        for s in range(size):
            counts[s][s][0] = 1
            # layer: (last clique, state) -> count at current length
            layers: dict[int, dict[tuple[Clique, int], int]] = {}
            for c in cliques:
                t = self.clique_action(s, c)
                if t is not None and len(c) <= n:
                    layers.setdefault(len(c), {})
                    layers[len(c)][(c, t)] = layers[len(c)].get((c, t), 0) + 1
            for k in range(1, n + 1):
                layer = layers.get(k)
                if not layer:
                    continue
                for (g, t), cnt in layer.items():
                    counts[s][t][k] += cnt
                    for h in succ[g]:
                        k2 = k + len(h)
                        if k2 > n:
                            continue
                        u = self.clique_action(t, h)
                        if u is None:
                            continue
                        layers.setdefault(k2, {})
                        layers[k2][(h, u)] = layers[k2].get((h, u), 0) + cnt
        return counts

    def theta_polynomial(self, cap: int = DEFAULT_CLIQUE_CAP) -> IntPolynomial:
        return self.mobius_matrix(cap).determinant()

    def characteristic_root(
        self, tol: float = DEFAULT_ROOT_TOL, cap: int = DEFAULT_CLIQUE_CAP
    ) -> RootEnclosure:
        """Smallest positive root of the theta polynomial, certified."""
        if not self.is_irreducible():
            raise NotIrreducibleError(
                "the action is not irreducible; the characteristic root "
                "is only meaningful for irreducible systems"
            )
        theta = self.theta_polynomial(cap)
        try:
            root = smallest_root(theta, 0, 1, tol)
        except ValueError as exc:
            raise NumericError(
                f"theta has no root in (0, 1]; this contradicts the theory "
                f"and indicates a modeling bug ({exc})"
            ) from None
        return root

    def cocycle(
        self,
        q0: RootEnclosure,
        residual_tol: float = DEFAULT_RESIDUAL_TOL,
        kernel_rtol: float = DEFAULT_KERNEL_RTOL,
        cap: int = DEFAULT_CLIQUE_CAP,
    ) -> Cocycle:
        """Positive null vector of the alternating clique matrix at the
        characteristic root, normalized to 1 at the first state.

        The per-state first-clique normalization equations say exactly that
        this matrix annihilates the weight vector, so the weights span its
        kernel. A kernel that is not one-dimensional at tolerance is
        reported, never resolved silently.
        """
        theta = self.theta_polynomial(cap)
        if count_roots(theta, q0.low, q0.high) < 1:
            raise NumericError(
                "the supplied enclosure does not certify a root of theta"
            )
        matrix = self.mobius_matrix(cap)
        a = matrix.evaluate(q0.midpoint)
        _, sing, vt = np.linalg.svd(a)
        smax = float(sing[0]) if sing.size else 0.0
        # the enclosure width bounds how far the evaluation point sits from
        # the true root, hence an absolute floor for "numerically zero"
        threshold = max(
            kernel_rtol * smax,
            a.shape[0] * np.finfo(float).eps * smax,
            1e3 * float(q0.width),
        )
        null_count = int(np.sum(sing <= threshold))
        if null_count == 0:
            raise NumericError(
                f"no numerical null direction at the characteristic root "
                f"(smallest singular value {sing[-1]:.3e})"
            )
        if null_count >= 2:
            raise KernelDegeneracyError(
                f"kernel at the characteristic root is {null_count}-dimensional "
                f"at tolerance; refusing to pick a weight vector",
                vt[-null_count:],
            )
        vec = vt[-1]
        if vec[0] == 0:
            raise NumericError("weight vector vanishes at the first state")
        vec = vec / vec[0]
        if np.any(vec <= 0):
            raise NumericError(
                f"weight vector is not strictly positive: {vec.tolist()}"
            )
        residual = float(np.max(np.abs(a @ vec)))
        if residual > residual_tol:
            raise NumericError(
                f"weight-vector residual {residual:.3e} exceeds {residual_tol:.1e}"
            )
        return Cocycle(q0, tuple(float(v) for v in vec))


def _reaches_all(adj: list[set[int]], n: int) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        s = stack.pop()
        for t in adj[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return len(seen) == n


def build_system(net: PetriNet, graph: ReachabilityGraph) -> AsyncSystem:
    """Assemble the action table of a net over its reachable markings:
    fire when enabled, fall into the sink otherwise."""
    alphabet, pairs = net.independence_alphabet()
    monoid = TraceMonoid(alphabet, pairs)
    index = graph.index
    rows = []
    for marking in graph.markings:
        row: dict[str, int | None] = {}
        for t in net.transitions:
            if t.pre <= marking:
                row[t.name] = index[net.fire(marking, t.name)]
            else:
                row[t.name] = None
        rows.append(row)
    labels = tuple(f"M{i}" for i in range(len(graph.markings)))
    return AsyncSystem(monoid, labels, rows)
