"""Trace monoids: cliques, normal forms, prefix order, growth combinatorics.

A trace is stored canonically as its normal sequence of cliques: each letter
of a clique is blocked by (dependent on) some letter of the clique before it.
Words normalize by heap insertion, letters falling to the lowest level where
a dependent letter sits below them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CapExceededError
from .polynomials import IntPolynomial

DEFAULT_CLIQUE_CAP = 1 << 16
DEFAULT_ENUM_LENGTH_CAP = 10

Clique = tuple[str, ...]


@dataclass(frozen=True)
class Trace:
    """Normal sequence of cliques; the empty tuple is the identity trace."""

    cliques: tuple[Clique, ...]

    def __len__(self) -> int:
        return sum(len(c) for c in self.cliques)

    @property
    def is_empty(self) -> bool:
        return not self.cliques

    @property
    def letters(self) -> tuple[str, ...]:
        return tuple(a for c in self.cliques for a in c)

    def to_lists(self) -> list[list[str]]:
        return [list(c) for c in self.cliques]


EPSILON = Trace(())


class TraceMonoid:
    """Alphabet with a symmetric irreflexive independence relation."""

    def __init__(self, alphabet, independent_pairs):
        self.alphabet: tuple[str, ...] = tuple(alphabet)
        self.letter_index = {a: i for i, a in enumerate(self.alphabet)}
        if len(self.letter_index) != len(self.alphabet):
            raise ValueError("alphabet letters must be unique")
        ind: dict[str, set[str]] = {a: set() for a in self.alphabet}
        for pair in independent_pairs:
            a, b = tuple(pair) if len(tuple(pair)) == 2 else (None, None)
            if a is None or a == b:
                raise ValueError(f"independence pair must be two distinct letters: {pair!r}")
            if a not in ind or b not in ind:
                raise ValueError(f"independence pair uses unknown letter: {pair!r}")
            ind[a].add(b)
            ind[b].add(a)
        self._independent = {a: frozenset(s) for a, s in ind.items()}
        self._dependent = {
            a: frozenset(set(self.alphabet) - s)  # includes a itself
            for a, s in ind.items()
        }
        self._clique_cache: tuple[Clique, ...] | None = None

    @property
    def independent_pairs(self) -> frozenset[frozenset[str]]:
        return frozenset(
            frozenset((a, b))
            for a in self.alphabet
            for b in self._independent[a]
            if self.letter_index[a] < self.letter_index[b]
        )

    def independent(self, a: str, b: str) -> bool:
        return b in self._independent[a]

    def dependent_letters(self, a: str) -> frozenset[str]:
        return self._dependent[a]

    def _check_letter(self, a: str):
        if a not in self.letter_index:
            raise ValueError(f"unknown letter {a!r}")

    # -- cliques ---------------------------------------------------------

    def is_clique(self, letters) -> bool:
        letters = tuple(letters)
        if not letters or len(set(letters)) != len(letters):
            return False
        return all(
            self.independent(a, b)
            for i, a in enumerate(letters)
            for b in letters[i + 1:]
        )

    def clique(self, letters) -> Clique:
        c = tuple(sorted(letters, key=self.letter_index.__getitem__))
        if not self.is_clique(c):
            raise ValueError(f"{letters!r} is not a clique")
        return c

    def cliques(self, cap: int = DEFAULT_CLIQUE_CAP) -> tuple[Clique, ...]:
        """All non-empty cliques of the independence graph, smallest first
        (graded by size, then letter order). The empty clique is excluded."""
        if self._clique_cache is None:
            found: list[Clique] = []

            def extend(prefix: tuple[str, ...], candidates: tuple[str, ...]):
                for k, a in enumerate(candidates):
                    cur = prefix + (a,)
                    found.append(cur)
                    if len(found) > cap:
                        raise CapExceededError(
                            f"clique count exceeds cap {cap}"
                        )
                    extend(
                        cur,
                        tuple(
                            b
                            for b in candidates[k + 1:]
                            if self.independent(a, b)
                        ),
                    )

            extend((), self.alphabet)
            key = lambda c: (len(c), tuple(self.letter_index[a] for a in c))
            self._clique_cache = tuple(sorted(found, key=key))
        if len(self._clique_cache) > cap:
            raise CapExceededError(f"clique count exceeds cap {cap}")
        return self._clique_cache

    def is_normal_pair(self, first: Clique, second: Clique) -> bool:
        """True when every letter of the second clique is blocked by some
        letter of the first (a letter always blocks itself)."""
        head = set(first)
        return all(head & self._dependent[b] for b in second)

    # -- normal form -----------------------------------------------------

    def normalize(self, word) -> Trace:
        """Normal form of a word: each letter falls to the level above its
        highest dependent letter."""
        levels: list[list[str]] = []
        for a in word:
            self._check_letter(a)
            dep = self._dependent[a]
            i = len(levels)
            while i > 0 and not dep.intersection(levels[i - 1]):
                i -= 1
            if i == len(levels):
                levels.append([a])
            else:
                levels[i].append(a)
        return Trace(
            tuple(
                tuple(sorted(lvl, key=self.letter_index.__getitem__))
                for lvl in levels
            )
        )

    def trace(self, cliques) -> Trace:
        """Build a trace from an explicit normal sequence, validating it."""
        normalized = tuple(self.clique(c) for c in cliques)
        for g, h in zip(normalized, normalized[1:]):
            if not self.is_normal_pair(g, h):
                raise ValueError(f"{g!r} -> {h!r} is not a normal pair")
        return Trace(normalized)

    def trace_equal(self, w1, w2) -> bool:
        return self.normalize(w1) == self.normalize(w2)

    def concat(self, x: Trace, y: Trace) -> Trace:
        return self.normalize(x.letters + y.letters)

    # -- prefix order ----------------------------------------------------

    def _remove_minimal(self, x: Trace, a: str) -> Trace | None:
        """Left-divide x by the letter a, or None when a is not minimal."""
        if not x.cliques or a not in x.cliques[0]:
            return None
        first = tuple(b for b in x.cliques[0] if b != a)
        rest = tuple(b for c in x.cliques[1:] for b in c)
        return self.normalize(first + rest)

    def is_prefix(self, x: Trace, xi: Trace) -> bool:
        """True when xi = x . z for some trace z."""
        rest = xi
        for a in x.letters:
            nxt = self._remove_minimal(rest, a)
            if nxt is None:
                return False
            rest = nxt
        return True

    # -- least upper bounds ----------------------------------------------

    def _dependent_pairs(self) -> list[tuple[str, str]]:
        return [
            (a, b)
            for i, a in enumerate(self.alphabet)
            for b in self.alphabet[i + 1:]
            if not self.independent(a, b)
        ]

    @staticmethod
    def _project(letters, keep) -> tuple[str, ...]:
        return tuple(a for a in letters if a in keep)

    def lub(self, x: Trace, y: Trace) -> Trace | None:
        """Least common extension of x and y, or None when incompatible.

        A trace is determined by its projections onto dependent letter pairs
        together with per-letter occurrence counts; two traces admit a common
        extension exactly when each such projection of one is a word prefix
        of the other's, and the lub realizes the pointwise-longer projection.
        """
        xl, yl = x.letters, y.letters
        targets: dict[tuple[str, str], tuple[str, ...]] = {}
        for a, b in self._dependent_pairs():
            keep = {a, b}
            px = self._project(xl, keep)
            py = self._project(yl, keep)
            if len(px) < len(py):
                px, py = py, px
            if px[: len(py)] != py:
                return None
            targets[(a, b)] = px
        counts = {a: 0 for a in self.alphabet}
        for a in xl:
            counts[a] += 1
        for a in self.alphabet:
            counts[a] = max(counts[a], sum(1 for b in yl if b == a))

        pairs_of = {a: [] for a in self.alphabet}
        for key in targets:
            pairs_of[key[0]].append(key)
            pairs_of[key[1]].append(key)
        pos = {key: 0 for key in targets}
        out: list[str] = []
        remaining = sum(counts.values())
        while remaining:
            emitted = False
            for a in self.alphabet:
                if counts[a] == 0:
                    continue
                if all(
                    pos[key] < len(targets[key]) and targets[key][pos[key]] == a
                    for key in pairs_of[a]
                ):
                    out.append(a)
                    counts[a] -= 1
                    remaining -= 1
                    for key in pairs_of[a]:
                        pos[key] += 1
                    emitted = True
                    break
            if not emitted:
                return None
        return self.normalize(out)

    # -- combinatorics ---------------------------------------------------

    def mobius_polynomial(self, cap: int = DEFAULT_CLIQUE_CAP) -> IntPolynomial:
        """Alternating clique-count polynomial, empty clique included."""
        coeffs = [0] * (len(self.alphabet) + 1)
        coeffs[0] = 1
        for c in self.cliques(cap):
            k = len(c)
            coeffs[k] += -1 if k % 2 else 1
        return IntPolynomial(tuple(coeffs))

    def growth_coefficients(self, n: int, cap: int = DEFAULT_CLIQUE_CAP) -> list[int]:
        """Exact trace counts by length, from the inverse of the alternating
        clique polynomial: lam(0)=1, lam(k) = -sum_j mu_j lam(k-j)."""
        if n < 0:
            raise ValueError("n must be >= 0")
        mu = self.mobius_polynomial(cap).coefficients
        lam = [1]
        for k in range(1, n + 1):
            acc = 0
            for j in range(1, min(k, len(mu) - 1) + 1):
                acc += mu[j] * lam[k - j]
            lam.append(-acc)
        return lam

    def _normal_successors(self, cap: int) -> dict[Clique, tuple[Clique, ...]]:
        cliques = self.cliques(cap)
        return {
            g: tuple(h for h in cliques if self.is_normal_pair(g, h))
            for g in cliques
        }

    def enumerate_traces(
        self,
        n: int,
        length_cap: int = DEFAULT_ENUM_LENGTH_CAP,
        clique_cap: int = DEFAULT_CLIQUE_CAP,
    ) -> list[Trace]:
        """Every trace of length <= n exactly once, walking normal sequences.

        Oracle-scale only; guarded by the length cap."""
        if n > length_cap:
            raise CapExceededError(
                f"enumeration length {n} exceeds cap {length_cap}"
            )
        succ = self._normal_successors(clique_cap)
        out: list[Trace] = [EPSILON]
        stack: list[tuple[tuple[Clique, ...], int]] = [
            ((c,), len(c)) for c in reversed(self.cliques(clique_cap)) if len(c) <= n
        ]
        while stack:
            seq, size = stack.pop()
            out.append(Trace(seq))
            for h in succ[seq[-1]]:
                if size + len(h) <= n:
                    stack.append((seq + (h,), size + len(h)))
        return out

    def count_traces_by_length(
        self,
        n: int,
        length_cap: int = DEFAULT_ENUM_LENGTH_CAP,
        clique_cap: int = DEFAULT_CLIQUE_CAP,
    ) -> list[int]:
        """Trace counts by direct traversal of the clique graph, without
        materializing traces; independent of the inverse-polynomial recurrence."""
        if n > length_cap:
            raise CapExceededError(
                f"counting length {n} exceeds cap {length_cap}"
            )
        succ = self._normal_successors(clique_cap)
        counts = [0] * (n + 1)
        counts[0] = 1

        def walk(last: Clique, size: int):
            counts[size] += 1
            for h in succ[last]:
                if size + len(h) <= n:
                    walk(h, size + len(h))

        for c in self.cliques(clique_cap):
            if len(c) <= n:
                walk(c, len(c))
        return counts
