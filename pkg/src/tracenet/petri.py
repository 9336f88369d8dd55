"""1-safe Petri nets: parsing, firing rule, reachability, distant transitions.

Markings are place subsets (frozensets); the canonical order of places and
transitions is the document order of the input, and reachable markings are
numbered in BFS discovery order with the initial marking at index 0. Every
downstream matrix is indexed through these orders.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .errors import CapExceededError, NetFormatError, NotOneSafeError

DEFAULT_MAX_STATES = 1 << 20


@dataclass(frozen=True)
class Transition:
    name: str
    pre: frozenset[str]
    post: frozenset[str]


class PetriNet:
    """Net structure plus initial marking, immutable after construction."""

    def __init__(self, places, transitions, initial_marking):
        self.places: tuple[str, ...] = tuple(places)
        self.place_index = {p: i for i, p in enumerate(self.places)}
        if len(self.place_index) != len(self.places):
            dup = _first_duplicate(self.places)
            raise NetFormatError(f"places: duplicate identifier {dup!r}")

        parsed = []
        seen = set()
        for i, (name, pre, post) in enumerate(transitions):
            where = f"transitions[{i}]"
            if name in seen:
                raise NetFormatError(f"{where}: duplicate identifier {name!r}")
            seen.add(name)
            if not pre:
                raise NetFormatError(f"{where} ({name!r}): empty preset")
            if not post:
                raise NetFormatError(f"{where} ({name!r}): empty postset")
            for kind, group in (("pre", pre), ("post", post)):
                for j, p in enumerate(group):
                    if p not in self.place_index:
                        raise NetFormatError(
                            f"{where}.{kind}[{j}]: unknown place {p!r}"
                        )
            pre_set = frozenset(pre)
            post_set = frozenset(post)
            if len(pre_set) != len(tuple(pre)):
                raise NetFormatError(f"{where}.pre: duplicate place")
            if len(post_set) != len(tuple(post)):
                raise NetFormatError(f"{where}.post: duplicate place")
            parsed.append(Transition(name, pre_set, post_set))
        self.transitions: tuple[Transition, ...] = tuple(parsed)
        self.transition_index = {t.name: i for i, t in enumerate(self.transitions)}

        for j, p in enumerate(initial_marking):
            if p not in self.place_index:
                raise NetFormatError(f"initial_marking[{j}]: unknown place {p!r}")
        marking = frozenset(initial_marking)
        if len(marking) != len(tuple(initial_marking)):
            raise NetFormatError("initial_marking: duplicate place")
        self.initial_marking: frozenset[str] = marking

    def transition(self, name: str) -> Transition:
        try:
            return self.transitions[self.transition_index[name]]
        except KeyError:
            raise NetFormatError(f"unknown transition {name!r}") from None

    def enables(self, marking: frozenset[str], name: str) -> bool:
        return self.transition(name).pre <= marking

    def fire(self, marking: frozenset[str], name: str) -> frozenset[str]:
        """Apply the firing rule: consume the preset, produce the postset,
        leave read places (pre and post) and unrelated places alone."""
        t = self.transition(name)
        if not t.pre <= marking:
            raise ValueError(f"transition {name!r} is not enabled")
        return (marking - (t.pre - t.post)) | (t.post - t.pre)

    def distant(self, t: str, u: str) -> bool:
        """True when the two transitions touch disjoint place sets."""
        if t == u:
            raise ValueError("distant is irreflexive; got the same transition twice")
        a = self.transition(t)
        b = self.transition(u)
        return not (a.pre | a.post) & (b.pre | b.post)

    def independence_alphabet(self):
        """Alphabet (all transitions, document order) plus the symmetric
        irreflexive relation of unordered distant pairs."""
        names = tuple(t.name for t in self.transitions)
        pairs = set()
        for i, t in enumerate(names):
            for u in names[i + 1:]:
                if self.distant(t, u):
                    pairs.add(frozenset((t, u)))
        return names, frozenset(pairs)

    def marking_bits(self, marking: frozenset[str]) -> int:
        bits = 0
        for p in marking:
            bits |= 1 << self.place_index[p]
        return bits

    def marking_places(self, marking: frozenset[str]) -> tuple[str, ...]:
        return tuple(sorted(marking, key=self.place_index.__getitem__))


@dataclass(frozen=True)
class ReachabilityGraph:
    markings: tuple[frozenset[str], ...]
    edges: tuple[tuple[int, str, int], ...]
    dead_transitions: tuple[str, ...]

    @property
    def index(self) -> dict[frozenset[str], int]:
        return {m: i for i, m in enumerate(self.markings)}


def parse_net(text: str) -> PetriNet:
    """Parse the JSON net document and validate it structurally."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetFormatError(f"invalid JSON: {exc}") from None
    return net_from_document(doc)


def net_from_document(doc) -> PetriNet:
    if not isinstance(doc, dict):
        raise NetFormatError("top level must be an object")
    required = {"places", "transitions", "initial_marking"}
    unknown = set(doc) - required
    if unknown:
        raise NetFormatError(f"unknown keys: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise NetFormatError(f"missing keys: {sorted(missing)}")

    places = _string_list(doc["places"], "places")
    if not isinstance(doc["transitions"], list):
        raise NetFormatError("transitions: expected a list")
    transitions = []
    for i, entry in enumerate(doc["transitions"]):
        where = f"transitions[{i}]"
        if not isinstance(entry, dict):
            raise NetFormatError(f"{where}: expected an object")
        t_unknown = set(entry) - {"id", "pre", "post"}
        if t_unknown:
            raise NetFormatError(f"{where}: unknown keys: {sorted(t_unknown)}")
        if set(entry) != {"id", "pre", "post"}:
            raise NetFormatError(f"{where}: needs exactly id, pre, post")
        if not isinstance(entry["id"], str):
            raise NetFormatError(f"{where}.id: expected a string")
        transitions.append(
            (
                entry["id"],
                _string_list(entry["pre"], f"{where}.pre"),
                _string_list(entry["post"], f"{where}.post"),
            )
        )
    initial = _string_list(doc["initial_marking"], "initial_marking")
    return PetriNet(places, transitions, initial)


def net_to_document(net: PetriNet) -> dict:
    return {
        "places": list(net.places),
        "transitions": [
            {
                "id": t.name,
                "pre": sorted(t.pre, key=net.place_index.__getitem__),
                "post": sorted(t.post, key=net.place_index.__getitem__),
            }
            for t in net.transitions
        ],
        "initial_marking": sorted(
            net.initial_marking, key=net.place_index.__getitem__
        ),
    }


def _string_list(value, where: str) -> list[str]:
    if not isinstance(value, list):
        raise NetFormatError(f"{where}: expected a list")
    for j, item in enumerate(value):
        if not isinstance(item, str):
            raise NetFormatError(f"{where}[{j}]: expected a string")
    return list(value)


def _first_duplicate(items):
    seen = set()
    for x in items:
        if x in seen:
            return x
        seen.add(x)
    return None


def reachability_graph(net: PetriNet, max_states: int = DEFAULT_MAX_STATES) -> ReachabilityGraph:
    """BFS closure of the initial marking under the firing rule.

    Rejects the net as not 1-safe the moment some enabled transition would
    add a token to an already occupied place outside its preset; the error
    carries a witness firing sequence from the initial marking.
    """
    m0 = net.initial_marking
    order: list[frozenset[str]] = [m0]
    index: dict[frozenset[str], int] = {m0: 0}
    # parent pointers reconstruct the witness firing sequence on violation
    parent: dict[int, tuple[int, str]] = {}
    edges: list[tuple[int, str, int]] = []
    fired: set[str] = set()
    queue = deque([0])
    while queue:
        s = queue.popleft()
        marking = order[s]
        for t in net.transitions:
            if not t.pre <= marking:
                continue
            contact = (t.post - t.pre) & marking
            if contact:
                raise NotOneSafeError(
                    f"firing {t.name!r} would put a second token on "
                    f"{sorted(contact)[0]!r}",
                    _path_to(parent, s) + (t.name,),
                )
            fired.add(t.name)
            nxt = (marking - (t.pre - t.post)) | (t.post - t.pre)
            if nxt not in index:
                if len(order) >= max_states:
                    raise CapExceededError(
                        f"reachable state count exceeds max_states={max_states}"
                    )
                index[nxt] = len(order)
                parent[index[nxt]] = (s, t.name)
                order.append(nxt)
                queue.append(index[nxt])
            edges.append((s, t.name, index[nxt]))
    dead = tuple(t.name for t in net.transitions if t.name not in fired)
    return ReachabilityGraph(tuple(order), tuple(edges), dead)


def _path_to(parent: dict[int, tuple[int, str]], s: int) -> tuple[str, ...]:
    path: list[str] = []
    while s in parent:
        s, letter = parent[s]
        path.append(letter)
    return tuple(reversed(path))
