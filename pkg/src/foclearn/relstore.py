"""Finite relational structures, their Gaifman graphs and audited local access.

Element ids are strings at the boundary and dense integer handles inside.
Every structure is immutable once built.
"""

from __future__ import annotations

import io
import json
import math
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

INFINITY = math.inf

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class RelstoreError(Exception):
    pass


class UnknownElementError(RelstoreError, KeyError):
    pass


class FormatError(RelstoreError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ArityMismatchError(FormatError):
    pass


class UnknownSymbolError(FormatError):
    pass


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        symbols = tuple((str(n), int(a)) for n, a in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        seen = set()
        for name, arity in symbols:
            if not _IDENT.match(name):
                raise ValueError(f"invalid relation name {name!r}")
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
            if name in seen:
                raise ValueError(f"duplicate relation symbol {name}")
            seen.add(name)
        object.__setattr__(self, "_arity", dict(symbols))

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(arities.items()))

    def __contains__(self, name: object) -> bool:
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise UnknownSymbolError(f"unknown relation symbol {name!r}") from None

    def extend(self, extra: Iterable[tuple[str, int]]) -> "Signature":
        return Signature(self.symbols + tuple(extra))

    def to_json(self) -> list[dict]:
        return [{"name": n, "arity": a} for n, a in self.symbols]


class Structure:
    """A finite sigma-structure over string element ids.

    Relations of arity >= 1 are frozensets of handle tuples; 0-ary relations
    are plain booleans.
    """

    def __init__(
        self,
        signature: Signature,
        universe: Iterable[str],
        relations: Mapping[str, Iterable[Sequence[str]]] | None = None,
    ):
        names = tuple(str(u) for u in universe)
        index = {n: i for i, n in enumerate(names)}
        if len(index) != len(names):
            raise ValueError("universe contains duplicate element ids")
        handled: dict[str, list[tuple[int, ...]]] = {}
        for rel, tuples in (relations or {}).items():
            arity = signature.arity(rel)
            out = handled.setdefault(rel, [])
            for tup in tuples:
                tup = tuple(tup)
                if len(tup) != arity:
                    raise ArityMismatchError(
                        f"tuple {list(tup)} has length {len(tup)} but {rel} has arity {arity}"
                    )
                try:
                    out.append(tuple(index[str(e)] for e in tup))
                except KeyError as exc:
                    raise UnknownElementError(f"element {exc.args[0]!r} not in universe") from None
        self._init(signature, names, index, handled)

    def _init(self, signature, names, index, handled):
        self.signature = signature
        self._names = names
        self._index = index
        self._rels: dict[str, frozenset[tuple[int, ...]]] = {}
        self._nullary: dict[str, bool] = {}
        for rel, arity in signature:
            tuples = handled.get(rel, ())
            if arity == 0:
                self._nullary[rel] = any(True for _ in tuples)
            else:
                self._rels[rel] = frozenset(tuples)

    @classmethod
    def from_handles(
        cls,
        signature: Signature,
        names: Sequence[str],
        relations: Mapping[str, Iterable[tuple[int, ...]]],
    ) -> "Structure":
        self = cls.__new__(cls)
        names = tuple(names)
        self._init(signature, names, {n: i for i, n in enumerate(names)}, relations)
        return self

    # -- elements -------------------------------------------------------
    def __len__(self) -> int:
        return len(self._names)

    @property
    def size(self) -> int:
        return len(self._names)

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def handle(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownElementError(f"unknown element {name!r}") from None

    def handles(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.handle(n) for n in names)

    def name(self, handle: int) -> str:
        self.check(handle)
        return self._names[handle]

    def check(self, handle: int) -> int:
        if not 0 <= handle < len(self._names):
            raise UnknownElementError(f"unknown element handle {handle}")
        return handle

    # -- relations ------------------------------------------------------
    def relation(self, rel: str) -> frozenset[tuple[int, ...]]:
        if rel in self._nullary:
            return frozenset({()}) if self._nullary[rel] else frozenset()
        try:
            return self._rels[rel]
        except KeyError:
            raise UnknownSymbolError(f"unknown relation symbol {rel!r}") from None

    def holds(self, rel: str, tup: tuple[int, ...]) -> bool:
        if rel in self._nullary:
            return self._nullary[rel] if not tup else False
        try:
            return tup in self._rels[rel]
        except KeyError:
            raise UnknownSymbolError(f"unknown relation symbol {rel!r}") from None

    def nullary(self, rel: str) -> bool:
        return self._nullary[rel]

    def tuple_count(self) -> int:
        return sum(len(t) for t in self._rels.values()) + sum(self._nullary.values())

    @cached_property
    def incident(self) -> tuple[tuple[tuple[str, tuple[int, ...]], ...], ...]:
        """Per-element list of (relation, tuple) pairs containing that element."""
        buckets: list[list] = [[] for _ in self._names]
        for rel, tuples in self._rels.items():
            for tup in tuples:
                for v in set(tup):
                    buckets[v].append((rel, tup))
        for b in buckets:
            b.sort()
        return tuple(tuple(b) for b in buckets)

    @cached_property
    def gaifman(self) -> "GaifmanIndex":
        return build_gaifman(self)

    # -- derived structures ----------------------------------------------
    def induced(self, handles: Iterable[int]) -> "Structure":
        keep = sorted(set(handles))
        for h in keep:
            self.check(h)
        remap = {h: i for i, h in enumerate(keep)}
        rels: dict[str, list[tuple[int, ...]]] = {}
        for rel, tuples in self._rels.items():
            out = rels[rel] = []
            if len(keep) * 4 < len(self._names):
                cand = {t for h in keep for r, t in self.incident[h] if r == rel}
            else:
                cand = tuples
            for tup in cand:
                if all(e in remap for e in tup):
                    out.append(tuple(remap[e] for e in tup))
        for rel, val in self._nullary.items():
            rels[rel] = [()] if val else []
        return Structure.from_handles(self.signature, [self._names[h] for h in keep], rels)

    def expand(
        self, extra: Signature | Iterable[tuple[str, int]], relations: Mapping[str, Iterable[tuple[int, ...]]]
    ) -> "Structure":
        """sigma'-expansion: same universe, old relations untouched, new symbols added."""
        extra = tuple(extra)
        for name, _ in extra:
            if name in self.signature:
                raise ValueError(f"expansion symbol {name} already in signature")
        sig = self.signature.extend(extra)
        rels: dict[str, Iterable[tuple[int, ...]]] = dict(self._rels)
        for rel, val in self._nullary.items():
            rels[rel] = [()] if val else []
        for name, arity in extra:
            tuples = [tuple(t) for t in relations.get(name, ())]
            for t in tuples:
                if len(t) != arity:
                    raise ArityMismatchError(f"{name} expects arity {arity}")
                for e in t:
                    self.check(e)
            rels[name] = tuples
        return Structure.from_handles(sig, self._names, rels)

    def restrict(self, signature: Signature) -> "Structure":
        rels = {}
        for rel, _ in signature:
            rels[rel] = self.relation(rel)
        return Structure.from_handles(signature, self._names, rels)

    def named_relations(self) -> dict[str, set[tuple[str, ...]]]:
        return {
            rel: {tuple(self._names[e] for e in t) for t in self.relation(rel)}
            for rel, _ in self.signature
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.signature == other.signature
            and self._names == other._names
            and self._rels == other._rels
            and self._nullary == other._nullary
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Structure(|A|={len(self)}, sigma={list(self.signature.names)}, tuples={self.tuple_count()})"


@dataclass(frozen=True, eq=False)
class GaifmanIndex:
    adjacency: tuple[tuple[int, ...], ...]
    degree: int

    @property
    def size(self) -> int:
        return len(self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        if not 0 <= v < len(self.adjacency):
            raise UnknownElementError(f"unknown element handle {v}")
        return self.adjacency[v]

    def has_edge(self, v: int, w: int) -> bool:
        return w in self._adjsets[v]

    @cached_property
    def _adjsets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(len(self.adjacency) + 1, dtype=np.int64)
        for i, nb in enumerate(self.adjacency):
            indptr[i + 1] = indptr[i] + len(nb)
        indices = np.fromiter(
            (w for nb in self.adjacency for w in nb), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def edges(self) -> set[frozenset[int]]:
        return {frozenset((v, w)) for v, nb in enumerate(self.adjacency) for w in nb}


def build_gaifman(s: Structure) -> GaifmanIndex:
    nbrs: list[set[int]] = [set() for _ in range(len(s))]
    for rel, arity in s.signature:
        if arity < 2:
            continue
        for tup in s.relation(rel):
            distinct = set(tup)
            if len(distinct) < 2:
                continue
            for v in distinct:
                nbrs[v].update(distinct)
    for v, nb in enumerate(nbrs):
        nb.discard(v)
    adjacency = tuple(tuple(sorted(nb)) for nb in nbrs)
    degree = max((len(a) for a in adjacency), default=0)
    return GaifmanIndex(adjacency, degree)


def _as_tuple(a: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(a, (int, np.integer)):
        return (int(a),)
    return tuple(int(x) for x in a)


def bfs_distances(g: GaifmanIndex, sources: Sequence[int], radius: float = INFINITY) -> dict[int, int]:
    """Distances from the source set, explored up to ``radius``."""
    dist: dict[int, int] = {}
    queue: deque[int] = deque()
    for v in sources:
        g.neighbors(v)
        if v not in dist:
            dist[v] = 0
            queue.append(v)
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv >= radius:
            continue
        for w in g.adjacency[v]:
            if w not in dist:
                dist[w] = dv + 1
                queue.append(w)
    return dist


def distance(g: GaifmanIndex, a: int | Sequence[int], b: int) -> float:
    """Shortest-path distance; for a tuple, the minimum over its entries."""
    sources = _as_tuple(a)
    g.neighbors(b)
    if not sources:
        return INFINITY
    if b in sources:
        return 0
    seen = set(sources)
    for v in sources:
        g.neighbors(v)
    frontier = list(seen)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for w in g.adjacency[v]:
                if w == b:
                    return d
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return INFINITY


def ball(g: GaifmanIndex, vs: int | Sequence[int], r: int) -> frozenset[int]:
    if r < 0:
        raise ValueError("radius must be non-negative")
    # the ball of the empty tuple is empty by convention
    return frozenset(bfs_distances(g, _as_tuple(vs), r))


def induced_neighborhood(s: Structure, vs: int | Sequence[int], r: int) -> Structure:
    return s.induced(ball(s.gaifman, vs, r))


class AccessAudit:
    """Counters for oracle use. Safe for concurrent increments."""

    __slots__ = ("membership_queries", "neighbor_queries", "global_scans", "_lock")

    def __init__(self):
        self.membership_queries = 0
        self.neighbor_queries = 0
        self.global_scans = 0
        self._lock = threading.Lock()

    def bump(self, counter: str, n: int = 1) -> None:
        with self._lock:
            setattr(self, counter, getattr(self, counter) + n)

    def snapshot(self) -> dict[str, int]:
        return {
            "membership_queries": self.membership_queries,
            "neighbor_queries": self.neighbor_queries,
            "global_scans": self.global_scans,
        }

    def total(self) -> int:
        return self.membership_queries + self.neighbor_queries + self.global_scans

    def merge(self, other: "AccessAudit") -> None:
        with self._lock:
            self.membership_queries += other.membership_queries
            self.neighbor_queries += other.neighbor_queries
            self.global_scans += other.global_scans

    def __repr__(self) -> str:
        return f"AccessAudit({self.snapshot()})"


class LocalOracle:
    """Local access to a structure: membership tests and neighbour lists only.

    Anything that touches the whole universe goes through :meth:`universe`
    and is counted as a global scan.
    """

    def __init__(self, structure: Structure, audit: AccessAudit | None = None):
        self._s = structure
        self._g = structure.gaifman
        self.audit = audit if audit is not None else AccessAudit()

    @property
    def signature(self) -> Signature:
        return self._s.signature

    @property
    def degree(self) -> int:
        return self._g.degree

    def name(self, v: int) -> str:
        return self._s.name(v)

    def handle(self, name: str) -> int:
        return self._s.handle(name)

    def member(self, rel: str, tup: Sequence[int]) -> bool:
        tup = tuple(tup)
        for e in tup:
            self._s.check(e)
        self.audit.bump("membership_queries")
        return self._s.holds(rel, tup)

    def neighbors(self, v: int) -> tuple[int, ...]:
        nb = self._g.neighbors(v)
        self.audit.bump("neighbor_queries")
        return nb

    def universe(self) -> range:
        self.audit.bump("global_scans")
        return range(len(self._s))


def local_oracle(s: Structure, audit: AccessAudit | None = None) -> LocalOracle:
    return LocalOracle(s, audit)


# -- JSON-lines ingestion / persistence ---------------------------------------

def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def ingest(source, format: str = "jsonl") -> Structure:
    """Read a structure from a JSON-lines file or text stream.

    Line 1 is ``{"signature": [...], "universe": [...]}`` (universe optional);
    every later line is ``{"rel": name, "tuple": [ids...]}``.
    """
    if format != "jsonl":
        raise FormatError(f"unsupported database format {format!r}")
    fh, close = _open_text(source)
    try:
        return _ingest_lines(fh)
    finally:
        if close:
            fh.close()


def ingest_text(text: str) -> Structure:
    return ingest(io.StringIO(text))


def _ingest_lines(lines: Iterable[str]) -> Structure:
    signature = None
    universe: dict[str, None] = {}
    declared = False
    rels: dict[str, list[tuple[str, ...]]] = {}
    for lineno, raw in enumerate(lines, start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"malformed JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise FormatError("record is not a JSON object", lineno)
        if signature is None:
            if "signature" not in rec:
                raise FormatError("first record must declare the signature", lineno)
            try:
                signature = Signature(tuple((s["name"], s["arity"]) for s in rec["signature"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"bad signature: {exc}", lineno) from None
            if "universe" in rec:
                declared = True
                for e in rec["universe"]:
                    universe[str(e)] = None
            for name in signature.names:
                rels[name] = []
            continue
        if "rel" not in rec or "tuple" not in rec:
            raise FormatError("record needs 'rel' and 'tuple' fields", lineno)
        name = rec["rel"]
        if name not in signature:
            raise UnknownSymbolError(f"unknown relation symbol {name!r}", lineno)
        tup = rec["tuple"]
        if not isinstance(tup, list):
            raise FormatError("'tuple' must be a list", lineno)
        arity = signature.arity(name)
        if len(tup) != arity:
            raise ArityMismatchError(
                f"relation {name} has arity {arity} but record has {len(tup)} entries", lineno
            )
        tup = tuple(str(e) for e in tup)
        for e in tup:
            if e not in universe:
                if declared:
                    raise FormatError(f"element {e!r} not in declared universe", lineno)
                universe[e] = None
        rels[name].append(tup)
    if signature is None:
        raise FormatError("empty database file", None)
    return Structure(signature, universe.keys(), rels)


def dumps(s: Structure) -> str:
    out = io.StringIO()
    persist(s, out)
    return out.getvalue()


def persist(s: Structure, target) -> None:
    close = False
    if isinstance(target, (str, Path)):
        target, close = open(target, "w", encoding="utf-8"), True
    try:
        header = {"signature": s.signature.to_json(), "universe": list(s.names)}
        target.write(json.dumps(header) + "\n")
        for rel, _ in s.signature:
            for tup in sorted(s.relation(rel)):
                target.write(json.dumps({"rel": rel, "tuple": [s.names[e] for e in tup]}) + "\n")
    finally:
        if close:
            target.close()


def materialize(oracle: LocalOracle, centers: Sequence[int], radius: int) -> tuple[Structure, dict[int, int]]:
    """Build the induced substructure on the radius-ball of ``centers``.

    Uses neighbour queries for every ball element and membership probes for
    candidate tuples inside closed neighbourhoods; a tuple can only hold if
    all of its entries are pairwise adjacent or equal.
    Returns the local structure and the map from global to local handles.
    """
    dist: dict[int, int] = {}
    nbrs: dict[int, tuple[int, ...]] = {}
    queue: deque[int] = deque()
    for c in centers:
        if c not in dist:
            dist[c] = 0
            queue.append(c)
    while queue:
        v = queue.popleft()
        nb = oracle.neighbors(v)
        nbrs[v] = nb
        if dist[v] >= radius:
            continue
        for w in nb:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    order = sorted(dist)
    local = {v: i for i, v in enumerate(order)}
    rels: dict[str, list[tuple[int, ...]]] = {}
    for rel, arity in oracle.signature:
        out = rels[rel] = []
        if arity == 0:
            if oracle.member(rel, ()):
                out.append(())
            continue
        for u in order:
            closed = [u] + [w for w in nbrs[u] if w in local]
            if arity == 1:
                cands: Iterable[tuple[int, ...]] = [(u,)]
            else:
                cands = ((u,) + rest for rest in _product(closed, arity - 1))
            for tup in cands:
                if oracle.member(rel, tup):
                    out.append(tuple(local[e] for e in tup))
    names = [oracle.name(v) for v in order]
    return Structure.from_handles(oracle.signature, names, rels), local


def _product(items: Sequence[int], k: int):
    from itertools import product

    return product(items, repeat=k)
