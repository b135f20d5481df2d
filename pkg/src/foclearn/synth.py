"""Seeded generators: bounded-degree graphs, small random structures and expressions."""

from __future__ import annotations

import random

from . import syntax as S
from .relstore import Signature, Structure

GRAPH_SIGNATURE = Signature.of(E=2, Red=1, Blue=1)


def bounded_degree_graph(n: int, d: int, seed: int = 0, swaps_per_edge: int = 4, colour_p: float = 0.3) -> Structure:
    """Random graph with maximum degree d (exactly d where the lattice allows).

    Starts from a circulant lattice and randomises it by degree-preserving
    double edge swaps; vertices are coloured Red/Blue independently.
    """
    rng = random.Random(seed)
    half = min(d // 2, max((n - 1) // 2, 0))
    edges = set()
    for v in range(n):
        for j in range(1, half + 1):
            w = (v + j) % n
            if v != w:
                edges.add((min(v, w), max(v, w)))
    if d % 2 and n % 2 == 0 and n > 2 * half + 1:
        for v in range(n // 2):
            w = v + n // 2
            edges.add((v, w))
    elist = sorted(edges)
    eset = set(elist)
    for _ in range(swaps_per_edge * len(elist)):
        if len(elist) < 2:
            break
        i, j = rng.randrange(len(elist)), rng.randrange(len(elist))
        (a, b), (c, e) = elist[i], elist[j]
        if rng.random() < 0.5:
            c, e = e, c
        if len({a, b, c, e}) < 4:
            continue
        n1, n2 = (min(a, e), max(a, e)), (min(c, b), max(c, b))
        if n1 in eset or n2 in eset:
            continue
        eset.discard(elist[i])
        eset.discard(elist[j])
        eset.add(n1)
        eset.add(n2)
        elist[i], elist[j] = n1, n2
    names = [f"v{i}" for i in range(n)]
    red = [(names[v],) for v in range(n) if rng.random() < colour_p]
    blue = [(names[v],) for v in range(n) if rng.random() < colour_p]
    return Structure(GRAPH_SIGNATURE, names, {"E": [(names[a], names[b]) for a, b in sorted(eset)], "Red": red, "Blue": blue})


def random_structure(signature: Signature, n: int, rng: random.Random, density: float = 0.25) -> Structure:
    names = [f"e{i}" for i in range(n)]
    rels = {}
    for rel, arity in signature:
        if arity == 0:
            rels[rel] = [()] if rng.random() < 0.5 else []
            continue
        tuples = []
        target = max(1, int(density * n)) if n else 0
        for _ in range(rng.randint(0, target * max(arity, 1))):
            tuples.append(tuple(rng.choice(names) for _ in range(arity)))
        rels[rel] = tuples
    return Structure(signature, names, rels)


def random_expression(signature: Signature, rng: random.Random, budget: int = 8, variables=("x", "y"), kind=None, numpreds=("Pleq", "Peq", "Pprime", "Pdivides")):
    """Random well-formed formula or term with at most ``budget`` AST nodes."""
    kind = kind or rng.choice(["formula", "term"])
    return _gen(signature, rng, budget, list(variables), kind, numpreds, [0])


def _fresh(counter):
    counter[0] += 1
    return f"b{counter[0]}"


def _gen(sig, rng, budget, vs, kind, numpreds, counter):
    rels = [(r, a) for r, a in sig]
    if kind == "term":
        if budget <= 2 or rng.random() < 0.15:
            return S.Int(rng.randint(-2, 3))
        choice = rng.random()
        if choice < 0.5:
            k = 1 if budget < 5 or rng.random() < 0.7 else 2
            bound = [_fresh(counter) for _ in range(k)]
            return S.Count(tuple(bound), _gen(sig, rng, budget - 1, vs + bound, "formula", numpreds, counter))
        left_budget = rng.randint(1, budget - 2)
        a = _gen(sig, rng, left_budget, vs, "term", numpreds, counter)
        b = _gen(sig, rng, budget - 1 - S.node_count(a), vs, "term", numpreds, counter)
        return S.Add(a, b) if choice < 0.8 else S.Mul(a, b)
    if budget <= 1 or rng.random() < 0.25:
        return _leaf(rels, rng, vs)
    choice = rng.random()
    if choice < 0.2:
        return S.Not(_gen(sig, rng, budget - 1, vs, "formula", numpreds, counter))
    if choice < 0.45 and budget >= 3:
        a = _gen(sig, rng, rng.randint(1, budget - 2), vs, "formula", numpreds, counter)
        b = _gen(sig, rng, max(budget - 1 - S.node_count(a), 1), vs, "formula", numpreds, counter)
        return S.Or(a, b)
    if choice < 0.75:
        z = _fresh(counter)
        return S.Exists(z, _gen(sig, rng, budget - 1, vs + [z], "formula", numpreds, counter))
    if budget >= 3 and numpreds:
        name = rng.choice(list(numpreds))
        arity = 1 if name in ("Pprime", "P_prime") else 2
        args = []
        remaining = budget - 1
        anchor = rng.choice(vs) if vs else None
        for i in range(arity):
            share = max(remaining // (arity - i), 1)
            t = _gen(sig, rng, share, [anchor] if anchor else [], "term", numpreds, counter)
            args.append(t)
            remaining -= S.node_count(t)
        return S.NumPred(name, tuple(args))
    return _leaf(rels, rng, vs)


def _leaf(rels, rng, vs):
    if not vs:
        zero = [r for r, a in rels if a == 0]
        if zero and rng.random() < 0.5:
            return S.Atom(rng.choice(zero), ())
        return S.Truth(rng.random() < 0.5)
    roll = rng.random()
    if roll < 0.15:
        return S.Eq(rng.choice(vs), rng.choice(vs))
    if roll < 0.22:
        return S.Dist(rng.choice(vs), rng.choice(vs), rng.randint(0, 2))
    if roll < 0.27:
        return S.Truth(rng.random() < 0.5)
    rel, arity = rng.choice(rels)
    return S.Atom(rel, tuple(rng.choice(vs) for _ in range(arity)))
