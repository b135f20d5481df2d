"""Index construction: signature expansion plus the ground-term lookup table."""

from __future__ import annotations

import hashlib
import json
import time
import zipfile
from dataclasses import dataclass, field

from . import kernels
from . import syntax as S
from .decompose import Decomposer
from .evaluator import Evaluator
from .grammar import HypothesisClassConfig, Library
from .locality import AlreadyLocal, Hanf, LocalisationError, localise, nu
from .relstore import Structure, bfs_distances, dumps, ingest_text

FORMAT_VERSION = 1


class IndexFileError(Exception):
    pass


class CorruptIndexError(IndexFileError):
    pass


class IndexVersionError(IndexFileError):
    pass


class TemplateLocalisationError(LocalisationError):
    def __init__(self, template: str, cause: Exception):
        super().__init__(f"template {template}: {cause}")
        self.template = template


@dataclass
class IndexArtifact:
    structure: Structure
    table: dict[str, int]
    meta: dict = field(default_factory=dict)

    @property
    def index_hash(self) -> str:
        return self.meta["index_hash"]

    @property
    def cfg(self) -> HypothesisClassConfig:
        return HypothesisClassConfig.from_json(self.meta["cfg"])

    def __eq__(self, other):
        if not isinstance(other, IndexArtifact):
            return NotImplemented
        return self.structure == other.structure and self.table == other.table and self.meta == other.meta


def _template_relation(t, out, base: Structure, registry):
    """Tuples of the template predicate on ``base``'s universe."""
    f = out.formula
    s = out.structure
    if t.param is None:
        ev = Evaluator(s, registry)
        return [()] if ev.formula(f, {}) else []
    rows = []
    if S.is_quantifier_free(f):
        ev = Evaluator(s, registry)
        for v in range(base.size):
            if ev.formula(f, {t.param: v}):
                rows.append((v,))
        return rows
    for v in range(base.size):
        dist = bfs_distances(s.gaifman, [v], out.radius)
        local = s.induced(dist)
        if Evaluator(local, registry).formula(f, {t.param: sorted(dist).index(v)}):
            rows.append((v,))
    return rows


def expand_templates(s: Structure, lib: Library, cfg: HypothesisClassConfig, registry=None):
    extra, rels, reports = [], {}, {}
    for t in lib.templates:
        if cfg.localise_mode == "already_local":
            mode = AlreadyLocal(cfg.radius_cap)
        else:
            mode = Hanf(cfg.radius_cap, cfg.quantifier_cap)
        try:
            out = localise(t.formula, s, mode, registry, prefix=f"{t.name}_h")
        except LocalisationError as exc:
            raise TemplateLocalisationError(t.name, exc) from exc
        for name, arity in out.added:
            extra.append((name, arity))
            rels[name] = out.structure.relation(name) if arity else ([()] if out.structure.nullary(name) else [])
        extra.append((t.name, t.arity))
        rels[t.name] = _template_relation(t, out, s, registry)
        reports[t.name] = out.report
    return s.expand(extra, rels), reports


def precompute(s: Structure, cfg: HypothesisClassConfig, registry=None) -> IndexArtifact:
    stats: dict = {}
    t0 = time.perf_counter()
    lib = Library(cfg, s.signature, registry)
    expanded, reports = expand_templates(s, lib, cfg, registry)
    t1 = time.perf_counter()
    stats["expansion_seconds"] = t1 - t0

    dec = Decomposer(cfg.rho, cfg.max_graph_vertices)
    for p in lib.patterns:
        dec.count(p.local)
    t2 = time.perf_counter()
    stats["decompose_seconds"] = t2 - t1

    kg = kernels.KernelGraph(expanded)
    d = expanded.gaifman.degree
    table: dict[str, int] = {}
    entries: dict[str, dict] = {}
    total_iters = 0
    for key, piece in sorted(dec.pieces.items()):
        if piece.kind != "ground":
            continue
        prog = kernels.compile_program(piece.literals, list(piece.bound), kg)
        value, iters, worst = kernels.ground_count(kg, prog, piece.radius)
        m = len(piece.bound)
        limit = nu(d, piece.radius) ** max(m - 1, 0)
        if worst > limit:
            raise AssertionError(f"loop bound exceeded for {key}: {worst} > {limit}")
        table[key] = value
        entries[key] = {"m": m, "radius": piece.radius, "iterations": iters, "max_per_element": worst}
        total_iters += iters
    t3 = time.perf_counter()
    stats["table_seconds"] = t3 - t2
    stats["table_iterations"] = total_iters
    stats["total_seconds"] = t3 - t0
    stats["backend"] = kernels.BACKEND

    meta = {
        "format_version": FORMAT_VERSION,
        "cfg": cfg.to_json(),
        "cfg_hash": cfg.cfg_hash(),
        "base_signature": s.signature.to_json(),
        "locality_radius": cfg.locality_radius,
        "rho": cfg.rho,
        "degree": d,
        "n": expanded.size,
        "patterns": len(lib.patterns),
        "pieces": len(dec.pieces),
        "entries": entries,
        "localisation": reports,
        "stats": stats,
    }
    meta["index_hash"] = _index_hash(expanded, table, meta["cfg_hash"])
    return IndexArtifact(expanded, table, json.loads(json.dumps(meta)))


def _index_hash(s: Structure, table: dict, cfg_hash: str) -> str:
    h = hashlib.sha256()
    h.update(cfg_hash.encode())
    h.update(json.dumps(sorted(table.items())).encode())
    h.update(dumps(s).encode())
    return h.hexdigest()


def save_index(ix: IndexArtifact, path) -> None:
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as z:
        z.writestr("structure.jsonl", dumps(ix.structure))
        z.writestr("table.json", json.dumps(ix.table, sort_keys=True))
        z.writestr("meta.json", json.dumps(ix.meta, sort_keys=True))


def load_index(path, cfg: HypothesisClassConfig | None = None) -> IndexArtifact:
    try:
        with zipfile.ZipFile(path) as z:
            meta = json.loads(z.read("meta.json"))
            table = json.loads(z.read("table.json"))
            text = z.read("structure.jsonl").decode()
    except (zipfile.BadZipFile, KeyError, ValueError, EOFError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise CorruptIndexError(f"cannot read index {path}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise IndexVersionError(f"index format {meta.get('format_version')} != {FORMAT_VERSION}")
    if cfg is not None and cfg.cfg_hash() != meta.get("cfg_hash"):
        raise IndexVersionError("index was built with a different hypothesis-class configuration")
    try:
        structure = ingest_text(text)
    except Exception as exc:
        raise CorruptIndexError(f"structure section is invalid: {exc}") from exc
    return IndexArtifact(structure, {k: int(v) for k, v in table.items()}, meta)
