"""Built-in domains, instance parsing and cached enumerated state spaces."""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..oracle import CostTable, exhaustive_reverse_dijkstra
from .base import Domain, UnsolvableInstance
from .chain import ChainDomain, NoisyChainPolicy, greedy_success_rate
from .blocks import BlocksDomain, GroundedStrips, hmax_batch, hmax_heuristic
from .explicit import IndexedDomain
from .pancake import PancakeDomain, gap_heuristic
from .tiles import TileDomain, is_solvable, linear_conflicts, manhattan, tile_heuristic

log = logging.getLogger(__name__)

__all__ = [
    "BlocksDomain", "ChainDomain", "NoisyChainPolicy", "greedy_success_rate", "CostTable", "Domain", "GroundedStrips", "IndexedDomain", "PancakeDomain",
    "ParseError", "StateSpace", "TileDomain", "UnsolvableInstance", "gap_heuristic",
    "hmax_batch", "hmax_heuristic", "is_solvable", "linear_conflicts", "load_space", "make_domain",
    "manhattan", "parse_instance", "tile_heuristic", "DOMAIN_NAMES", "DATA_DIR", "korf100",
]

DOMAIN_NAMES = ("tile8", "tile15", "pancake9", "blocks8")
_NAME = re.compile(r"^(tile|pancake|blocks)(\d+)$")
CACHE_VERSION = 1


def make_domain(name: str) -> Domain:
    """``tile8``, ``tile15``, ``pancake<n>`` or ``blocks<B>``."""
    m = _NAME.match(name)
    if not m:
        raise ValueError(f"unknown domain {name!r}; valid: {', '.join(DOMAIN_NAMES)}")
    kind, num = m.group(1), int(m.group(2))
    if kind == "tile":
        n = math.isqrt(num + 1)
        if n * n != num + 1:
            raise ValueError(f"unknown domain {name!r}; tile domains are tile3, tile8 or tile15")
        return TileDomain(n)
    if kind == "pancake":
        return PancakeDomain(num)
    return BlocksDomain(num)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _ints(text: str):
    out = []
    for ln, line in enumerate(text.splitlines(), 1):
        for m in re.finditer(r"\S+", line):
            tok = m.group(0)
            if tok.startswith("#"):
                break
            try:
                out.append(int(tok))
            except ValueError:
                raise ParseError(f"expected an integer, got {tok!r}", ln, m.start() + 1) from None
    return out


def parse_instance(kind: str, text: str):
    """Parse an instance for ``kind`` in {tile, pancake, blocks}; returns a base-domain state."""
    if kind == "tile":
        vals = _ints(text)
        n = math.isqrt(len(vals))
        if n * n != len(vals) or n < 2:
            raise ParseError(f"{len(vals)} values do not form a square board")
        if sorted(vals) != list(range(n * n)):
            raise ParseError(f"tile values must be a permutation of 0..{n * n - 1}")
        if not is_solvable(vals, n):
            raise UnsolvableInstance(f"tile instance has the wrong parity for the blank-first goal: {vals}")
        return tuple(vals)
    if kind == "pancake":
        vals = _ints(text)
        if not vals or sorted(vals) != list(range(1, len(vals) + 1)):
            raise ParseError(f"pancake values must be a permutation of 1..{len(vals)}")
        return tuple(vals)
    if kind == "blocks":
        return _parse_blocks(text)
    raise ValueError(f"unknown instance kind {kind!r}; valid: tile, pancake, blocks")


def _block_index(name: str, ln: int, col: int) -> int:
    m = re.fullmatch(r"b(\d+)", name)
    if not m or int(m.group(1)) < 1:
        raise ParseError(f"bad block name {name!r}", ln, col)
    return int(m.group(1)) - 1


def _parse_blocks(text: str):
    below = {}
    held = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]
        if not toks:
            continue
        word, col = toks[0]
        if word == "on" and len(toks) == 3:
            x = _block_index(toks[1][0], ln, toks[1][1])
            if x in below or x == held:
                raise ParseError(f"block {toks[1][0]} placed twice", ln, toks[1][1])
            target = toks[2][0]
            below[x] = "table" if target == "table" else _block_index(target, ln, toks[2][1])
        elif word == "holding" and len(toks) == 2:
            if held is not None:
                raise ParseError("the arm holds at most one block", ln, col)
            held = _block_index(toks[1][0], ln, toks[1][1])
            if held in below:
                raise ParseError(f"block {toks[1][0]} placed twice", ln, toks[1][1])
        else:
            raise ParseError(f"expected 'on <block> <block|table>' or 'holding <block>', got {line.strip()!r}", ln, col)
    nblocks = len(below) + (held is not None)
    names = set(below) | ({held} if held is not None else set())
    if names != set(range(nblocks)):
        raise ParseError(f"blocks must be named b1..b{nblocks} with one line each")
    state = []
    for x in range(nblocks):
        if x == held:
            state.append(nblocks + 1)
        elif below[x] == "table":
            state.append(nblocks)
        else:
            if below[x] >= nblocks:
                raise ParseError(f"unknown block b{below[x] + 1}")
            state.append(below[x])
    try:
        return BlocksDomain(nblocks).validate(state) if nblocks >= 2 else tuple(state)
    except ValueError as e:
        raise ParseError(str(e)) from None


def format_instance(domain: Domain, state) -> str:
    if isinstance(domain, BlocksDomain):
        lines = []
        for x, v in enumerate(state):
            if v == domain.HAND:
                lines.append(f"holding b{x + 1}")
            else:
                lines.append(f"on b{x + 1} {'table' if v == domain.TABLE else f'b{v + 1}'}")
        return "\n".join(lines)
    return " ".join(str(v) for v in state)


@dataclass
class StateSpace:
    """An enumerated domain together with its exact cost-to-go table."""

    domain: IndexedDomain
    table: CostTable

    @property
    def hstar(self) -> np.ndarray:
        return self.table.costs

    def __len__(self):
        return len(self.table)


def cache_dir() -> Path:
    return Path(os.environ.get("FOCALPOLICY_CACHE", Path.home() / ".cache" / "focalpolicy"))


def load_space(name: str, use_cache: bool = True) -> StateSpace:
    """Enumerate ``name`` backwards from its goal, with on-disk caching."""
    base = make_domain(name)
    root = cache_dir()
    oracle_path = root / f"{name}_oracle_v{CACHE_VERSION}.npz"
    graph_path = root / f"{name}_graph_v{CACHE_VERSION}.npz"
    if use_cache and oracle_path.exists() and graph_path.exists():
        table = CostTable.load(oracle_path)
        return StateSpace(IndexedDomain.load(base, graph_path), table)
    log.info("enumerating %s", name)
    table = exhaustive_reverse_dijkstra(base)
    graph = IndexedDomain.build(base, table.keys)
    if use_cache:
        root.mkdir(parents=True, exist_ok=True)
        table.save(oracle_path)
        graph.save(graph_path)
    return StateSpace(graph, table)


DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def korf100():
    """The shipped 100 random 15-puzzle instances with their optimal costs."""
    from ..bench.runner import read_instance_file, read_opt_file

    texts = read_instance_file(DATA_DIR / "korf100.txt", "tile15")
    opts = read_opt_file(DATA_DIR / "korf100_opt.txt")
    return [parse_instance("tile", t) for t in texts], opts
