"""Tab-separated file formats and the per-run manifest.

Edge file      one "u<TAB>v" pair per line; '#' lines are comments.
Attribute file one "u<TAB>k" pair per line meaning X[u, k] = 1; an optional
               first line "#N<TAB>K" pins the dimensions, otherwise they are
               inferred as max id + 1.
Community file one community per line, node ids tab-separated; lines ordered
               by descending size, ids ascending within a line.
Weights file   one line per attribute: id, per-community weights, bias,
               9 significant digits.
Manifest       flat "key<TAB>value" lines, one per entry.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .core import AttributedGraph, AttributeWeights, CommunityCover


class FileFormatError(ValueError):
    """A line in an input file could not be parsed."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _parse_int(path, line_no, token):
    try:
        return int(token)
    except ValueError:
        raise FileFormatError(path, line_no, f"expected an integer, got {token!r}") from None


def _read_pair_lines(path):
    """Yield (line_no, line) for data lines; capture a '#N<TAB>K' first line."""
    pairs = []
    dims = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                if line_no == 1:
                    fields = line[1:].split("\t")
                    if len(fields) == 2:
                        try:
                            dims = (int(fields[0]), int(fields[1]))
                        except ValueError:
                            dims = None
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise FileFormatError(path, line_no, "expected two tab-separated integers")
            a = _parse_int(path, line_no, fields[0])
            b = _parse_int(path, line_no, fields[1])
            pairs.append((a, b))
    return pairs, dims


def read_edge_file(path) -> list[tuple[int, int]]:
    pairs, _ = _read_pair_lines(path)
    return pairs


def read_attr_file(path):
    """Returns (pairs, dims) where dims is the optional (N, K) header or None."""
    return _read_pair_lines(path)


def write_edge_file(path, G: AttributedGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in G.edges:
            fh.write(f"{u}\t{v}\n")


def write_attr_file(path, G: AttributedGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#{G.num_nodes}\t{G.num_attrs}\n")
        for u, k in G.attr_pairs:
            fh.write(f"{u}\t{k}\n")


def write_community_file(path, cover: CommunityCover) -> None:
    ordered = sorted(cover.communities, key=lambda s: (-len(s), tuple(sorted(s))))
    with open(path, "w", encoding="utf-8") as fh:
        for members in ordered:
            fh.write("\t".join(str(m) for m in sorted(members)) + "\n")


def read_community_file(path) -> list[list[int]]:
    """Communities as id lists; build a CommunityCover with the caller's universe."""
    communities = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            members = [_parse_int(path, line_no, tok) for tok in line.split("\t")]
            communities.append(members)
    return communities


def write_weights_file(path, W: AttributeWeights) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k in range(W.num_attrs):
            row = "\t".join(f"{x:.9g}" for x in W.values[k])
            fh.write(f"{k}\t{row}\n")


def read_weights_file(path) -> AttributeWeights:
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 3:
                raise FileFormatError(path, line_no,
                                      "expected id, community weights and bias")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise FileFormatError(path, line_no, "inconsistent column count")
            k = _parse_int(path, line_no, fields[0])
            if k != len(rows):
                raise FileFormatError(path, line_no,
                                      f"attribute ids must be consecutive, got {k}")
            try:
                rows.append([float(x) for x in fields[1:]])
            except ValueError:
                raise FileFormatError(path, line_no, "malformed weight value") from None
    if not rows:
        return AttributeWeights(np.zeros((0, 1)))
    return AttributeWeights(rows)


def write_manifest(path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries.items():
            fh.write(f"{key}\t{value}\n")


def read_manifest(path) -> dict[str, str]:
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            if "\t" not in line:
                raise FileFormatError(path, line_no, "expected key<TAB>value")
            key, value = line.split("\t", 1)
            entries[key] = value
    return entries


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()
