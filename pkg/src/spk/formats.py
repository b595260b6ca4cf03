"""Chain serialization: JSON kernels and CSV edge lists.

The JSON format is ``{"n": int, "kernel": [[row-major floats]], "labels":
[...]}`` with labels optional.  Floats go through Python's shortest-repr
serialization, so dump -> load round-trips are bit-exact.
"""

import json

import numpy as np

from .chain import build_chain
from .errors import ParseError


def chain_to_json(chain):
    doc = {"n": chain.n, "kernel": [list(map(float, row)) for row in chain.K]}
    if chain.labels is not None:
        doc["labels"] = list(chain.labels)
    return json.dumps(doc)


def chain_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad chain JSON: {e}") from e
    if not isinstance(doc, dict) or "kernel" not in doc:
        raise ParseError("chain JSON needs a 'kernel' field")
    kernel = np.asarray(doc["kernel"], dtype=float)
    if "n" in doc and doc["n"] != kernel.shape[0]:
        raise ParseError(
            f"declared n={doc['n']} but kernel has {kernel.shape[0]} rows"
        )
    return build_chain(kernel, labels=doc.get("labels"))


def load_chain(path):
    with open(path, "r", encoding="utf-8") as fh:
        return chain_from_json(fh.read())


def save_chain(chain, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(chain_to_json(chain))
        fh.write("\n")


def chain_from_edge_csv(text):
    """Parse "src,dst,prob" rows (0-based integer states, no header)."""
    entries = []
    nmax = -1
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError(f"edge CSV line {ln}: expected src,dst,prob")
        try:
            src, dst, prob = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as e:
            raise ParseError(f"edge CSV line {ln}: {e}") from e
        if src < 0 or dst < 0:
            raise ParseError(f"edge CSV line {ln}: negative state index")
        entries.append((src, dst, prob))
        nmax = max(nmax, src, dst)
    if nmax < 0:
        raise ParseError("edge CSV has no entries")
    K = np.zeros((nmax + 1, nmax + 1))
    for src, dst, prob in entries:
        K[src, dst] += prob
    return build_chain(K)


def load_chain_any(path):
    """Load a chain from JSON or edge-list CSV, sniffing by content."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return chain_from_json(text)
    return chain_from_edge_csv(text)
