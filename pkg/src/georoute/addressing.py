"""Tree addresses: distances, ancestry and run-length compression.

An address is the tuple of port labels on the tree path from the root to
a node.  Mesh trees use the compass letters ``N E S W``; trees over
arbitrary graphs use integer port numbers.
"""

from __future__ import annotations

from itertools import groupby
from typing import Hashable, Sequence

from .errors import InvalidArgument, MalformedAddress, NotInTree

Label = Hashable
Address = tuple
Run = tuple  # (label, count)

MESH_LABEL_BITS = 2
DEFAULT_COUNT_BITS = 4


def address_of(tree, n: int) -> Address:
    """Labels along the root-to-``n`` path of ``tree``."""
    if n not in tree.depth:
        raise NotInTree(f"node {n} is not spanned by the tree rooted at {tree.root}")
    labels = []
    while n != tree.root:
        labels.append(tree.label[n])
        n = tree.parent[n]
    return tuple(reversed(labels))


def common_prefix_len(a: Sequence, b: Sequence) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def tree_distance(a: Sequence, b: Sequence) -> int:
    """Hops between two nodes travelling along the tree: ``I + J - 2K``."""
    return len(a) + len(b) - 2 * common_prefix_len(a, b)


def is_ancestor(a: Sequence, b: Sequence) -> bool:
    """True if ``a`` is a prefix of ``b``; every node is its own ancestor."""
    return len(a) <= len(b) and tuple(a) == tuple(b[: len(a)])


def rle_encode(address: Sequence) -> tuple[Run, ...]:
    return tuple((label, len(list(group))) for label, group in groupby(address))


def rle_decode(runs: Sequence[Run]) -> Address:
    out: list = []
    prev = object()
    for label, count in runs:
        if not isinstance(count, int) or count < 1:
            raise MalformedAddress(f"run count must be a positive integer, got {count!r}")
        if label == prev:
            raise MalformedAddress(f"adjacent runs share the label {label!r}")
        out.extend([label] * count)
        prev = label
    return tuple(out)


def encoded_size_bits(
    runs: Sequence[Run],
    label_bits: int = MESH_LABEL_BITS,
    count_bits: int = DEFAULT_COUNT_BITS,
    split: bool = False,
) -> int:
    """Header bits needed for a compressed address.

    A run longer than ``count_bits`` can express is an error unless
    ``split`` is set, in which case it is charged as several runs.
    """
    limit = (1 << count_bits) - 1
    n_runs = 0
    for label, count in runs:
        if count > limit:
            if not split:
                raise InvalidArgument(f"run {label}{count} overflows a {count_bits}-bit count")
            n_runs += -(-count // limit)
        else:
            n_runs += 1
    return n_runs * (label_bits + count_bits)


def uncompressed_size_bits(address: Sequence, label_bits: int = MESH_LABEL_BITS) -> int:
    return len(address) * label_bits


def format_address(address: Sequence) -> str:
    """``WWNN`` for compass labels, ``3.0.1`` for port numbers, ``-`` for the root."""
    if not address:
        return "-"
    if all(isinstance(x, str) and len(x) == 1 for x in address):
        return "".join(address)
    return ".".join(str(x) for x in address)


def format_runs(runs: Sequence[Run]) -> str:
    """``W2N2`` style rendering of a run list."""
    if not runs:
        return "-"
    return "".join(f"{label}{count}" for label, count in runs)


def parse_address(text: str) -> Address:
    """Inverse of :func:`format_address`; ``''``, ``-`` and ``e`` mean the root."""
    text = text.strip()
    if text in ("", "-", "e", "eps"):
        return ()
    if "." in text or text.isdigit():
        return tuple(int(x) for x in text.split("."))
    if set(text) <= set("NESW"):
        return tuple(text)
    raise MalformedAddress(f"cannot parse address {text!r}")
