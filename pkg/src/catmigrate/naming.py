"""Deterministic row-id construction for generated instances.

Generated ids must be injective per table even when user row-ids contain the
separator characters, so structural characters inside components are
percent-encoded before joining.
"""
from __future__ import annotations

_STRUCTURAL = "%,()=;@"


def encode_component(s: str) -> str:
    return "".join(f"%{ord(c):02X}" if c in _STRUCTURAL else c for c in s)


def tuple_id(parts: tuple[str, ...] | list[str]) -> str:
    """``(a,b,c)`` — the shape of fiber-product and dependent-product ids."""
    return "(" + ",".join(encode_component(p) for p in parts) + ")"


def pair_id(a: str, b: str) -> str:
    return tuple_id((a, b))


def keyed_id(pairs: list[tuple[str, str]]) -> str:
    """``k1=v1;k2=v2`` sorted by key — the shape of limit-family ids."""
    return ";".join(
        f"{encode_component(k)}={encode_component(v)}" for k, v in sorted(pairs)
    )


def uniquify(names: list[str]) -> list[str]:
    """Disambiguate duplicate display names in order, appending ``#2``, ``#3``, ...

    Injective even when the input already carries ``#n`` suffixes: a proposed
    name is bumped until it is genuinely unused.
    """
    used = set(names)  # reserve literal occurrences so suffixes never shadow them
    taken: set[str] = set()
    counters: dict[str, int] = {}
    out = []
    for name in names:
        if name not in taken:
            taken.add(name)
            out.append(name)
            continue
        k = counters.get(name, 1)
        while True:
            k += 1
            candidate = f"{name}#{k}"
            if candidate not in used and candidate not in taken:
                break
        counters[name] = k
        taken.add(candidate)
        out.append(candidate)
    return out
