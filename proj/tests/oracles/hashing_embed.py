#!/usr/bin/env python3
"""Independent reference for the signed character-3-gram hashing embedder.

Prints the values frozen into the provider and matcher tests:
  * the 64-dimensional embedding of "deep learning" (non-zero buckets only)
  * (cos + 1) / 2 for a few fixed, already-normalized text pairs at dim 256
"""

import math

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text: str, dim: int):
    v = [0.0] * dim
    if not text:
        return v
    cps = list(text)
    grams = [cps] if len(cps) < 3 else [cps[i:i + 3] for i in range(len(cps) - 2)]
    for g in grams:
        h = fnv1a64("".join(g).encode("utf-8"))
        v[h % dim] += -1.0 if h >> 63 else 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n > 0 else v


def similarity(a: str, b: str, dim: int = 256) -> float:
    va, vb = embed(a, dim), embed(b, dim)
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0 or nb == 0:
        return 0.0
    cos = sum(x * y for x, y in zip(va, vb)) / (na * nb)
    return min(1.0, max(0.0, (cos + 1) / 2))


def main():
    v = embed("deep learning", 64)
    print("deep learning @64:")
    for i, x in enumerate(v):
        if x != 0:
            print(f"  {{{i}, {x!r}}},")
    pairs = [
        ("deep learning models", "deep lerning model"),
        ("speech to slide alignment", "aligning slides with speech"),
        ("alpha beta", "gamma delta"),
        ("résumé", "resume"),
    ]
    for a, b in pairs:
        print(f"{a!r} vs {b!r}: {similarity(a, b)!r}")


if __name__ == "__main__":
    main()
