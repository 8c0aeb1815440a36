"""Slow reference computations used to cross-check the library."""

import itertools
from fractions import Fraction

import numpy as np

from lrcc import gf2


def span_ints(rows):
    """All combinations of the given integer masks."""
    out = np.zeros(1, dtype=np.int64)
    for r in rows:
        out = np.concatenate([out, out ^ np.int64(r)])
    return out


def grid_mask(z):
    return int("".join(map(str, np.asarray(z, np.uint8).ravel()[::-1])) or "0", 2)


def line_counts(masks, na, nb):
    cols = np.zeros(masks.shape, np.int64)
    rows = np.zeros(masks.shape, np.int64)
    for j in range(nb):
        m = sum(1 << (i * nb + j) for i in range(na))
        cols += (masks & m) != 0
    for i in range(na):
        m = sum(1 << (i * nb + j) for j in range(nb))
        rows += (masks & m) != 0
    return cols, rows


def pair_costs(CA, CB):
    """Cheapest decomposition cost of every word, by enumerating all (c_a, c_b) pairs.

    c_a ranges over grids whose columns lie in C_A and c_b over grids whose
    rows lie in C_B; entry 127 marks words outside the sum space.
    """
    na, nb = CA.n, CB.n
    ca_rows = []
    for g in CA.generator:
        for j in range(nb):
            z = np.zeros((na, nb), np.uint8)
            z[:, j] = g
            ca_rows.append(grid_mask(z))
    cb_rows = []
    for h in CB.generator:
        for i in range(na):
            z = np.zeros((na, nb), np.uint8)
            z[i, :] = h
            cb_rows.append(grid_mask(z))
    cas, cbs = span_ints(ca_rows), span_ints(cb_rows)
    ca_cost, _ = line_counts(cas, na, nb)
    _, cb_cost = line_counts(cbs, na, nb)
    best = np.full(1 << (na * nb), 127, np.int16)
    for ca, cost in zip(cas.tolist(), ca_cost.tolist()):
        np.minimum.at(best, ca ^ cbs, cost + cb_cost)
    return best


def pair_robustness(CA, CB):
    best = pair_costs(CA, CB)
    words = np.flatnonzero(best < 127)
    words = words[words != 0]
    if words.size == 0:
        return None
    wt = np.bitwise_count(words.astype(np.uint64)).astype(np.int64)
    return min(Fraction(int(w), int(c)) for w, c in zip(wt, best[words]))


def subspace_counts(x):
    """Number of subspaces of GF(2)^x of each dimension, by closure from {0}."""
    seen = {1}  # bitmask over the 2^x vectors; bit 0 is the zero vector
    frontier = [1]
    while frontier:
        nxt = []
        for sub in frontier:
            members = [v for v in range(1 << x) if sub >> v & 1]
            for v in range(1 << x):
                if sub >> v & 1:
                    continue
                grown = sub
                for u in members:
                    grown |= 1 << (u ^ v)
                if grown not in seen:
                    seen.add(grown)
                    nxt.append(grown)
        frontier = nxt
    counts = {}
    for sub in seen:
        dim = sub.bit_count().bit_length() - 1
        counts[dim] = counts.get(dim, 0) + 1
    return counts


def chain_dimension_by_enumeration(d1, d2):
    """dim ker d1 - dim im d2, counting cycles over every grade-1 vector and boundaries over every grade-2 vector."""
    n1, n2 = d1.shape[1], d2.shape[1]
    cycles = 0
    for start, block in gf2.span_chunks(gf2.identity(n1), chunk_bits=16):
        cycles += int((~gf2.matmul(block, d1.T).any(axis=1)).sum())
    boundaries = set()
    for _, block in gf2.span_chunks(gf2.identity(n2), chunk_bits=12):
        for row in gf2.matmul(block, d2.T):
            boundaries.add(row.tobytes())
    k = cycles.bit_length() - 1
    assert 1 << k == cycles
    b = len(boundaries).bit_length() - 1
    assert 1 << b == len(boundaries)
    return k - b


def brute_min_decomposition(c, CA, CB):
    """Smallest cost over every c_a with columns in C_A such that c + c_a has rows in C_B."""
    c = np.asarray(c, np.uint8)
    na, nb = c.shape
    best = None
    for cols in itertools.product(range(1 << CA.k), repeat=nb):
        ca = np.zeros((na, nb), np.uint8)
        for j, coeff in enumerate(cols):
            for r in range(CA.k):
                if coeff >> r & 1:
                    ca[:, j] ^= CA.generator[r]
        cb = c ^ ca
        if all(CB.contains(row) for row in cb):
            cost = int(ca.any(axis=0).sum() + cb.any(axis=1).sum())
            best = cost if best is None else min(best, cost)
    return best
