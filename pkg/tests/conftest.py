import numpy as np
import pytest

from lrcc import cayley_complex, chain, codes, groups

# acceptance lines collected here and printed in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def symmetric_set(group, delta, rng):
    """Random inverse-closed generator list of exactly ``delta`` elements, or None."""
    for _ in range(200):
        pool = [g for g in rng.permutation(group.order).tolist() if g != group.identity]
        chosen: list[int] = []
        for g in pool:
            pair = {g, int(group.inv[g])}
            if pair & set(chosen) or len(chosen) + len(pair) > delta:
                continue
            chosen.extend(sorted(pair))
            if len(chosen) == delta:
                return chosen
    return None


def build(group, a_elems, b_elems, HA, HB):
    A = groups.make_generators(group, a_elems, "left")
    B = groups.make_generators(group, b_elems, "right")
    cx = cayley_complex.build_complex(group, A, B)
    return chain.build_chain_complex(cx, codes.from_parity_check(HA), codes.from_parity_check(HB))


def cyclic_instance(n, offsets, HA, HB):
    g = groups.cyclic_group(n)
    elems = [o % n for o in offsets]
    return build(g, elems, elems, HA, HB)


P4 = [[1, 1, 1, 1]]


@pytest.fixture(scope="session")
def z5_parity():
    """Z5 with A = B = {1, 4, 2, 3} and single parity checks: the decodable test instance."""
    return cyclic_instance(5, [1, 4, 2, 3], P4, P4)


@pytest.fixture(scope="session")
def z5_parity_dual(z5_parity):
    return chain.dual_complex(z5_parity.cx, z5_parity.CA, z5_parity.CB)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
