"""Shared fixtures for the detectbench test suite."""

import pytest

from detectbench.config import BENCHMARKS_DIR
from detectbench.core.assembler import assemble, assemble_file
from detectbench.core.isa import MachineLimits

MICRO_LIMITS = MachineLimits(registers=8, memory_words=64, max_cycles=10_000)

# Flips r1 or r3 mid-way and the value reaches memory at word 10.
STORE_CHAIN = """
        LOADI r1, 0
        ADD   r2, r1, 0
        ADD   r3, r1, 0
        STORE r3, r0, 10
        HALT
.output 10 1
"""


@pytest.fixture(scope="session")
def limits():
    return MachineLimits()


@pytest.fixture(scope="session")
def micro_limits():
    return MICRO_LIMITS


@pytest.fixture(scope="session")
def load_benchmark():
    cache = {}

    def _load(name):
        if name not in cache:
            cache[name] = assemble_file(BENCHMARKS_DIR / f"{name}.asm")
        return cache[name]

    return _load


@pytest.fixture
def store_chain():
    return assemble(STORE_CHAIN, name="store_chain", registers=8, memory_words=64)
