import math

import numpy as np
import pytest

from osram_mttkrp.memtech import DramSpec
from osram_mttkrp.simulator import AcceleratorConfig
from osram_mttkrp.tensor_io import SparseTensorCOO
from osram_mttkrp.uarch import PeConfig

_ACCEPTANCE_LINES: list[str] = []


class BruteLRU:
    """Reference LRU: every resident line carries a last-use timestamp and the
    victim is found by a linear scan. Shares no code with the simulator."""

    def __init__(self, num_sets, associativity, line_bytes):
        self.num_sets = num_sets
        self.ways = associativity
        self.line_bytes = line_bytes
        self.stamp = [dict() for _ in range(num_sets)]
        self.clock = 0
        self.hits = self.misses = self.evictions = 0

    def access(self, address):
        self.clock += 1
        line = address // self.line_bytes
        s = self.stamp[line % self.num_sets]
        if line in s:
            s[line] = self.clock
            self.hits += 1
            return True
        self.misses += 1
        if len(s) == self.ways:
            oldest = min(s, key=s.get)
            del s[oldest]
            self.evictions += 1
        s[line] = self.clock
        return False


def random_tensor(rng, dims, nnz, name="rand"):
    """Unique random coordinates with values in [-1, 1); independent of the
    package's synthetic generator."""
    cap = math.prod(dims)
    flat = rng.choice(cap, size=min(nnz, cap), replace=False)
    coords = np.stack(np.unravel_index(flat, dims), axis=1) if flat.size else np.zeros((0, len(dims)), np.int64)
    values = rng.uniform(-1.0, 1.0, size=flat.size)
    return SparseTensorCOO(tuple(dims), coords, values, name)


def single_pe_config(**dram):
    """One PE on one DRAM channel; keyword args override DramSpec fields."""
    return AcceleratorConfig(pe=PeConfig(num_pes=1), dram=DramSpec(channels=1, **dram))


@pytest.fixture
def acceptance_line():
    def record(name, ok, detail=""):
        line = f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
