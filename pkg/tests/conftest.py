import numpy as np
import pytest

from netmcse import _pykernels
from netmcse.graph_core import (
    AttributeTable,
    CategoricalColumn,
    from_edges,
    generate_er,
    largest_connected_component,
)

try:
    from netmcse import _kernels as _cykernels
except ImportError:  # extension not built
    _cykernels = None

# criterion key -> (passed, detail); passed is None for a skipped criterion
ACCEPTANCE_LOG: dict[str, tuple[bool | None, str]] = {}

P3_EDGES = [(0, 1), (1, 2)]
K3_EDGES = [(0, 1), (0, 2), (1, 2)]
STAR_EDGES = [(0, 1), (0, 2), (0, 3)]
PAW_EDGES = [(0, 1), (0, 2), (1, 2), (2, 3)]
HOUSE_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4), (4, 5)]

TINY = {
    "p3": P3_EDGES,
    "k3": K3_EDGES,
    "star": STAR_EDGES,
    "paw": PAW_EDGES,
    "house": HOUSE_EDGES,
}


@pytest.fixture
def p3():
    return from_edges(P3_EDGES)


@pytest.fixture
def k3():
    return from_edges(K3_EDGES)


@pytest.fixture
def star():
    return from_edges(STAR_EDGES)


@pytest.fixture(scope="session")
def er_lcc():
    g, _ = largest_connected_component(generate_er(500, 0.02, seed=1))
    return g


@pytest.fixture(scope="session")
def er_attrs(er_lcc):
    codes = (np.random.default_rng(99).random(er_lcc.n) < 0.3).astype(np.int64)
    return AttributeTable(er_lcc.n, categorical={"grp": CategoricalColumn(("0", "1"), codes)})


BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_cykernels, id="cython",
                         marks=pytest.mark.skipif(_cykernels is None, reason="extension not built"))]


@pytest.fixture(params=BACKENDS)
def kernel_impl(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LOG, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_LOG[key]
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")
