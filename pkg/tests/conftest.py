import pytest

from memsynapse.circuit import SeriesPair, Single
from memsynapse.device import MemristorParams, Model

# Ratio-study table: r_init, r_on, r_off per device
PAIR_TABLE = {
    "alpha_small": ([9e3, 9e3], [100.0, 100.0], [10e3, 1e6]),
    "alpha_one": ([399e3, 1e3], [100.0, 100.0], [400e3, 400e3]),
    "alpha_large": ([950e3, 1e3], [100.0, 100.0], [1e6, 10e3]),
}


def ratio_pair(name, q0=1e-2, model=Model.LINEAR):
    r_init, r_on, r_off = PAIR_TABLE[name]
    return SeriesPair(
        *(
            MemristorParams(r_on[j], r_off[j], r_init[j], q0, (1, -1)[j], model)
            for j in range(2)
        )
    )


def lone_device(q0=1e-2, model=Model.LINEAR):
    return Single(MemristorParams(100.0, 100e3, 100e3, q0, 1, model))


@pytest.fixture
def lin_dev():
    return MemristorParams(r_on=100.0, r_off=100e3, r_init=50e3, q0=1e-2)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
