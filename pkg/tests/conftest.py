import pytest

from pfl import PopulationSpec, ThresholdPredictor, build_example_population, PluginPredictor
from pfl.policy import baseline_policy

ACCEPTANCE = []


@pytest.fixture(scope="session")
def spec():
    return PopulationSpec()


@pytest.fixture(scope="session")
def cells(spec):
    return build_example_population(spec)


@pytest.fixture(scope="session")
def base(cells):
    return baseline_policy(cells)


@pytest.fixture(scope="session")
def pred1():
    # the table the default fit produces (checked in test_predictor)
    return PluginPredictor.from_table(["x1"], {(0,): 0, (1,): 1})


@pytest.fixture(scope="session")
def pred2():
    return ThresholdPredictor(0.5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
