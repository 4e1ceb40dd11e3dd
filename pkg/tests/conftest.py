import pytest

from jacgap import Precision, WeightParams, build_table


@pytest.fixture(scope="session")
def prec256():
    return Precision(256)


@pytest.fixture(scope="session")
def wp_mid():
    # interior point used across modules: alpha = 1, half-gap 0.3
    return WeightParams("1", "0.3")


@pytest.fixture(scope="session")
def table_mid(wp_mid, prec256):
    return build_table(wp_mid, 12, prec256)
