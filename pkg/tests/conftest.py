import pytest

from hdelta.factor import build_spf


@pytest.fixture(scope="session")
def spf_small():
    return build_spf(100_000)


@pytest.fixture(scope="session")
def spf_small_arr(spf_small):
    return spf_small.spf
