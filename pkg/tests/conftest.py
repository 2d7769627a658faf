import pytest

from sewedflow import CompactSymmetricSet, make_family


@pytest.fixture(scope="session")
def set_interval_point():
    # symmetric closure of [0.2, 0.3] ∪ {0.5}
    return CompactSymmetricSet.from_spec(points=[0.5], intervals=[[0.2, 0.3]])


@pytest.fixture(scope="session")
def set_single_point():
    return CompactSymmetricSet.from_spec(points=[0.5])


@pytest.fixture(scope="session")
def set_three_components():
    return CompactSymmetricSet.from_spec(points=[0.25, 0.6], intervals=[[0.4, 0.45]])


@pytest.fixture(scope="session")
def ck2():
    return make_family("finite_time_ck", k=2)


@pytest.fixture(scope="session")
def cinf():
    return make_family("finite_time_cinf")


@pytest.fixture(scope="session")
def centre():
    return make_family("sewed_centre")


@pytest.fixture(scope="session")
def cubic():
    return make_family("cubic_focus")


@pytest.fixture(scope="session")
def sin2():
    return make_family("centre_focus_sin", k=2)


@pytest.fixture(scope="session")
def eset_system(set_interval_point):
    return make_family("eset", k=2, eset=set_interval_point)
