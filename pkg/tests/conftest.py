import pytest

from farhash.attributes import parse_manifest

TABLE1 = """\
object: 3D vision sensor
dynamic|Operating Temperature=28.60
dynamic|Working sensors=4
dynamic|IP address=0.0.0.0:00
static|Mac address=e5:84:e6:2f:33:61
static|Type of sensors=infrared
"""

TABLE2 = TABLE1.replace("Working sensors=4", "Working sensors=3")


@pytest.fixture
def table1():
    return parse_manifest(TABLE1)


@pytest.fixture
def table2():
    return parse_manifest(TABLE2)


@pytest.fixture
def store_path(tmp_path):
    return tmp_path / "ledger.txt"
