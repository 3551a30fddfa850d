import json
from importlib.resources import files

import pytest

from varbewley import validate_profile


def fixture_doc(name):
    return json.loads(files("varbewley.fixtures").joinpath(name).read_text())


@pytest.fixture
def example1():
    return validate_profile(fixture_doc("example1.json"))


@pytest.fixture
def flatzero():
    return validate_profile(fixture_doc("flatzero.json"))


@pytest.fixture
def dictator():
    return validate_profile(fixture_doc("dictator.json"))


@pytest.fixture
def bewley_disjoint():
    return validate_profile(fixture_doc("bewley_disjoint.json"))
