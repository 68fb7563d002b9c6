from pathlib import Path

import pytest

from py_module.ff import field_create
from py_module.matgrp import general_linear_group, special_linear_group

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def f2():
    return field_create(2, 1)


@pytest.fixture(scope="session")
def f4():
    return field_create(2, 2)


@pytest.fixture(scope="session")
def f5():
    return field_create(5, 1)


@pytest.fixture(scope="session")
def f7():
    return field_create(7, 1)


@pytest.fixture(scope="session")
def f9():
    return field_create(3, 2)


@pytest.fixture(scope="session")
def f11():
    return field_create(11, 1)


@pytest.fixture(scope="session")
def f25():
    return field_create(5, 2)


@pytest.fixture(scope="session")
def sl2_f5(f5):
    return special_linear_group(f5, 2)


@pytest.fixture(scope="session")
def gl2_f5(f5):
    return general_linear_group(f5, 2)
