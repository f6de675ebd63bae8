import numpy as np
import pytest

from polyboltz import CrossSectionModel, MixtureSpec, SpeciesSpec


@pytest.fixture
def mono():
    return MixtureSpec.single(1.0)


@pytest.fixture
def poly4():
    return MixtureSpec.single(1.0, "polyatomic", 4.0)


@pytest.fixture
def mono_poly():
    return MixtureSpec((SpeciesSpec(1.0, "monatomic", 2.0, 1.0), SpeciesSpec(2.0, "polyatomic", 4.0, 0.8)))


@pytest.fixture
def mono_poly_model():
    return CrossSectionModel(np.array([[1.0, 0.8], [0.8, 1.2]]), 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
