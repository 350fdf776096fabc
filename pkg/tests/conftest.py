from __future__ import annotations

import pytest

from cwb import FiniteAlgebra, load_corpus


@pytest.fixture(scope="session")
def z2():
    return load_corpus("Z2")


@pytest.fixture(scope="session")
def z4():
    return load_corpus("Z4")


@pytest.fixture(scope="session")
def z2x2():
    return load_corpus("Z2x2")


@pytest.fixture(scope="session")
def z6():
    return load_corpus("Z6")


@pytest.fixture(scope="session")
def s3():
    return load_corpus("S3")


@pytest.fixture(scope="session")
def d4():
    return load_corpus("D4")


@pytest.fixture(scope="session")
def trivial():
    return load_corpus("trivial")


@pytest.fixture(scope="session")
def two_bare():
    """Two-element algebra with an empty signature."""
    return FiniteAlgebra("two", 2, (), ())


@pytest.fixture(scope="session")
def chain3():
    """Three-element meet-semilattice on the chain 0 < 1 < 2."""
    return FiniteAlgebra(
        "chain3",
        3,
        (("meet", 2),),
        (tuple(min(a, b) for a in range(3) for b in range(3)),),
    )
