import pytest
from hypothesis import settings

from subshift_lab.substitution import eigenvector_for, matrix_of, parse_substitution

settings.register_profile("ci", derandomize=True, max_examples=60)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def twist2():
    """1 -> 112, 2 -> 221: strongly non-synchronizable, eigenvalue 1."""
    sub = parse_substitution("1: 112\n2: 221")
    gamma = eigenvector_for(matrix_of(sub), 1)
    return sub, gamma


@pytest.fixture(scope="session")
def sync3():
    """1 -> 12, 2 -> 13, 3 -> 23: behaviorally synchronizing, eigenvalue 1."""
    sub = parse_substitution("1: 12\n2: 13\n3: 23")
    gamma = eigenvector_for(matrix_of(sub), 1)
    return sub, gamma
