import pytest

from spectralnav.env import GeneratorParams, generate_env, generate_episodes


@pytest.fixture(scope="session")
def small_env():
    return generate_env(0, GeneratorParams(node_count=12, room_count=3, category_count=6))


@pytest.fixture(scope="session")
def default_env():
    return generate_env(3)


@pytest.fixture(scope="session")
def default_episodes(default_env):
    return generate_episodes(default_env, 7, 10)
