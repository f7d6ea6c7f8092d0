from unittest import mock

import pytest
from hypothesis import settings

from ivsolve import queue_manager


@pytest.fixture
def redis_client():
    """A mock Redis client installed as the shared queue client."""
    client = mock.MagicMock()
    client.lpop.return_value = None
    client.llen.return_value = 0
    queue_manager.set_redis_client(client)
    yield client
    queue_manager.set_redis_client(None)


settings.register_profile('ivsolve', deadline=None, max_examples=200)
settings.load_profile('ivsolve')
