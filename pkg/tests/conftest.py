import pytest

from autoeda.db.sqlite_adapter import SqliteAdapter
from autoeda.domain import PipelineConfig
from autoeda.llm.gateway import Gateway, ProviderProfile
from autoeda.llm.providers import ScriptedProvider
from autoeda.vectors.embedding import StubEmbedder
from autoeda.vectors.index import VectorIndex

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def shop_adapter():
    adapter = SqliteAdapter.from_fixture([FIXTURES / "shop.sql"])
    yield adapter
    adapter.close()


@pytest.fixture
def config():
    return PipelineConfig()


@pytest.fixture
def memory_index():
    return VectorIndex(StubEmbedder(dim=32))


def scripted_gateway(rules, strict=True, default=None, window=100_000):
    provider = ScriptedProvider(rules, strict=strict, default=default)
    profile = ProviderProfile(name="scripted", context_window_tokens=window)
    return Gateway(provider, profile, backoff_base_s=0.0)
