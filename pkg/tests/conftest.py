from __future__ import annotations

import pytest

from threatbench import fixtures
from threatbench.store import Store, save


@pytest.fixture(scope="session")
def compucoin_doc():
    return fixtures.compucoin_document()


@pytest.fixture(scope="session")
def compucoin_triaged():
    return fixtures.compucoin_document(triaged=True)


@pytest.fixture(scope="session")
def bitcoin_doc():
    return fixtures.bitcoin_document()


@pytest.fixture()
def compucoin_store(tmp_path, compucoin_doc):
    path = tmp_path / "compucoin.json"
    save(compucoin_doc, path)
    return Store(path)
