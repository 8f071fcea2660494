"""Cross-interface contracts: CLI and HTTP drive the same engine."""

from __future__ import annotations

import warnings

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from threatbench import fixtures
from threatbench.cli import main
from threatbench.collusion import generate_matrix
from threatbench.model import Role, upsert_role
from threatbench.serialize import model_to_dict
from threatbench.server import create_app
from threatbench.store import Store, save


def test_cli_and_http_produce_identical_models(tmp_path, monkeypatch, compucoin_doc):
    cli_path = tmp_path / "cli.json"
    http_path = tmp_path / "http.json"
    save(compucoin_doc, cli_path)
    save(compucoin_doc, http_path)

    monkeypatch.setenv("ABC_MODEL_PATH", str(cli_path))
    runner = CliRunner()
    assert runner.invoke(main, ["derive"]).exit_code == 0
    assert runner.invoke(
        main, ["matrix", "gen", fixtures.COMPUCOIN_SERVICE_THEFT]
    ).exit_code == 0
    assert runner.invoke(
        main,
        ["cell", "eliminate", "m1", "client->client", "--why", "clients do not serve others"],
    ).exit_code == 0

    http_store = Store(http_path)
    client = TestClient(create_app(http_store))
    http_store.mutate("derive", fixtures._derive_op()[1])
    resp = client.post(
        "/api/matrices",
        json={"category_id": fixtures.COMPUCOIN_SERVICE_THEFT, "scope": None},
    )
    assert resp.status_code == 200
    resp = client.post(
        "/api/matrices/m1/cells/client-%3Eclient/eliminate",
        json={"rationale": "clients do not serve others"},
    )
    assert resp.status_code == 200

    cli_model = Store(cli_path).model
    http_model = Store(http_path).model
    assert model_to_dict(cli_model) == model_to_dict(http_model)
    # audit logs agree on everything but wall-clock timestamps
    cli_log = [(e.operation, e.arguments, e.resulting_version) for e in Store(cli_path).snapshot().audit_log]
    http_log = [(e.operation, e.arguments, e.resulting_version) for e in Store(http_path).snapshot().audit_log]
    assert cli_log == http_log


def test_large_scope_guard_warns(monkeypatch, compucoin_doc):
    import threatbench.collusion as collusion

    model = compucoin_doc.model
    for name in ("alpha", "beta"):
        model = upsert_role(model, Role(name))
    from threatbench.categories import default_catalog, derive_model_categories

    model = derive_model_categories(model, default_catalog())
    monkeypatch.setattr(collusion, "LARGE_SCOPE_WARNING", 3)
    with pytest.warns(UserWarning, match="materializes"):
        generate_matrix(model, fixtures.COMPUCOIN_SERVICE_THEFT)
    monkeypatch.setattr(collusion, "LARGE_SCOPE_WARNING", 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        generate_matrix(model, fixtures.COMPUCOIN_SERVICE_THEFT)


def test_cli_merge_of_eliminated_cell_fails(tmp_path, monkeypatch, compucoin_triaged):
    path = tmp_path / "model.json"
    save(compucoin_triaged, path)
    monkeypatch.setenv("ABC_MODEL_PATH", str(path))
    result = CliRunner().invoke(
        main,
        [
            "cell", "merge", "m1", "client->client",
            "--into", "client->server", "--why", "already covered",
        ],
    )
    assert result.exit_code == 1
    assert "error:" in result.output
