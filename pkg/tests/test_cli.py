"""Command-line surface, exit codes, and machine-readable errors."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from threatbench import fixtures
from threatbench.cli import main
from threatbench.store import Store, save


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def model_env(tmp_path, monkeypatch):
    path = tmp_path / "threatmodel.json"
    monkeypatch.setenv("ABC_MODEL_PATH", str(path))
    return path


@pytest.fixture()
def bitcoin_env(tmp_path, monkeypatch, bitcoin_doc):
    path = tmp_path / "bitcoin.json"
    save(bitcoin_doc, path)
    monkeypatch.setenv("ABC_MODEL_PATH", str(path))
    return path


def test_init_and_step1_editing(runner, model_env):
    assert runner.invoke(main, ["init", "demo"]).exit_code == 0
    assert model_env.exists()
    assert runner.invoke(main, ["role", "add", "client"]).exit_code == 0
    assert runner.invoke(main, ["role", "add", "server", "--description", "serves"]).exit_code == 0
    result = runner.invoke(
        main,
        [
            "asset", "add", "service payments",
            "--requirement", "proper-reward=servers are rewarded properly",
            "--requirement", "earned-payment=servers earned collected payments",
        ],
    )
    assert result.exit_code == 0
    assert runner.invoke(main, ["module", "add", "payments", "--asset", "service payments"]).exit_code == 0
    assert runner.invoke(main, ["role", "rm", "server"]).exit_code == 0
    store = Store(model_env)
    assert [r.name for r in store.model.roles] == ["client"]
    assert store.model.version == 5


def test_full_triage_via_cli(runner, model_env, tmp_path):
    save(fixtures.compucoin_document(), model_env)
    assert runner.invoke(main, ["derive"]).exit_code == 0
    result = runner.invoke(main, ["matrix", "gen", fixtures.COMPUCOIN_SERVICE_THEFT])
    assert result.exit_code == 0
    assert "21 cells" in result.output

    log_file = tmp_path / "triage.json"
    fixtures.write_log(log_file, fixtures.fig3_triage_ops("m1"))
    assert runner.invoke(main, ["replay", str(log_file)]).exit_code == 0

    stats = runner.invoke(main, ["stats"])
    assert "matrices: 1" in stats.output
    assert "total cells: 21" in stats.output
    assert "distilled scenarios: 2" in stats.output

    shown = runner.invoke(main, ["matrix", "show", "m1"])
    assert shown.exit_code == 0
    assert shown.output.count("X") == 10

    scored = runner.invoke(main, ["score", "s1", "--likelihood", "4", "--severity", "5"])
    assert scored.exit_code == 0 and "20" in scored.output


def test_cell_commands_and_lifecycle_guard(runner, model_env, tmp_path):
    save(fixtures.compucoin_document(), model_env)
    runner.invoke(main, ["derive"])
    runner.invoke(main, ["matrix", "gen", fixtures.COMPUCOIN_SERVICE_THEFT])
    ok = runner.invoke(
        main,
        ["cell", "eliminate", "m1", "client->client", "--why", "clients do not serve others"],
    )
    assert ok.exit_code == 0
    again = runner.invoke(
        main, ["cell", "eliminate", "m1", "client->client", "--why", "twice"]
    )
    assert again.exit_code == 1
    assert "error:" in again.output

    merged = runner.invoke(
        main,
        [
            "cell", "merge", "m1", "client+server->server",
            "--into", "client->server", "--why", "only the client pays",
        ],
    )
    assert merged.exit_code == 0
    bad_merge = runner.invoke(
        main,
        [
            "--json", "cell", "merge", "m1", "client->server",
            "--into", "client->client", "--why", "covered",
        ],
    )
    assert bad_merge.exit_code == 1
    error = json.loads(bad_merge.output)["error"]
    assert error["code"] == "merge_into_eliminated"

    scenario_file = tmp_path / "scenario.json"
    scenario_file.write_text(
        json.dumps(
            {
                "title": "underpayment",
                "description": "client pays less than agreed",
                "attackers": "client",
                "targets": "server",
                "asset_refs": ["service payments"],
                "action_flow": ["request", "compute", "underpay"],
            }
        ),
        encoding="utf-8",
    )
    documented = runner.invoke(
        main,
        ["cell", "document", "m1", "client->server", "--scenario-file", str(scenario_file)],
    )
    assert documented.exit_code == 0
    reopened = runner.invoke(
        main, ["cell", "reopen", "m1", "client->server", "--note", "revisit"]
    )
    assert reopened.exit_code == 0


def test_exclude_category(runner, model_env):
    save(fixtures.compucoin_document(), model_env)
    runner.invoke(main, ["derive"])
    result = runner.invoke(
        main,
        ["exclude-category", "c10", "--why", "transactions signed by their originators"],
    )
    assert result.exit_code == 0
    gen = runner.invoke(main, ["matrix", "gen", "c10"])
    assert gen.exit_code == 1


def test_bitcoin_stats(runner, bitcoin_env):
    stats = runner.invoke(main, ["stats"])
    assert stats.exit_code == 0
    assert "matrices: 5" in stats.output
    assert "total cells: 105" in stats.output
    assert "distilled scenarios: 10" in stats.output
    as_json = runner.invoke(main, ["--json", "stats"])
    data = json.loads(as_json.output)
    assert data["total_cells"] == 105


def test_deposit_prints_bound(runner):
    result = runner.invoke(main, ["deposit", "--cheat", "10", "--honest", "4", "--p", "1"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0] == "6"
    assert "deterred" in result.output

    half = runner.invoke(main, ["deposit", "--cheat", "10", "--honest", "4", "--p", "0.5"])
    assert half.output.splitlines()[0] == "12"

    as_json = runner.invoke(
        main, ["--json", "deposit", "--cheat", "10", "--honest", "4", "--p", "1"]
    )
    data = json.loads(as_json.output)
    assert data == {"deterred": True, "expected_cheat_payoff": "4", "min_deposit": "6"}

    bad = runner.invoke(main, ["deposit", "--cheat", "10", "--honest", "4", "--p", "0"])
    assert bad.exit_code == 1


def test_report_formats(runner, bitcoin_env):
    md = runner.invoke(main, ["report", "--format", "markdown"])
    assert md.exit_code == 0
    assert md.output.startswith("# Threat model: Bitcoin")
    structured = runner.invoke(main, ["report", "--format", "structured"])
    data = json.loads(structured.output)
    assert data["model"]["name"] == "Bitcoin"
    assert len(data["audit_log"]) == data["model"]["version"]


def test_missing_model_file_fails_cleanly(runner, model_env):
    result = runner.invoke(main, ["stats"])
    assert result.exit_code == 1
    assert "no model file" in result.output


def test_init_refuses_overwrite(runner, model_env):
    assert runner.invoke(main, ["init", "demo"]).exit_code == 0
    result = runner.invoke(main, ["init", "demo"])
    assert result.exit_code == 1
