"""Persistence, audit-log replay, and write serialization."""

from __future__ import annotations

import json
import threading

import pytest

from threatbench import fixtures
from threatbench.errors import (
    InvariantViolation,
    NotFoundError,
    ParseError,
    SchemaTooNew,
    VersionConflict,
)
from threatbench.serialize import canonical_dumps, model_to_dict
from threatbench.store import Store, load, new_document, replay_log, save


def test_round_trip_compucoin(tmp_path, compucoin_triaged):
    path = tmp_path / "model.json"
    save(compucoin_triaged, path)
    loaded = load(path)
    assert loaded.to_dict() == compucoin_triaged.to_dict()
    assert canonical_dumps(loaded.to_dict()) == path.read_text("utf-8")


def test_save_is_canonical_and_stable(tmp_path, bitcoin_doc):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save(bitcoin_doc, a)
    save(bitcoin_doc, b)
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_load_rejects_future_schema(tmp_path, compucoin_doc):
    path = tmp_path / "model.json"
    save(compucoin_doc, path)
    data = json.loads(path.read_text("utf-8"))
    data["schema_version"] = 99
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(SchemaTooNew):
        load(path)


def test_load_reports_parse_position(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{\n  "schema_version": 1,\n  "model": }\n', encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load(path)
    assert info.value.line == 3


def test_load_rejects_external_target_cell(tmp_path, compucoin_triaged):
    path = tmp_path / "model.json"
    save(compucoin_triaged, path)
    text = path.read_text("utf-8").replace(
        '"client->server":', '"server->external":', 1
    )
    path.write_text(text, encoding="utf-8")
    with pytest.raises(InvariantViolation):
        load(path)


def test_load_rejects_tampered_model(tmp_path, compucoin_doc):
    path = tmp_path / "model.json"
    save(compucoin_doc, path)
    data = json.loads(path.read_text("utf-8"))
    data["model"]["roles"][0]["name"] = "external"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(InvariantViolation):
        load(path)


def test_load_rejects_gapped_audit_log(tmp_path, compucoin_doc):
    path = tmp_path / "model.json"
    save(compucoin_doc, path)
    data = json.loads(path.read_text("utf-8"))
    data["audit_log"][3]["resulting_version"] = 42
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(InvariantViolation):
        load(path)


def test_load_rejects_non_replaying_log(tmp_path, compucoin_doc):
    path = tmp_path / "model.json"
    save(compucoin_doc, path)
    data = json.loads(path.read_text("utf-8"))
    # Edit the stored model without touching the log: replay must disagree.
    data["model"]["assumptions"].append("fabricated assumption")
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(InvariantViolation):
        load(path)


def test_replay_log_rebuilds_fixture(compucoin_triaged):
    entries = [(e.operation, e.arguments) for e in compucoin_triaged.audit_log]
    replayed = replay_log("CompuCoin", entries)
    assert model_to_dict(replayed) == model_to_dict(compucoin_triaged.model)


def test_apply_operation_unknown_op(compucoin_doc):
    from threatbench.store import apply_operation

    with pytest.raises(NotFoundError):
        apply_operation(compucoin_doc, "frobnicate", {})


def test_store_initialize_and_mutate(tmp_path):
    path = tmp_path / "m.json"
    store = Store.initialize(path, "demo")
    assert store.model.version == 0
    store.mutate("upsert_role", {"name": "client"})
    doc = store.mutate("upsert_role", {"name": "server"})
    assert doc.model.version == 2
    reloaded = Store(path)
    assert reloaded.model.version == 2
    with pytest.raises(InvariantViolation):
        Store.initialize(path, "demo")


def test_store_expected_version(tmp_path):
    store = Store.initialize(tmp_path / "m.json", "demo")
    store.mutate("upsert_role", {"name": "client"}, expected_version=0)
    with pytest.raises(VersionConflict) as info:
        store.mutate("upsert_role", {"name": "server"}, expected_version=0)
    assert info.value.expected == 0 and info.value.actual == 1
    # the conflicting write was not applied
    assert [r.name for r in store.model.roles] == ["client"]


def test_store_serializes_concurrent_writers(tmp_path):
    store = Store.initialize(tmp_path / "m.json", "demo")
    errors = []

    def add(i):
        try:
            store.mutate("upsert_role", {"name": f"role{i}"})
        except Exception as exc:  # pragma: no cover - failure reporting
            errors.append(exc)

    threads = [threading.Thread(target=add, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    doc = store.snapshot()
    assert doc.model.version == 16
    assert [e.resulting_version for e in doc.audit_log] == list(range(1, 17))


def test_store_replay_batch(tmp_path, compucoin_doc):
    path = tmp_path / "m.json"
    save(compucoin_doc, path)
    store = Store(path)
    store.replay(
        [
            ("derive", fixtures._derive_op()[1]),
            ("generate_matrix", {"category_id": fixtures.COMPUCOIN_SERVICE_THEFT, "scope": None}),
            *fixtures.fig3_triage_ops("m1"),
        ]
    )
    assert store.model.matrix("m1")
    reloaded = load(path)
    assert reloaded.model.version == store.model.version


def test_store_sees_external_writes_and_conflicts_stale_ones(tmp_path):
    path = tmp_path / "m.json"
    service = Store.initialize(path, "demo")
    held = service.model.version

    # another process (a CLI run) writes the same file
    other = Store(path)
    other.mutate("upsert_role", {"name": "client"})

    # reads pick the external write up...
    assert service.model.version == held + 1
    # ...and a write conditioned on the stale version conflicts, not overwrites
    with pytest.raises(VersionConflict):
        service.mutate("upsert_role", {"name": "server"}, expected_version=held)
    assert [r.name for r in Store(path).model.roles] == ["client"]
    # with the right expectation the write lands on top of the external one
    service.mutate("upsert_role", {"name": "server"}, expected_version=held + 1)
    assert [r.name for r in Store(path).model.roles] == ["client", "server"]


def test_new_document_is_empty():
    doc = new_document("blank")
    assert doc.model.version == 0
    assert doc.audit_log == ()


def test_write_and_read_log(tmp_path):
    ops = fixtures.fig3_triage_ops("m1")
    path = tmp_path / "log.json"
    fixtures.write_log(path, ops)
    assert fixtures.read_log(path) == ops
