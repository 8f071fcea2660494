"""Single-file persistence with an append-only, replayable audit log.

A model document is the complete model plus the log of every mutation that
produced it. Mutations go through a named-operation registry so that the
log can be replayed: folding the logged operations over an empty model
must reproduce the stored model exactly, and this is verified on every
save and load. Versions are gapless: entry k yields model version k.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import categories as cat
from . import collusion as col
from . import model as mdl
from . import risk
from .errors import InvariantViolation, NotFoundError, VersionConflict
from .serialize import (
    SCHEMA_VERSION,
    canonical_dumps,
    model_from_dict,
    model_to_dict,
    parse_document_text,
    scenario_from_dict,
)

#: Default model file, overridable with the ABC_MODEL_PATH environment variable.
DEFAULT_MODEL_FILE = "threatmodel.json"
MODEL_PATH_ENV = "ABC_MODEL_PATH"


def model_path(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(MODEL_PATH_ENV, DEFAULT_MODEL_FILE))


# ---------------------------------------------------------------------------
# Operation registry
# ---------------------------------------------------------------------------


def _op_upsert_role(model, args):
    return mdl.upsert_role(model, mdl.Role(args["name"], args.get("description", "")))


def _op_remove_role(model, args):
    return mdl.remove_role(model, args["name"])


def _op_upsert_asset(model, args):
    from .serialize import asset_from_dict

    return mdl.upsert_asset(model, asset_from_dict(args["asset"]))


def _op_remove_asset(model, args):
    return mdl.remove_asset(model, args["name"])


def _op_upsert_module(model, args):
    from .serialize import module_from_dict

    return mdl.upsert_module(model, module_from_dict(args["module"]))


def _op_set_assumptions(model, args):
    return mdl.set_assumptions(model, tuple(args["assumptions"]))


def _op_set_dependencies(model, args):
    return mdl.set_dependencies(model, tuple(args["dependencies"]))


def _op_apply_catalog(model, args):
    return cat.apply_catalog(model, cat.load_catalog(args["catalog"]))


def _op_derive(model, args):
    return cat.derive_model_categories(model, cat.load_catalog(args["catalog"]))


def _op_add_category(model, args):
    from .serialize import category_from_dict

    data = dict(args["category"])
    data.setdefault("origin", cat.CategoryOrigin.MANUAL.value)
    candidate = category_from_dict(data)
    return model.bump(categories=cat.register_categories(model, [candidate]))


def _op_exclude_category(model, args):
    return cat.mark_category_excluded(model, args["category_id"], args["rationale"])


def _op_generate_matrix(model, args):
    scope = args.get("scope")
    return col.generate_matrix(
        model, args["category_id"], tuple(scope) if scope is not None else None
    )


def _op_eliminate(model, args):
    return col.eliminate(
        model,
        args["matrix_id"],
        col.CellCoordinate.parse(args["cell"]),
        args["rationale"],
    )


def _op_merge(model, args):
    return col.merge(
        model,
        args["matrix_id"],
        col.CellCoordinate.parse(args["cell"]),
        col.CellCoordinate.parse(args["into"]),
        args["rationale"],
    )


def _op_document(model, args):
    scenarios = [scenario_from_dict(s) for s in args["scenarios"]]
    return col.document(
        model, args["matrix_id"], col.CellCoordinate.parse(args["cell"]), scenarios
    )


def _op_reopen(model, args):
    return col.reopen(
        model, args["matrix_id"], col.CellCoordinate.parse(args["cell"]), args["note"]
    )


def _op_score(model, args):
    return risk.score_scenario(
        model,
        args["scenario_id"],
        args["likelihood"],
        args["severity"],
        args.get("notes", ""),
    )


OPERATIONS: dict[str, Callable] = {
    "upsert_role": _op_upsert_role,
    "remove_role": _op_remove_role,
    "upsert_asset": _op_upsert_asset,
    "remove_asset": _op_remove_asset,
    "upsert_module": _op_upsert_module,
    "set_assumptions": _op_set_assumptions,
    "set_dependencies": _op_set_dependencies,
    "apply_catalog": _op_apply_catalog,
    "derive": _op_derive,
    "add_category": _op_add_category,
    "exclude_category": _op_exclude_category,
    "generate_matrix": _op_generate_matrix,
    "eliminate": _op_eliminate,
    "merge": _op_merge,
    "document": _op_document,
    "reopen": _op_reopen,
    "score": _op_score,
}


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditEntry:
    timestamp: str
    operation: str
    arguments: dict
    resulting_version: int

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "operation": self.operation,
            "arguments": self.arguments,
            "resulting_version": self.resulting_version,
        }


@dataclass(frozen=True)
class ModelDocument:
    model: mdl.ThreatModel
    audit_log: tuple[AuditEntry, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "model": model_to_dict(self.model),
            "audit_log": [e.to_dict() for e in self.audit_log],
        }


def new_document(name: str) -> ModelDocument:
    return ModelDocument(model=mdl.ThreatModel(name=name))


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def apply_operation(
    document: ModelDocument,
    operation: str,
    arguments: dict,
    clock: Callable[[], str] = _utc_now,
) -> ModelDocument:
    """Apply one named operation and append it to the audit log."""
    if operation not in OPERATIONS:
        raise NotFoundError(f"unknown operation {operation!r}")
    before = document.model
    after = OPERATIONS[operation](before, arguments)
    if after.version != before.version + 1:
        raise InvariantViolation(
            f"operation {operation} moved version {before.version} -> {after.version}"
        )
    entry = AuditEntry(clock(), operation, arguments, after.version)
    return ModelDocument(
        model=after,
        audit_log=document.audit_log + (entry,),
        schema_version=document.schema_version,
    )


def replay_log(name: str, entries: list[tuple[str, dict]]) -> mdl.ThreatModel:
    """Fold a list of (operation, arguments) over an empty model."""
    model = mdl.ThreatModel(name=name)
    for operation, arguments in entries:
        if operation not in OPERATIONS:
            raise NotFoundError(f"unknown operation {operation!r} in log")
        model = OPERATIONS[operation](model, arguments)
    return model


def verify_replay(document: ModelDocument) -> None:
    """Replay determinism check: the log must rebuild the model exactly."""
    replayed = replay_log(
        document.model.name,
        [(e.operation, e.arguments) for e in document.audit_log],
    )
    if model_to_dict(replayed) != model_to_dict(document.model):
        raise InvariantViolation("audit log does not replay to the stored model")


def save(document: ModelDocument, path: str | Path) -> None:
    """Canonical, atomic write; refuses to persist a non-replayable document."""
    verify_replay(document)
    path = Path(path)
    text = canonical_dumps(document.to_dict())
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    tmp.replace(path)


def load(path: str | Path) -> ModelDocument:
    """Read, decode, and verify a document.

    Raises ParseError for unreadable JSON, SchemaTooNew for documents from
    a later version, and InvariantViolation when a hand-edited file breaks
    model invariants, audit-log numbering, or replay determinism.
    """
    path = Path(path)
    if not path.exists():
        raise NotFoundError(f"no model file at {path}")
    data = parse_document_text(path.read_text("utf-8"))
    model = model_from_dict(data["model"])
    entries = []
    for i, raw in enumerate(data.get("audit_log", []), start=1):
        try:
            entry = AuditEntry(
                timestamp=raw["timestamp"],
                operation=raw["operation"],
                arguments=raw["arguments"],
                resulting_version=raw["resulting_version"],
            )
        except (KeyError, TypeError) as exc:
            raise InvariantViolation(f"malformed audit entry #{i}: {exc!r}") from exc
        if entry.resulting_version != i:
            raise InvariantViolation(
                f"audit entry #{i} carries version {entry.resulting_version}"
            )
        entries.append(entry)
    if model.version != len(entries):
        raise InvariantViolation(
            f"model version {model.version} does not match {len(entries)} audit entries"
        )
    document = ModelDocument(
        model=model, audit_log=tuple(entries), schema_version=data["schema_version"]
    )
    report = mdl.validate_model(model)
    if not report.ok:
        raise InvariantViolation(
            "stored model violates invariants: "
            + "; ".join(f.message for f in report.errors)
        )
    verify_replay(document)
    return document


# ---------------------------------------------------------------------------
# Store: one writer, many readers
# ---------------------------------------------------------------------------


@dataclass
class Store:
    """Serializes every mutation of one model file behind a lock.

    Readers take immutable snapshots and never block; writers apply one
    operation at a time, verify optimistic version expectations, and
    persist before releasing the lock. The file is re-read whenever another
    process changed it (a CLI run next to a live service), so external
    writes surface as version conflicts instead of being overwritten.
    """

    path: Path
    clock: Callable[[], str] = _utc_now
    _document: ModelDocument = field(init=False)
    _file_state: tuple[int, int] = field(init=False)
    _lock: threading.Lock = field(init=False, default_factory=threading.Lock)

    def __post_init__(self):
        self.path = Path(self.path)
        self._document = load(self.path)
        self._file_state = self._stat_file()

    @classmethod
    def initialize(cls, path: str | Path, name: str) -> "Store":
        path = Path(path)
        if path.exists():
            raise InvariantViolation(f"refusing to overwrite existing model at {path}")
        save(new_document(name), path)
        return cls(path)

    def _stat_file(self) -> tuple[int, int]:
        stat = os.stat(self.path)
        return (stat.st_mtime_ns, stat.st_size)

    def _refresh_locked(self) -> None:
        current = self._stat_file()
        if current != self._file_state:
            self._document = load(self.path)
            self._file_state = current

    def snapshot(self) -> ModelDocument:
        with self._lock:
            self._refresh_locked()
            return self._document

    @property
    def model(self) -> mdl.ThreatModel:
        return self.snapshot().model

    def mutate(
        self, operation: str, arguments: dict, expected_version: int | None = None
    ) -> ModelDocument:
        with self._lock:
            self._refresh_locked()
            current = self._document.model.version
            if expected_version is not None and expected_version != current:
                raise VersionConflict(
                    f"model is at version {current}, write expected {expected_version}",
                    expected=expected_version,
                    actual=current,
                )
            updated = apply_operation(self._document, operation, arguments, self.clock)
            save(updated, self.path)
            self._document = updated
            self._file_state = self._stat_file()
            return updated

    def replay(self, entries: list[tuple[str, dict]]) -> ModelDocument:
        """Apply a recorded operation list as a batch, persisting once."""
        with self._lock:
            self._refresh_locked()
            updated = self._document
            for operation, arguments in entries:
                updated = apply_operation(updated, operation, arguments, self.clock)
            save(updated, self.path)
            self._document = updated
            self._file_state = self._stat_file()
            return updated
