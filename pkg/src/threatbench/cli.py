"""Command-line surface: one command per engine operation.

The model file defaults to ./threatmodel.json and can be overridden with
the ABC_MODEL_PATH environment variable. Engine errors exit non-zero; with
--json they are printed as structured JSON on stderr instead of prose.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import fixtures as fixture_mod
from .categories import catalog_to_dict, default_catalog, load_catalog
from .collusion import CellCoordinate
from .errors import InvariantViolation, WorkbenchError
from .reporting import compute_stats, export_report, render_matrix_text, stats_to_dict
from .risk import IncentiveGame, is_deterred, min_deposit, parse_rational, rational_to_text
from .serialize import canonical_dumps
from .store import Store, model_path

DEFAULT_PORT = 8787


class Context:
    def __init__(self, as_json: bool, model_file: str | None):
        self.as_json = as_json
        self.model_file = model_file

    def store(self) -> Store:
        return Store(model_path(self.model_file))


pass_ctx = click.make_pass_decorator(Context)


def _fail(ctx: Context, error: WorkbenchError) -> None:
    if ctx.as_json:
        click.echo(json.dumps({"error": error.to_dict()}, sort_keys=True), err=True)
    else:
        click.echo(f"error: {error.message}", err=True)
    sys.exit(1)


def _done(ctx: Context, version: int, text: str, **extra) -> None:
    if ctx.as_json:
        click.echo(json.dumps({"ok": True, "version": version, **extra}, sort_keys=True))
    else:
        click.echo(f"{text} (model version {version})")


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output and errors.")
@click.option(
    "--model",
    "model_file",
    default=None,
    metavar="PATH",
    help="Model file (default ./threatmodel.json or $ABC_MODEL_PATH).",
)
@click.pass_context
def main(click_ctx, as_json: bool, model_file: str | None):
    """Asset-based threat modeling: categories, collusion matrices, risk."""
    click_ctx.obj = Context(as_json, model_file)


# --- Step 0: model lifecycle ------------------------------------------------


@main.command()
@click.argument("name")
@pass_ctx
def init(ctx: Context, name: str):
    """Create an empty model file."""
    try:
        store = Store.initialize(model_path(ctx.model_file), name)
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, store.model.version, f"initialized model {name!r} at {store.path}")


# --- Step 1: system model editing --------------------------------------------


@main.group()
def role():
    """Edit participant roles."""


@role.command("add")
@click.argument("name")
@click.option("--description", default="")
@pass_ctx
def role_add(ctx: Context, name: str, description: str):
    try:
        doc = ctx.store().mutate("upsert_role", {"name": name, "description": description})
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"role {name!r} recorded")


@role.command("rm")
@click.argument("name")
@pass_ctx
def role_rm(ctx: Context, name: str):
    try:
        doc = ctx.store().mutate("remove_role", {"name": name})
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"role {name!r} removed")


@main.group()
def asset():
    """Edit protected assets."""


@asset.command("add")
@click.argument("name")
@click.option("--kind", type=click.Choice(["concrete", "abstract"]), default="concrete")
@click.option("--description", default="")
@click.option(
    "--requirement",
    "requirements",
    multiple=True,
    metavar="ID=STATEMENT",
    help="Security requirement; repeatable.",
)
@click.option("--tag", "tags", multiple=True, help="Instance tag; repeatable.")
@click.option("--catalog-class", default="", help="Catalog wildcard class this asset belongs to.")
@pass_ctx
def asset_add(ctx, name, kind, description, requirements, tags, catalog_class):
    reqs = []
    for raw in requirements:
        rid, sep, statement = raw.partition("=")
        if not sep or not rid.strip():
            _fail(ctx, InvariantViolation(f"requirement must look like id=statement: {raw!r}"))
            return
        reqs.append({"id": rid.strip(), "statement": statement.strip()})
    payload = {
        "asset": {
            "name": name,
            "kind": kind,
            "description": description,
            "security_requirements": reqs,
            "instance_tags": list(tags),
            "catalog_class": catalog_class,
        }
    }
    try:
        doc = ctx.store().mutate("upsert_asset", payload)
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"asset {name!r} recorded")


@asset.command("rm")
@click.argument("name")
@pass_ctx
def asset_rm(ctx: Context, name: str):
    try:
        doc = ctx.store().mutate("remove_asset", {"name": name})
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"asset {name!r} removed")


@main.group()
def module():
    """Edit system modules."""


@module.command("add")
@click.argument("name")
@click.option("--description", default="")
@click.option("--asset", "asset_refs", multiple=True, help="Covered asset; repeatable.")
@click.option(
    "--graph-file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file with the module's network model ({nodes, edges}).",
)
@pass_ctx
def module_add(ctx, name, description, asset_refs, graph_file):
    graph = {"nodes": [], "edges": []}
    if graph_file:
        graph = json.loads(Path(graph_file).read_text("utf-8"))
    payload = {
        "module": {
            "name": name,
            "description": description,
            "asset_refs": list(asset_refs),
            "network_model": graph,
        }
    }
    try:
        doc = ctx.store().mutate("upsert_module", payload)
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"module {name!r} recorded")


# --- Step 2: threat categories ------------------------------------------------


@main.command()
@click.option(
    "--catalog",
    "catalog_file",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Replacement catalog file (defaults to the shipped catalog).",
)
@pass_ctx
def derive(ctx: Context, catalog_file: str | None):
    """Apply the catalog, then derive categories for uncovered requirements."""
    if catalog_file:
        catalog_data = json.loads(Path(catalog_file).read_text("utf-8"))
        load_catalog(catalog_data)  # fail fast on malformed catalogs
    else:
        catalog_data = catalog_to_dict(default_catalog())
    try:
        doc = ctx.store().mutate("derive", {"catalog": catalog_data})
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    count = len(doc.model.categories)
    _done(ctx, doc.model.version, f"{count} categories on the model", categories=count)


@main.command("exclude-category")
@click.argument("category_id")
@click.option("--why", required=True, help="Why this category is neutralized.")
@pass_ctx
def exclude_category(ctx: Context, category_id: str, why: str):
    """Flag a category as neutralized; it is skipped by matrix generation."""
    try:
        doc = ctx.store().mutate(
            "exclude_category", {"category_id": category_id, "rationale": why}
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"category {category_id} excluded")


# --- Step 3: collusion matrices -----------------------------------------------


@main.group()
def matrix():
    """Generate and inspect collusion matrices."""


@matrix.command("gen")
@click.argument("category_id")
@click.option("--scope", default=None, metavar="R1,R2", help="Role subset (default: all roles).")
@pass_ctx
def matrix_gen(ctx: Context, category_id: str, scope: str | None):
    scope_list = [part.strip() for part in scope.split(",") if part.strip()] if scope else None
    try:
        doc = ctx.store().mutate(
            "generate_matrix", {"category_id": category_id, "scope": scope_list}
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    new = doc.model.matrices[-1]
    _done(
        ctx,
        doc.model.version,
        f"matrix {new.id} generated with {len(new.cells)} cells",
        matrix_id=new.id,
        cells=len(new.cells),
    )


@matrix.command("show")
@click.argument("matrix_id")
@pass_ctx
def matrix_show(ctx: Context, matrix_id: str):
    try:
        model = ctx.store().model
        grid = render_matrix_text(model.matrix(matrix_id))
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    click.echo(grid, nl=False)


@main.group()
def cell():
    """Triage matrix cells."""


@cell.command("eliminate")
@click.argument("matrix_id")
@click.argument("cell_id")
@click.option("--why", required=True)
@pass_ctx
def cell_eliminate(ctx, matrix_id, cell_id, why):
    try:
        doc = ctx.store().mutate(
            "eliminate", {"matrix_id": matrix_id, "cell": cell_id, "rationale": why}
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"cell {cell_id} eliminated")


@cell.command("merge")
@click.argument("matrix_id")
@click.argument("cell_id")
@click.option("--into", "into_cell", required=True, metavar="CELL")
@click.option("--why", required=True)
@pass_ctx
def cell_merge(ctx, matrix_id, cell_id, into_cell, why):
    try:
        doc = ctx.store().mutate(
            "merge",
            {"matrix_id": matrix_id, "cell": cell_id, "into": into_cell, "rationale": why},
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"cell {cell_id} merged into {into_cell}")


@cell.command("document")
@click.argument("matrix_id")
@click.argument("cell_id")
@click.option(
    "--scenario-file",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file holding one scenario or a list of scenarios.",
)
@pass_ctx
def cell_document(ctx, matrix_id, cell_id, scenario_file):
    data = json.loads(Path(scenario_file).read_text("utf-8"))
    if isinstance(data, dict) and "scenarios" in data:
        scenarios = data["scenarios"]
    elif isinstance(data, dict):
        scenarios = [data]
    else:
        scenarios = data
    try:
        doc = ctx.store().mutate(
            "document", {"matrix_id": matrix_id, "cell": cell_id, "scenarios": scenarios}
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    refs = doc.model.matrix(matrix_id).cells[CellCoordinate.parse(cell_id)].scenario_refs
    _done(ctx, doc.model.version, f"cell {cell_id} documented with {len(refs)} scenarios")


@cell.command("reopen")
@click.argument("matrix_id")
@click.argument("cell_id")
@click.option("--note", required=True, help="Audit note explaining the reopen.")
@pass_ctx
def cell_reopen(ctx, matrix_id, cell_id, note):
    try:
        doc = ctx.store().mutate(
            "reopen", {"matrix_id": matrix_id, "cell": cell_id, "note": note}
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"cell {cell_id} reopened")


@main.command()
@click.argument("log_file", type=click.Path(exists=True, dir_okay=False))
@pass_ctx
def replay(ctx: Context, log_file: str):
    """Apply a recorded triage log to the model."""
    try:
        ops = fixture_mod.read_log(log_file)
        doc = ctx.store().replay(ops)
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"replayed {len(ops)} operations")


# --- Step 4: risk -------------------------------------------------------------


@main.command()
@click.argument("scenario_id")
@click.option("--likelihood", type=int, required=True)
@click.option("--severity", type=int, required=True)
@click.option("--notes", default="")
@pass_ctx
def score(ctx, scenario_id, likelihood, severity, notes):
    """Record likelihood x severity for a scenario."""
    try:
        doc = ctx.store().mutate(
            "score",
            {
                "scenario_id": scenario_id,
                "likelihood": likelihood,
                "severity": severity,
                "notes": notes,
            },
        )
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    _done(ctx, doc.model.version, f"scenario {scenario_id} scored {likelihood * severity}")


@main.command()
@click.option("--cheat", required=True, help="Gross payoff of undetected cheating.")
@click.option("--honest", required=True, help="Payoff of honest behavior.")
@click.option("--p", "prob", required=True, help="Detection probability in (0,1].")
@pass_ctx
def deposit(ctx, cheat, honest, prob):
    """Print the minimum penalty deposit and the deterrence check."""
    try:
        c, h, p = parse_rational(cheat), parse_rational(honest), parse_rational(prob)
        bound = min_deposit(c, h, p)
        game = IncentiveGame(honest_payoff=h, cheat_payoff=c, detection_probability=p, deposit=bound)
        result = is_deterred(game)
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    if ctx.as_json:
        click.echo(
            json.dumps(
                {
                    "min_deposit": rational_to_text(bound),
                    "deterred": result.deterred,
                    "expected_cheat_payoff": rational_to_text(result.expected_cheat_payoff),
                },
                sort_keys=True,
            )
        )
    else:
        click.echo(rational_to_text(bound))
        verdict = "deterred" if result.deterred else "not deterred"
        click.echo(
            f"at this deposit cheating yields {rational_to_text(result.expected_cheat_payoff)} "
            f"expected vs {rational_to_text(h)} honest: {verdict}"
        )


# --- Reporting and service -----------------------------------------------------


@main.command()
@pass_ctx
def stats(ctx: Context):
    """Model statistics: matrices, cells, distilled scenarios."""
    try:
        model = ctx.store().model
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    data = compute_stats(model)
    if ctx.as_json:
        click.echo(json.dumps(stats_to_dict(data), sort_keys=True))
        return
    click.echo(f"steps covered: {data.steps_covered} of 4")
    click.echo(f"matrices: {data.matrices}")
    click.echo(f"total cells: {data.total_cells}")
    click.echo(f"distilled scenarios: {data.distilled_scenarios}")
    click.echo(f"unresolved cells: {data.unresolved_cells}")
    for row in data.per_matrix:
        click.echo(
            f"  {row.matrix_id}: scope={row.scope_size} cells={row.cells} "
            f"eliminated={row.eliminated} merged={row.merged} "
            f"documented={row.documented} unresolved={row.unresolved} "
            f"scenarios={row.scenarios}"
        )


@main.command()
@click.option("--format", "fmt", type=click.Choice(["markdown", "structured"]), default="markdown")
@pass_ctx
def report(ctx: Context, fmt: str):
    """Emit the full threat-model report."""
    try:
        doc = ctx.store().snapshot()
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    if fmt == "structured":
        click.echo(canonical_dumps(doc.to_dict()), nl=False)
    else:
        click.echo(export_report(doc.model, "markdown"))


@main.command()
@click.option("--port", type=int, default=DEFAULT_PORT, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@pass_ctx
def serve(ctx: Context, port: int, host: str):
    """Serve the HTTP API (and the workbench UI if built) on loopback."""
    import uvicorn

    from .server import create_app

    try:
        store = ctx.store()
    except WorkbenchError as exc:
        _fail(ctx, exc)
        return
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
