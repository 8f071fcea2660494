"""Asset-based threat-modeling workbench built on collusion matrices.

The workflow mirrors the four modeling steps the package mechanizes:

1. ``model``: declare roles, assets with security requirements, modules.
2. ``categories``: derive threat categories as requirement violations.
3. ``collusion``: generate collusion matrices and triage every cell.
4. ``risk``: score distilled scenarios and size penalty deposits.

``store`` persists everything as a single replayable JSON document;
``reporting`` renders statistics, grids, and full reports; ``cli`` and
``server`` expose the engine to scripts and to the browser workbench.
"""

from .categories import (
    Catalog,
    CatalogCrossNote,
    CatalogEntry,
    CategoryOrigin,
    ThreatCategory,
    apply_catalog,
    default_catalog,
    derive_categories,
    derive_model_categories,
    mark_category_excluded,
)
from .collusion import (
    CellCoordinate,
    CellResolution,
    CellState,
    CollusionMatrix,
    Coverage,
    PartySet,
    ThreatScenario,
    cell_count,
    coverage,
    distilled_scenarios,
    document,
    eliminate,
    generate_matrix,
    merge,
    reopen,
)
from .model import (
    Asset,
    AssetKind,
    NetworkGraph,
    Role,
    SecurityRequirement,
    SystemModule,
    ThreatModel,
    ValidationReport,
    remove_asset,
    remove_role,
    upsert_asset,
    upsert_module,
    upsert_role,
    validate_model,
)
from .reporting import ModelStats, compute_stats, export_report, render_matrix_text
from .risk import (
    IncentiveGame,
    RiskScore,
    is_deterred,
    min_deposit,
    score_scenario,
)
from .store import ModelDocument, Store, load, new_document, save

__version__ = "0.1.0"

__all__ = [
    "Asset",
    "AssetKind",
    "Catalog",
    "CatalogCrossNote",
    "CatalogEntry",
    "CategoryOrigin",
    "CellCoordinate",
    "CellResolution",
    "CellState",
    "CollusionMatrix",
    "Coverage",
    "IncentiveGame",
    "ModelDocument",
    "ModelStats",
    "NetworkGraph",
    "PartySet",
    "RiskScore",
    "Role",
    "SecurityRequirement",
    "Store",
    "SystemModule",
    "ThreatCategory",
    "ThreatModel",
    "ThreatScenario",
    "ValidationReport",
    "apply_catalog",
    "cell_count",
    "compute_stats",
    "coverage",
    "default_catalog",
    "derive_categories",
    "derive_model_categories",
    "distilled_scenarios",
    "document",
    "eliminate",
    "export_report",
    "generate_matrix",
    "is_deterred",
    "load",
    "mark_category_excluded",
    "merge",
    "min_deposit",
    "new_document",
    "remove_asset",
    "remove_role",
    "render_matrix_text",
    "reopen",
    "save",
    "score_scenario",
    "upsert_asset",
    "upsert_module",
    "upsert_role",
    "validate_model",
]
