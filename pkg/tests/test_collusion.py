"""Collusion matrix enumeration and triage lifecycle."""

from __future__ import annotations

from itertools import combinations

import pytest

from threatbench import fixtures
from threatbench.collusion import (
    CellCoordinate,
    CellState,
    PartySet,
    cell_count,
    coverage,
    distilled_scenarios,
    document,
    eliminate,
    enumerate_cells,
    generate_matrix,
    merge,
    reopen,
)
from threatbench.errors import (
    CategoryExcluded,
    DanglingMergeChain,
    DuplicateMatrixForCategoryInstance,
    EmptyRationale,
    EmptyScenarioList,
    EmptyScope,
    InvariantViolation,
    MatrixIncomplete,
    MergeCycle,
    MergeIntoEliminated,
    MergeIntoMerged,
    NotUnresolved,
    ParseError,
    PartyMismatch,
    SelfMerge,
)
from threatbench.store import replay_log


def brute_force_cell_count(n: int) -> int:
    """Independent oracle: enumerate both axes explicitly and multiply."""
    roles = [f"r{i}" for i in range(n)]
    attacker_space = roles + ["external"]
    attackers = [
        s for k in range(1, len(attacker_space) + 1) for s in combinations(attacker_space, k)
    ]
    targets = [s for k in range(1, len(roles) + 1) for s in combinations(roles, k)]
    return len(attackers) * len(targets)


# Frozen from brute_force_cell_count before cell_count existed.
FROZEN_COUNTS = {1: 3, 2: 21, 3: 105, 4: 465, 5: 1953}


@pytest.mark.parametrize("n,expected", sorted(FROZEN_COUNTS.items()))
def test_cell_count_frozen(n, expected):
    assert cell_count(n) == expected
    assert brute_force_cell_count(n) == expected


def test_cell_count_matches_oracle_up_to_eight():
    for n in range(1, 9):
        assert cell_count(n) == brute_force_cell_count(n)


def test_cell_count_rejects_zero():
    with pytest.raises(EmptyScope):
        cell_count(0)


def test_enumerate_cells_order_n2():
    coords = enumerate_cells(("server", "client"))
    attackers = []
    for c in coords:
        if str(c.attackers) not in attackers:
            attackers.append(str(c.attackers))
    assert attackers == [
        "client",
        "server",
        "external",
        "client+server",
        "client+external",
        "server+external",
        "client+server+external",
    ]
    targets = [str(c.targets) for c in coords[:3]]
    assert targets == ["client", "server", "client+server"]
    assert len(coords) == 21
    assert len(set(coords)) == 21


def test_party_set_canonicalizes():
    ps = PartySet(("server", "client", "client"))
    assert ps.roles == ("client", "server")
    assert str(ps) == "client+server"
    assert str(PartySet(("b",), includes_external=True)) == "b+external"


def test_party_set_rejects_empty_and_external_role():
    with pytest.raises(InvariantViolation):
        PartySet(())
    with pytest.raises(InvariantViolation):
        PartySet(("external",))


def test_cell_id_round_trip():
    text = "client+external->server"
    coord = CellCoordinate.parse(text)
    assert str(coord) == text
    assert coord.attackers.includes_external
    assert coord.targets.roles == ("server",)


@pytest.mark.parametrize(
    "bad",
    [
        "client->",
        "->server",
        "client",
        "client->server->client",
        "server+client->server",  # not sorted
        "client+client->server",  # duplicate
        "external+client->server",  # external not last
        "client->external",  # external target (InvariantViolation, tested below)
    ],
)
def test_cell_id_grammar_rejects(bad):
    if bad == "client->external":
        with pytest.raises(InvariantViolation):
            CellCoordinate.parse(bad)
    else:
        with pytest.raises(ParseError):
            CellCoordinate.parse(bad)


def test_external_never_a_target():
    with pytest.raises(InvariantViolation):
        CellCoordinate(PartySet(("client",)), PartySet((), includes_external=True))


# ---------------------------------------------------------------------------
# Generation and triage against the CompuCoin fixture
# ---------------------------------------------------------------------------


def _theft_model(compucoin_doc):
    from threatbench.categories import default_catalog, derive_model_categories

    model = derive_model_categories(compucoin_doc.model, default_catalog())
    return generate_matrix(model, fixtures.COMPUCOIN_SERVICE_THEFT)


def test_generate_matrix_service_theft(compucoin_doc):
    model = _theft_model(compucoin_doc)
    matrix = model.matrix("m1")
    assert len(matrix.cells) == 21
    assert all(res.state is CellState.UNRESOLVED for res in matrix.cells.values())
    cov = coverage(matrix)
    assert (cov.total, cov.unresolved, cov.eliminated, cov.merged, cov.documented) == (
        21, 21, 0, 0, 0,
    )
    assert cov.fraction_resolved == 0.0


def test_generate_matrix_guards(compucoin_doc):
    from threatbench.categories import default_catalog, derive_model_categories, mark_category_excluded

    model = derive_model_categories(compucoin_doc.model, default_catalog())
    with pytest.raises(EmptyScope):
        generate_matrix(model, fixtures.COMPUCOIN_SERVICE_THEFT, ())
    model2 = generate_matrix(model, fixtures.COMPUCOIN_SERVICE_THEFT)
    with pytest.raises(DuplicateMatrixForCategoryInstance):
        generate_matrix(model2, fixtures.COMPUCOIN_SERVICE_THEFT)
    excluded = mark_category_excluded(model, "c10", "transactions are signed by their originators")
    with pytest.raises(CategoryExcluded):
        generate_matrix(excluded, "c10")


def _coord(text: str) -> CellCoordinate:
    return CellCoordinate.parse(text)


def test_eliminate_and_guards(compucoin_doc):
    model = _theft_model(compucoin_doc)
    model = eliminate(model, "m1", _coord("client->client"), "a client does not serve others")
    assert model.matrix("m1").cells[_coord("client->client")].state is CellState.ELIMINATED
    with pytest.raises(NotUnresolved):
        eliminate(model, "m1", _coord("client->client"), "again")
    with pytest.raises(EmptyRationale):
        eliminate(model, "m1", _coord("server->client"), "   ")
    # only the one cell changed
    others = [c for c in model.matrix("m1").cells.values() if c.state is not CellState.UNRESOLVED]
    assert len(others) == 1


def test_merge_semantics(compucoin_doc):
    model = _theft_model(compucoin_doc)
    a = _coord("client+server->server")
    b = _coord("client->server")
    model = merge(model, "m1", a, b, "only the client pays for the service")
    res = model.matrix("m1").cells[a]
    assert res.state is CellState.MERGED and res.merge_target == b
    with pytest.raises(MergeCycle):
        merge(model, "m1", b, a, "reverse")
    with pytest.raises(SelfMerge):
        merge(model, "m1", b, b, "self")
    model = eliminate(model, "m1", _coord("server->server"), "servers do not pay")
    with pytest.raises(MergeIntoEliminated):
        merge(model, "m1", _coord("external->server"), _coord("server->server"), "covered")
    with pytest.raises(MergeIntoMerged):
        merge(model, "m1", _coord("external->server"), a, "chain into merged")
    with pytest.raises(NotUnresolved):
        merge(model, "m1", a, b, "twice")


def _scenario(attackers="client", targets="server"):
    from threatbench.collusion import ThreatScenario

    return ThreatScenario(
        id="",
        title="underpayment",
        description="client pays less than agreed",
        attackers=PartySet.parse(attackers),
        targets=PartySet.parse(targets),
        asset_refs=("service payments",),
        action_flow=("request", "compute", "underpay"),
    )


def test_document_and_guards(compucoin_doc):
    model = _theft_model(compucoin_doc)
    cell = _coord("client->server")
    with pytest.raises(EmptyScenarioList):
        document(model, "m1", cell, [])
    with pytest.raises(PartyMismatch):
        document(model, "m1", cell, [_scenario(attackers="client+server")])
    model = document(model, "m1", cell, [_scenario(), _scenario()])
    res = model.matrix("m1").cells[cell]
    assert res.state is CellState.DOCUMENTED
    assert res.scenario_refs == ("s1", "s2")
    assert [s.id for s in model.scenarios] == ["s1", "s2"]
    assert model.scenarios[0].source_cells == (("m1", cell),)
    with pytest.raises(NotUnresolved):
        document(model, "m1", cell, [_scenario()])


def test_document_allows_parties_widened_by_merge(compucoin_doc):
    model = _theft_model(compucoin_doc)
    cell = _coord("client->server")
    model = merge(model, "m1", _coord("client+server->server"), cell, "collusion adds nothing")
    model = document(model, "m1", cell, [_scenario(attackers="client+server")])
    assert model.matrix("m1").cells[cell].state is CellState.DOCUMENTED


def test_fig3_replay_counts(compucoin_triaged):
    matrix = compucoin_triaged.model.matrix("m1")
    cov = coverage(matrix)
    assert (cov.eliminated, cov.merged, cov.documented, cov.unresolved) == (10, 10, 1, 0)
    assert cov.fraction_resolved == 1.0
    scenarios = distilled_scenarios(compucoin_triaged.model, "m1")
    assert [s.id for s in scenarios] == ["s1", "s2"]


def test_distill_requires_completion(compucoin_doc):
    model = _theft_model(compucoin_doc)
    with pytest.raises(MatrixIncomplete):
        distilled_scenarios(model, "m1")


def test_merge_chains_terminate_at_documented(compucoin_triaged):
    from threatbench.collusion import chain_terminus

    matrix = compucoin_triaged.model.matrix("m1")
    for coord, res in matrix.cells.items():
        if res.state is CellState.MERGED:
            terminus = chain_terminus(matrix, coord)
            assert matrix.cells[terminus].state is CellState.DOCUMENTED


def test_reopen_then_eliminate_dangles_the_chain(compucoin_triaged):
    model = compucoin_triaged.model
    cell = _coord("client->server")
    model = reopen(model, "m1", cell, "revisiting the solo-client case")
    assert model.matrix("m1").cells[cell].state is CellState.UNRESOLVED
    assert model.scenarios == ()  # both scenarios lost their only source
    model = eliminate(model, "m1", cell, "suppose it were ruled out")
    with pytest.raises(DanglingMergeChain):
        distilled_scenarios(model, "m1")


def test_replay_determinism_of_fixture_log():
    ops = (
        fixtures.compucoin_ops()
        + [("derive", fixtures._derive_op()[1]),
           ("generate_matrix", {"category_id": fixtures.COMPUCOIN_SERVICE_THEFT, "scope": None})]
        + fixtures.fig3_triage_ops("m1")
    )
    first = replay_log("CompuCoin", ops)
    second = replay_log("CompuCoin", ops)
    from threatbench.serialize import model_to_dict

    assert model_to_dict(first) == model_to_dict(second)
    cov = coverage(first.matrix("m1"))
    assert (cov.eliminated, cov.merged, cov.documented) == (10, 10, 1)
