"""Replayable reference models: CompuCoin, Bitcoin, and a SPIFFE-shaped model.

Each fixture is an operation log. Folding the ops over an empty model
rebuilds the fixture deterministically, which is exactly how the test
suite, the `replay` CLI command, and the documentation examples use them.

``REFERENCE_TOTALS`` records published whole-model counts for systems
whose per-matrix role scopes are not public (Filecoin, CacheCash); those
ship as metadata with example scope assignments that reproduce the totals
through the cell-count formula, not as replayable models.
"""

from __future__ import annotations

import json
from pathlib import Path

from .categories import catalog_to_dict, default_catalog
from .store import ModelDocument, apply_operation, new_document

Op = tuple[str, dict]

#: Published model sizes. Bitcoin and the SPIFFE-shaped model are fully
#: reproducible below; Filecoin and CacheCash totals are reference metadata
#: with example per-matrix scope sizes consistent with the cell-count formula.
REFERENCE_TOTALS = {
    "bitcoin": {"matrices": 5, "total_cells": 105, "distilled_scenarios": 10},
    "filecoin": {
        "matrices": 14,
        "total_cells": 882,
        "distilled_scenarios": 35,
        "example_scope_sizes": [3, 3, 3, 3, 3, 3, 3, 2, 2, 2, 2, 2, 2, 2],
    },
    "cachecash": {
        "matrices": 9,
        "total_cells": 525,
        "distilled_scenarios": 22,
        "example_scope_sizes": [3, 3, 3, 3, 2, 2, 2, 2, 2],
    },
    "spiffe": {"matrices": 4, "total_cells": 1860, "distilled_scenarios": 65},
}

#: Expected coverage of the CompuCoin service-theft matrix after replay.
FIG3_EXPECTED = {"eliminated": 10, "merged": 10, "documented": 1, "unresolved": 0}

#: Expected whole-model stats of the fully triaged Bitcoin fixture.
BITCOIN_EXPECTED = {
    "matrices": 5,
    "total_cells": 105,
    "distilled_scenarios": 10,
    "eliminated": 28,
    "merged": 72,
    "documented": 5,
}


def _asset(name, requirements, description="", kind="concrete", tags=(), catalog_class=""):
    return (
        "upsert_asset",
        {
            "asset": {
                "name": name,
                "kind": kind,
                "description": description,
                "security_requirements": [
                    {"id": rid, "statement": statement} for rid, statement in requirements
                ],
                "instance_tags": list(tags),
                "catalog_class": catalog_class,
            }
        },
    )


def _derive_op() -> Op:
    return ("derive", {"catalog": catalog_to_dict(default_catalog())})


def _eliminations(matrix_id: str, cells: list[tuple[str, str]]) -> list[Op]:
    return [
        ("eliminate", {"matrix_id": matrix_id, "cell": cell, "rationale": why})
        for cell, why in cells
    ]


def _merges(matrix_id: str, cells: list[tuple[str, str, str]]) -> list[Op]:
    return [
        ("merge", {"matrix_id": matrix_id, "cell": cell, "into": into, "rationale": why})
        for cell, into, why in cells
    ]


def _document(matrix_id: str, cell: str, scenarios: list[dict]) -> Op:
    return ("document", {"matrix_id": matrix_id, "cell": cell, "scenarios": scenarios})


def _scenario(title, description, attackers, targets, assets, flow, pre=(), caps=()):
    return {
        "id": "",
        "title": title,
        "description": description,
        "attackers": attackers,
        "targets": targets,
        "asset_refs": list(assets),
        "action_flow": list(flow),
        "preconditions": list(pre),
        "capabilities": list(caps),
    }


# ---------------------------------------------------------------------------
# CompuCoin: computation-outsourcing cryptocurrency, the running example
# ---------------------------------------------------------------------------


def compucoin_ops() -> list[Op]:
    """Roles, assets, modules, assumptions, and dependencies of CompuCoin."""
    return [
        ("upsert_role", {"name": "client", "description": "Submits computation jobs and pays for correct results."}),
        ("upsert_role", {"name": "server", "description": "Performs outsourced computations for payment; servers also mine blocks."}),
        _asset(
            "service",
            [
                ("integrity", "Clients are served correctly: outsourced computations return correct results."),
                ("availability", "The service is available to legitimate users at any time."),
                ("confidentiality", "Service content and related data are not disclosed to unauthorized parties."),
                ("non-repudiation", "Servers are bound to the service they provide and clients to the service they receive."),
            ],
            description="Distributed computation outsourcing offered by servers.",
        ),
        _asset(
            "service payments",
            [
                ("proper-reward", "Servers are rewarded properly for the service they provide."),
                ("earned-payment", "Servers earn the payments they collect."),
            ],
            description="Currency paid by clients in exchange for the service.",
        ),
        _asset(
            "blockchain",
            [
                ("consistency", "Honest miners hold copies of the blockchain that share a common prefix and differ only in the unconfirmed suffix."),
                ("future-self-consistency", "The blockchain held by an honest party differs from its own earlier copies only in the unconfirmed suffix."),
                ("fairness", "Miners collect mining rewards in proportion to the resources they expend."),
                ("correctness", "All blocks within the longest branch of the blockchain are valid."),
                ("growth", "While the system is functional, new valid blocks keep being added to the blockchain."),
            ],
            description="The shared ledger; mining is proportional to service provided.",
        ),
        _asset(
            "transactions",
            [
                ("non-repudiation", "Transactions cannot be denied by their originators."),
                ("integrity", "Transaction fields cannot be manipulated after issuance."),
                ("validity", "Transactions recorded on the chain follow the system specification."),
                ("availability", "Users can send, receive, and view transactions at any time."),
                ("anonymity", "Transactions reveal nothing about the source, destination, or amount of transferred funds."),
            ],
            description="Signed token transfers exchanged in the system.",
        ),
        _asset(
            "currency",
            [("ownership", "Only the owner of currency tokens can spend them.")],
            description="The token itself as a store of value.",
        ),
        _asset(
            "network",
            [("availability", "The communication network reliably relays blocks, transactions, and service messages among the parties.")],
            description="The peer-to-peer network connecting all parties.",
        ),
        (
            "upsert_module",
            {
                "module": {
                    "name": "computation outsourcing",
                    "description": "A service session: a client buys one computation from one server.",
                    "asset_refs": ["service", "service payments"],
                    "network_model": {
                        "nodes": [
                            {"id": "client", "label": "client", "node_kind": "participant"},
                            {"id": "server", "label": "server", "node_kind": "participant"},
                            {"id": "service", "label": "service", "node_kind": "asset"},
                            {"id": "payments", "label": "service payments", "node_kind": "asset"},
                        ],
                        "edges": [
                            {"source": "client", "target": "server", "label": "job request"},
                            {"source": "server", "target": "client", "label": "results + proof"},
                            {"source": "client", "target": "payments", "label": "pay"},
                            {"source": "payments", "target": "server", "label": "collect"},
                            {"source": "server", "target": "service", "label": "provide"},
                        ],
                    },
                }
            },
        ),
        (
            "upsert_module",
            {
                "module": {
                    "name": "currency exchange medium",
                    "description": "Mining, consensus, and transaction relay.",
                    "asset_refs": ["blockchain", "transactions", "currency", "network"],
                    "network_model": {
                        "nodes": [
                            {"id": "client", "label": "client", "node_kind": "participant"},
                            {"id": "server", "label": "server", "node_kind": "participant"},
                            {"id": "chain", "label": "blockchain", "node_kind": "asset"},
                        ],
                        "edges": [
                            {"source": "client", "target": "chain", "label": "submit transactions"},
                            {"source": "server", "target": "chain", "label": "mine blocks"},
                        ],
                    },
                }
            },
        ),
        ("set_assumptions", {"assumptions": [
            "A majority of the mining power follows the protocol.",
            "Parties are rational and financially motivated.",
            "Anyone can join as a client or a server without permission.",
        ]}),
        ("set_dependencies", {"dependencies": [
            "A verifiable outsourced computation protocol supplying proofs of correctness.",
        ]}),
    ]


#: Category id of "service theft" after `derive` runs on the CompuCoin model
#: (assets are visited in model order, catalog entries in file order).
COMPUCOIN_SERVICE_THEFT = "c6"

_WHY_CLIENT_TARGET = (
    "A client does not provide a service to others; cells targeting the client "
    "are irrelevant to service theft."
)
_WHY_NO_PAYER = (
    "Neither servers nor externals ask or pay for the service; an external that "
    "joins as a client is covered under the client role."
)
_WHY_COMPOUND_TARGET = (
    "A client does not serve others; only the server side of the compound target "
    "is meaningful for service theft."
)
_WHY_NEEDS_CLIENT = (
    "Without the paying client in the collusion there is no payment session; the "
    "case only matters with the client included."
)
_WHY_SOLO_CLIENT = (
    "Only the client pays for the service it receives; colluding servers or "
    "externals can merely drop or withhold payments, which is covered under the "
    "DoS threat. The case reduces to the client as a sole attacker."
)


def fig3_triage_ops(matrix_id: str = "m1") -> list[Op]:
    """The recorded service-theft triage: 10 eliminations, 10 merges, 1 documentation."""
    ops: list[Op] = []
    ops += _eliminations(
        matrix_id,
        [(f"{a}->client", _WHY_CLIENT_TARGET) for a in (
            "client", "server", "external", "client+server",
            "client+external", "server+external", "client+server+external",
        )]
        + [
            ("server->server", _WHY_NO_PAYER),
            ("external->server", _WHY_NO_PAYER),
            ("server+external->server", _WHY_NO_PAYER),
        ],
    )
    ops += _merges(
        matrix_id,
        [
            ("server->client+server", "client+server->client+server", _WHY_NEEDS_CLIENT),
            ("external->client+server", "client+external->client+server", _WHY_NEEDS_CLIENT),
            ("server+external->client+server", "client+server+external->client+server", _WHY_NEEDS_CLIENT),
            ("client->client+server", "client->server", _WHY_COMPOUND_TARGET),
            ("client+server->client+server", "client+server->server", _WHY_COMPOUND_TARGET),
            ("client+external->client+server", "client+external->server", _WHY_COMPOUND_TARGET),
            ("client+server+external->client+server", "client+server+external->server", _WHY_COMPOUND_TARGET),
            ("client+server->server", "client->server", _WHY_SOLO_CLIENT),
            ("client+external->server", "client->server", _WHY_SOLO_CLIENT),
            ("client+server+external->server", "client->server", _WHY_SOLO_CLIENT),
        ],
    )
    ops.append(
        _document(
            matrix_id,
            "client->server",
            [
                _scenario(
                    "Underpayment for correct results",
                    "A client receives correct computation results but settles for "
                    "less than the agreed amount, leaving the server underpaid for "
                    "work already delivered.",
                    "client",
                    "server",
                    ["service payments"],
                    [
                        "Client submits a computation job and agrees on a price.",
                        "Server computes the job and returns results with a proof of correctness.",
                        "Client issues a payment below the agreed amount and refuses to settle the difference.",
                    ],
                    pre=["Payment settlement is not atomic with result delivery."],
                    caps=["Ability to issue payment transactions."],
                ),
                _scenario(
                    "Unredeemable payment token",
                    "A client pays for correct service with a malformed or unfunded "
                    "payment that carries its signature but cannot be redeemed by "
                    "the server.",
                    "client",
                    "server",
                    ["service payments"],
                    [
                        "Client submits a computation job and agrees on a price.",
                        "Server returns correct results.",
                        "Client hands over a payment token that fails redemption (unfunded or malformed).",
                    ],
                    pre=["Servers cannot fully validate payment redeemability before releasing results."],
                    caps=["Ability to craft payment transactions."],
                ),
            ],
        )
    )
    return ops


def compucoin_document(triaged: bool = False) -> ModelDocument:
    """The CompuCoin model; with ``triaged`` the service-theft matrix is resolved."""
    ops = compucoin_ops()
    if triaged:
        ops = ops + [
            _derive_op(),
            ("generate_matrix", {"category_id": COMPUCOIN_SERVICE_THEFT, "scope": None}),
            *fig3_triage_ops("m1"),
        ]
    return build_document("CompuCoin", ops)


# ---------------------------------------------------------------------------
# Bitcoin: currency exchange only, two roles, five matrices
# ---------------------------------------------------------------------------


def bitcoin_setup_ops() -> list[Op]:
    ops: list[Op] = [
        ("upsert_role", {"name": "miner", "description": "Maintains the blockchain by expending mining resources."}),
        ("upsert_role", {"name": "client", "description": "Holds currency and issues transactions."}),
        _asset(
            "blockchain",
            [
                ("consistency", "Honest miners hold copies of the blockchain that share a common prefix and differ only in the unconfirmed suffix."),
                ("future-self-consistency", "The blockchain held by an honest party differs from its own earlier copies only in the unconfirmed suffix."),
                ("fairness", "Miners collect mining rewards in proportion to the resources they expend."),
                ("correctness", "All blocks within the longest branch of the blockchain are valid."),
                ("growth", "While the system is functional, new valid blocks keep being added to the blockchain."),
            ],
            description="The proof-of-work ledger.",
        ),
        _asset(
            "transactions",
            [
                ("non-repudiation", "Transactions cannot be denied by their originators."),
                ("integrity", "Transaction fields cannot be manipulated after issuance."),
                ("validity", "Transactions recorded on the chain follow the system specification."),
                ("availability", "Users can send, receive, and view transactions at any time."),
                ("anonymity", "Transactions reveal nothing about the source, destination, or amount of transferred funds."),
            ],
            description="Signed transfers of coins.",
        ),
        _asset(
            "currency",
            [("ownership", "Only the owner of coins can spend them.")],
            description="The coins themselves.",
        ),
        _asset(
            "network",
            [("availability", "The peer-to-peer network reliably relays blocks and transactions.")],
            description="The gossip network connecting all parties.",
        ),
        (
            "upsert_module",
            {
                "module": {
                    "name": "currency exchange",
                    "description": "Transaction issuance, relay, and mining.",
                    "asset_refs": ["blockchain", "transactions", "currency", "network"],
                    "network_model": {
                        "nodes": [
                            {"id": "miner", "label": "miner", "node_kind": "participant"},
                            {"id": "client", "label": "client", "node_kind": "participant"},
                            {"id": "chain", "label": "blockchain", "node_kind": "asset"},
                        ],
                        "edges": [
                            {"source": "client", "target": "chain", "label": "submit transactions"},
                            {"source": "miner", "target": "chain", "label": "append blocks"},
                        ],
                    },
                }
            },
        ),
        ("set_assumptions", {"assumptions": [
            "A majority of the mining power follows the protocol.",
            "All transactions are signed by their originators.",
        ]}),
        ("set_dependencies", {"dependencies": [
            "A peer-to-peer gossip network connecting the parties.",
        ]}),
        _derive_op(),
        # Categories after derive: c1 inconsistency, c2 invalid block adoption,
        # c3 biased mining, c4 tx repudiation, c5 tx tampering,
        # c6 deanonymization, c7 currency theft, c8 network DoS.
        ("exclude_category", {"category_id": "c4", "rationale": "All transactions are signed by their originators, so issuance cannot be denied."}),
        ("exclude_category", {"category_id": "c5", "rationale": "Transaction signatures make undetected manipulation of signed fields infeasible."}),
        ("exclude_category", {"category_id": "c3", "rationale": "Mining requires verifiable proof of work; the expenditure cannot be faked, so block election cannot be biased without real resources."}),
        ("generate_matrix", {"category_id": "c1", "scope": None}),
        ("generate_matrix", {"category_id": "c2", "scope": None}),
        ("generate_matrix", {"category_id": "c6", "scope": None}),
        ("generate_matrix", {"category_id": "c7", "scope": None}),
        ("generate_matrix", {"category_id": "c8", "scope": None}),
    ]
    return ops


_ALL_ATTACKERS = (
    "client", "miner", "external", "client+miner",
    "client+external", "miner+external", "client+miner+external",
)
_POWERLESS = ("client", "external", "client+external")
_MINER_COLLUSIONS = ("client+miner", "miner+external", "client+miner+external")
_INSIDERS = (
    "client", "miner", "client+miner",
    "client+external", "miner+external", "client+miner+external",
)


def _mining_power_triage(matrix_id, why_client_target, why_powerless, why_collusion, scenarios):
    """Shared shape of the two blockchain matrices: only miners hold the power."""
    ops = _eliminations(
        matrix_id,
        [(f"{a}->client", why_client_target) for a in _ALL_ATTACKERS]
        + [(f"{a}->miner", why_powerless) for a in _POWERLESS]
        + [(f"{a}->client+miner", why_powerless) for a in _POWERLESS],
    )
    ops += _merges(
        matrix_id,
        [(f"{a}->miner", "miner->miner", why_collusion) for a in _MINER_COLLUSIONS]
        + [(f"{a}->client+miner", "miner->client+miner", why_collusion) for a in _MINER_COLLUSIONS]
        + [(
            "miner->client+miner",
            "miner->miner",
            "A fork disrupts the views of all parties at once; the compound target adds nothing beyond the miner target.",
        )],
    )
    ops.append(_document(matrix_id, "miner->miner", scenarios))
    return ops


def bitcoin_triage_ops() -> list[Op]:
    """Fully resolves all five Bitcoin matrices into ten distilled scenarios."""
    ops: list[Op] = []

    ops += _mining_power_triage(
        "m1",
        "Consistency is a property of the miner-maintained ledger; a client holds no authoritative copy to diverge.",
        "Forking the ledger requires mining power, which clients and externals lack.",
        "Colluding clients or externals add no mining power; the case reduces to miners acting alone.",
        [
            _scenario(
                "Majority hashpower fork",
                "Miners controlling a majority of the hashpower privately extend "
                "an alternative branch and release it later, replacing recently "
                "confirmed blocks and splitting honest miners' views beyond the "
                "confirmation depth.",
                "miner", "miner", ["blockchain"],
                [
                    "Colluding miners accumulate a majority of the hashpower.",
                    "They mine a private branch while the public branch grows.",
                    "They publish the longer private branch, forcing a reorganization.",
                ],
                pre=["Mining power is concentrated enough to coordinate a majority."],
                caps=["Majority of total hashpower."],
            ),
            _scenario(
                "Selfish block withholding",
                "A miner coalition withholds newly found blocks and releases them "
                "strategically, keeping honest miners on competing branches and "
                "degrading prefix agreement.",
                "miner", "miner", ["blockchain"],
                [
                    "Coalition finds a block and withholds it.",
                    "Honest miners keep extending the public branch.",
                    "Coalition releases withheld blocks to orphan honest work.",
                ],
                pre=["Coalition controls a substantial hashpower share (around a third suffices)."],
                caps=["Large minority of hashpower", "Fast block propagation"],
            ),
        ],
    )

    ops += _mining_power_triage(
        "m2",
        "Clients adopt the chain served by honest miners; invalid blocks live or die in the miner-maintained copies.",
        "Appending blocks requires mining power, which clients and externals lack.",
        "Colluding clients or externals add no mining power; the case reduces to miners acting alone.",
        [
            _scenario(
                "Invalid block burial",
                "Miners with a hashpower majority append a block that breaks the "
                "validation rules and keep extending on top of it until it is "
                "buried beyond the confirmation depth.",
                "miner", "miner", ["blockchain"],
                [
                    "Colluding miners mine a block containing invalid transactions.",
                    "They keep extending the branch holding the invalid block.",
                    "Nodes that skip deep validation accept the longest branch.",
                ],
                pre=["A hashpower majority colludes, or enough nodes skip full validation."],
                caps=["Majority of total hashpower."],
            ),
            _scenario(
                "Validation-skipping propagation",
                "Miners skip full block validation to start mining on new blocks "
                "sooner, letting a malformed block propagate and be extended "
                "before it is rejected.",
                "miner", "miner", ["blockchain"],
                [
                    "A miner broadcasts a block with an invalid transaction.",
                    "Other miners mine on its header without validating the body.",
                    "The malformed block gathers confirmations before detection.",
                ],
                pre=["A meaningful share of miners mine on unvalidated headers."],
                caps=["Ability to craft and broadcast blocks."],
            ),
        ],
    )

    # m3: deanonymization of the public ledger.
    why_public = (
        "The ledger is public; insiders and collusion add no linkage power over "
        "an external observer running the same analysis."
    )
    ops += _merges(
        "m3",
        [(f"{a}->{t}", f"external->{t}", why_public)
         for t in ("client", "miner", "client+miner") for a in _INSIDERS]
        + [
            ("external->miner", "external->client",
             "Miners transact through the same key-controlled addresses as clients; the same clustering analysis applies."),
            ("external->client+miner", "external->client",
             "Linking both parties at once is the per-party analysis applied twice."),
        ],
    )
    ops.append(
        _document(
            "m3",
            "external->client",
            [
                _scenario(
                    "Address clustering",
                    "An observer clusters addresses by co-spending patterns and "
                    "change heuristics, linking a user's transactions and exposing "
                    "their activity and balances.",
                    "external", "client", ["transactions"],
                    [
                        "Observer downloads the public ledger.",
                        "Addresses co-spent in one transaction are clustered as one owner.",
                        "Clusters are joined with known tagged addresses to name the owner.",
                    ],
                    pre=["Users reuse addresses or co-spend outputs."],
                    caps=["Access to the public ledger."],
                ),
                _scenario(
                    "Network-layer origin correlation",
                    "An observer connects to many relay nodes and correlates the "
                    "first appearance of a transaction with the IP address that "
                    "announced it, tying transactions to network identities.",
                    "external", "client", ["transactions", "network"],
                    [
                        "Observer opens connections to a large share of relay nodes.",
                        "Transaction announcements are timestamped per peer.",
                        "First-relayer analysis maps transactions to origin IPs.",
                    ],
                    pre=["Transactions are relayed without network-layer anonymization."],
                    caps=["Many concurrent network vantage points."],
                ),
            ],
        )
    )

    # m4: currency theft.
    why_theft = (
        "Theft power comes from key compromise or fraudulent spends, equally "
        "available to any attacker; collusion adds nothing."
    )
    ops += _eliminations(
        "m4",
        [
            ("client->client", "A party does not steal from itself."),
            ("miner->miner", "A party does not steal from itself."),
        ],
    )
    ops += _merges(
        "m4",
        [(f"{a}->client", "external->client", why_theft)
         for a in ("miner", "client+miner", "client+external", "miner+external", "client+miner+external")]
        + [(f"{a}->miner", "external->miner", why_theft)
           for a in ("client", "client+miner", "client+external", "miner+external", "client+miner+external")]
        + [(f"{a}->client+miner", "external->client+miner", why_theft) for a in _INSIDERS]
        + [
            ("external->miner", "external->client",
             "Miners hold their funds in the same key-controlled addresses as clients."),
            ("external->client+miner", "external->client",
             "Stealing from both parties at once is the single-victim case repeated."),
        ],
    )
    ops.append(
        _document(
            "m4",
            "external->client",
            [
                _scenario(
                    "Wallet key exfiltration",
                    "An attacker steals a victim's private keys through malware or "
                    "a compromised wallet service and transfers the coins to "
                    "addresses under the attacker's control.",
                    "external", "client", ["currency"],
                    [
                        "Attacker compromises the machine or service holding the keys.",
                        "Keys are exfiltrated.",
                        "Coins are swept to attacker addresses.",
                    ],
                    pre=["Keys are stored on a reachable, compromisable system."],
                    caps=["Malware delivery or service compromise."],
                ),
                _scenario(
                    "Double-spend against a payee",
                    "An attacker pays a victim, receives the goods, then gets a "
                    "conflicting transaction confirmed that returns the coins, "
                    "leaving the payee unpaid.",
                    "external", "client", ["currency", "transactions"],
                    [
                        "Attacker sends a payment to the victim and takes delivery.",
                        "Attacker broadcasts a conflicting spend of the same coins.",
                        "The conflicting spend is the one that gets confirmed.",
                    ],
                    pre=["The victim accepts payment with few or zero confirmations."],
                    caps=["Ability to broadcast conflicting transactions quickly."],
                ),
            ],
        )
    )

    # m5: denial of service against the network.
    why_partition = "Isolating one role is subsumed by partitioning the network as a whole."
    why_capacity = (
        "Flooding and eclipse capability is a function of network position, not "
        "membership; insider collusion adds bandwidth, not capability."
    )
    ops += _merges(
        "m5",
        [(f"{a}->{t}", f"{a}->client+miner", why_partition)
         for t in ("client", "miner") for a in _ALL_ATTACKERS]
        + [(f"{a}->client+miner", "external->client+miner", why_capacity) for a in _INSIDERS],
    )
    ops.append(
        _document(
            "m5",
            "external->client+miner",
            [
                _scenario(
                    "Eclipse attack",
                    "An attacker monopolizes a victim's peer connections, isolating "
                    "it from the honest network and controlling its view of blocks "
                    "and transactions.",
                    "external", "client+miner", ["network"],
                    [
                        "Attacker floods the victim's peer table with attacker addresses.",
                        "Victim restarts and connects only to attacker nodes.",
                        "Attacker filters and delays what the victim sends and receives.",
                    ],
                    pre=["Victim accepts inbound peers from unauthenticated addresses."],
                    caps=["Many IP addresses across address ranges."],
                ),
                _scenario(
                    "Relay flooding",
                    "An attacker saturates the gossip network with cheap messages "
                    "or dust transactions, delaying block and transaction "
                    "propagation for everyone.",
                    "external", "client+miner", ["network"],
                    [
                        "Attacker generates large volumes of low-cost traffic.",
                        "Relay queues and mempools fill up.",
                        "Propagation latency grows and legitimate traffic is dropped.",
                    ],
                    pre=["Relay and mempool admission is cheap relative to attacker resources."],
                    caps=["Sustained bandwidth and fee budget."],
                ),
            ],
        )
    )
    return ops


def bitcoin_document(triaged: bool = True) -> ModelDocument:
    ops = bitcoin_setup_ops()
    if triaged:
        ops = ops + bitcoin_triage_ops()
    return build_document("Bitcoin", ops)


# ---------------------------------------------------------------------------
# SPIFFE-shaped model: four roles, four full-scope matrices
# ---------------------------------------------------------------------------


def spiffe_shaped_ops() -> list[Op]:
    reqs = [
        ("authenticity", "Issued identities attest exactly the workload they name."),
        ("credential-secrecy", "Identity documents and their keys stay under the control of the named workload."),
        ("platform-integrity", "Identity-issuing components execute only their intended code."),
        ("availability", "Workloads can obtain and renew identities whenever they need them."),
    ]
    ops: list[Op] = [
        ("upsert_role", {"name": "identity-server", "description": "Mints identity documents."}),
        ("upsert_role", {"name": "node-agent", "description": "Attests workloads and distributes identities."}),
        ("upsert_role", {"name": "local-workload", "description": "A workload on the same node as its agent."}),
        ("upsert_role", {"name": "remote-workload", "description": "A workload on a different node."}),
        _asset(
            "workload identity",
            reqs,
            description="The identity documents that authenticate workloads to each other.",
        ),
        ("set_assumptions", {"assumptions": ["The platform's attestation primitives function as specified."]}),
        ("set_dependencies", {"dependencies": ["A cloud platform exposing node and workload metadata."]}),
        _derive_op(),
    ]
    for cid in ("c1", "c2", "c3", "c4"):
        ops.append(("generate_matrix", {"category_id": cid, "scope": None}))
    return ops


def spiffe_shaped_document() -> ModelDocument:
    return build_document("SPIFFE-shaped", spiffe_shaped_ops())


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def build_document(name: str, ops: list[Op]) -> ModelDocument:
    doc = new_document(name)
    for operation, arguments in ops:
        doc = apply_operation(doc, operation, arguments)
    return doc


def write_log(path: str | Path, ops: list[Op]) -> None:
    """Write an operation log in the format the `replay` command reads."""
    payload = {"ops": [{"operation": op, "arguments": args} for op, args in ops]}
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_log(path: str | Path) -> list[Op]:
    data = json.loads(Path(path).read_text("utf-8"))
    entries = data["ops"] if isinstance(data, dict) else data
    return [(e["operation"], e["arguments"]) for e in entries]
