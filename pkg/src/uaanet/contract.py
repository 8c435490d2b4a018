"""Single-transaction data-sending contract.

Lifecycle: do_trans opens the one allowed in-flight transfer and escrows
the source's original ciphertext as the tamper reference; willing nodes
register coordinates (intermediary UAVs stake a 1-ether guarantee);
build_route runs BFS over the registered coordinates; send moves the
ciphertext hop by hop, writing what each node received into its route
cell; the destination settles with success (refunds, then appreciation
via trans_completed) or unsuccessful (culprit attribution, forfeiture,
escalation). abort is the GCS-only reset that also removes nodes past
the blacklist threshold.

Every mutation happens on the engine's tick thread; given the same
ordered call sequence the contract reaches the same state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import routing
from .ledger import ETHER, Ledger
from .registry import Registry, UnknownNode, WrongDeposit

GUARANTEE = 1 * ETHER


class ContractError(Exception):
    pass


class TransactionInProgress(ContractError):
    pass


class SelfSend(ContractError):
    pass


class SenderFaulty(ContractError):
    pass


class Unregistered(ContractError):
    pass


class NoActiveTransaction(ContractError):
    pass


class NodeFaulty(ContractError):
    pass


class NotYourTurn(ContractError):
    pass


class TransactionClosed(ContractError):
    pass


class NotDestination(ContractError):
    pass


class NotSource(ContractError):
    pass


class NotSuccessful(ContractError):
    pass


class NoCulpritFound(ContractError):
    pass


class OutOfRange(ContractError):
    pass


class NotGCS(ContractError):
    pass


class FailureReason(enum.Enum):
    TIMEOUT = "timeout"
    BAD_DECRYPT = "bad_decrypt"


@dataclass
class HopRecord:
    """Per-route-position ledger cell: what this node received and when."""

    node: str
    data: bytes | None = None
    timestamp: float | None = None
    deposit_held: int = 0


@dataclass
class ActiveTransaction:
    source: str
    destination: str
    start_timestamp: float
    reference_ciphertext: bytes  # the source's escrowed original copy
    active: bool = True
    route: list[HopRecord] = field(default_factory=list)
    count: int = 0  # next forwarding index
    successful: bool = False
    culprit: str | None = None
    participants: list[str] = field(default_factory=list)
    deposits: dict[str, int] = field(default_factory=dict)


@dataclass
class AbortReport:
    voided_transaction: bool
    refunded: dict[str, int]
    removed: list[str]


class DataContract:
    def __init__(self, ledger: Ledger, registry: Registry, guarantee: int = GUARANTEE):
        self.ledger = ledger
        self.registry = registry
        self.guarantee = guarantee
        self.tx: ActiveTransaction | None = None
        self.last_closed: ActiveTransaction | None = None
        self.route_table: dict[str, list[str]] = {}

    # -- lifecycle ---------------------------------------------------------

    def do_trans(self, sender: str, dest: str, payload: bytes, now: float) -> None:
        if self.tx is not None and self.tx.active:
            raise TransactionInProgress("a transaction is already active")
        if sender == dest:
            raise SelfSend(sender)
        for addr in (sender, dest):
            if addr not in self.registry.records:
                raise Unregistered(addr)
        if self.registry.records[sender].faulty:
            raise SenderFaulty(sender)
        if self.registry.records[dest].faulty:
            raise NodeFaulty(dest)
        self.tx = ActiveTransaction(
            source=sender, destination=dest,
            start_timestamp=now, reference_ciphertext=payload,
        )

    def register_coordinates(
        self, addr: str, x: float, y: float, z: float, deposit: int
    ) -> int:
        """Record a willing node's coordinates for this transaction.

        Intermediary UAVs stake exactly one guarantee; the source, the
        destination and GCS nodes stake nothing. Returns the amount held.
        """
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        if tx.route:
            raise NoActiveTransaction("participation window closed")
        rec = self.registry.records.get(addr)
        if rec is None:
            raise Unregistered(addr)
        if rec.faulty:
            raise NodeFaulty(addr)
        exempt = (
            rec.is_gcs
            or addr == tx.source
            or addr == tx.destination
            or addr in tx.deposits
        )
        required = 0 if exempt else self.guarantee
        if deposit != required:
            raise WrongDeposit(f"guarantee for {addr} is {required} mEth, got {deposit}")
        if deposit:
            self.ledger.transfer(addr, self.ledger.escrow, deposit)
            tx.deposits[addr] = deposit
        rec.x, rec.y, rec.z = x, y, z
        rec.participating = True
        if addr not in tx.participants:
            tx.participants.append(addr)
        return deposit

    def build_route(self, range_m: float) -> list[str]:
        """BFS over the registered coordinates; installs the hop ledger.

        Raises routing.NoRouteFound when source and destination are
        disconnected; the caller decides whether to void the transaction.
        """
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        if tx.route:
            raise TransactionClosed("route already built")
        records = [self.registry.records[a] for a in tx.participants]
        self.route_table = routing.update_graph(records, range_m)
        path = routing.path_find(self.route_table, tx.source, tx.destination)
        tx.route = [
            HopRecord(node=a, deposit_held=tx.deposits.get(a, 0)) for a in path
        ]
        tx.count = 0
        return path

    def send(self, caller: str, data: bytes, now: float) -> int:
        """Forward data into the next route cell; returns the receiver index.

        Each node gets exactly one turn (route[count]); anything else is
        refused, which is the single-forward flooding guard.
        """
        tx = self.tx
        if tx is None or not tx.active or not tx.route:
            raise TransactionClosed("no open route")
        if caller != tx.route[tx.count].node:
            raise NotYourTurn(caller)
        if tx.count == 0:
            tx.route[0].data = data
            tx.route[0].timestamp = now
        if tx.count + 1 > len(tx.route) - 1:
            return tx.count  # destination holds the final cell; nothing to forward
        tx.count += 1
        tx.route[tx.count].data = data
        tx.route[tx.count].timestamp = now
        return tx.count

    # -- settlement --------------------------------------------------------

    def _refund_deposits(self, exclude: str | None = None) -> dict[str, int]:
        tx = self.tx
        assert tx is not None
        refunded: dict[str, int] = {}
        for addr in list(tx.deposits):
            if addr == exclude:
                continue  # forfeited; stays in escrow
            amount = tx.deposits.pop(addr)
            self.ledger.transfer(self.ledger.escrow, addr, amount)
            refunded[addr] = amount
        return refunded

    def _close(self) -> None:
        tx = self.tx
        assert tx is not None
        tx.active = False
        for addr in tx.participants:
            rec = self.registry.records.get(addr)
            if rec is not None:
                rec.participating = False
        self.last_closed = tx

    def success(self, caller: str) -> dict[str, int]:
        """Destination-only settlement of a clean delivery; returns the
        guarantee refunds paid out."""
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        if caller != tx.destination:
            raise NotDestination(caller)
        if tx.successful:
            raise TransactionClosed("already settled")
        tx.successful = True
        return self._refund_deposits()

    def trans_completed(self, caller: str, appreciation: int) -> dict[str, int]:
        """Source-only appreciation payout; closes the transaction."""
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        if caller != tx.source:
            raise NotSource(caller)
        if not tx.successful:
            raise NotSuccessful("transaction not flagged successful")
        intermediaries = [h.node for h in tx.route[1:-1]]
        total = appreciation * len(intermediaries)
        if self.ledger.balance(tx.source) < total:
            from .ledger import InsufficientFunds

            raise InsufficientFunds(f"source cannot cover {total} mEth appreciation")
        paid: dict[str, int] = {}
        for addr in intermediaries:
            self.ledger.transfer(tx.source, addr, appreciation)
            paid[addr] = appreciation
        self._close()
        return paid

    def unsuccessful(
        self, caller: str, reason: FailureReason, now: float
    ) -> str | None:
        """Destination-only failure settlement.

        Timeout blames the last node holding data (it received but never
        forwarded); BadDecrypt scans the hop ledger against the reference
        copy and blames the node before the first mismatching cell. The
        culprit forfeits its guarantee and is escalated; everyone else is
        refunded. Returns the culprit, or None when the source itself
        never sent (a voided transaction, not a fault).
        """
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        if caller != tx.destination:
            raise NotDestination(caller)
        if not tx.route:
            raise NoCulpritFound("no route was built")

        if reason is FailureReason.TIMEOUT:
            last = max(
                (i for i, hop in enumerate(tx.route) if hop.data is not None),
                default=None,
            )
            if last is None:
                # source never sent; it only harmed itself
                culprit = None
            elif last == len(tx.route) - 1:
                raise NoCulpritFound("full route delivered; timeout claim is vacuous")
            else:
                culprit = tx.route[last].node
        else:
            culprit = None
            for i in range(1, len(tx.route)):
                if tx.route[i].data != tx.reference_ciphertext:
                    culprit = tx.route[i - 1].node
                    break
            if culprit is None:
                raise NoCulpritFound("every hop cell matches the reference copy")

        if culprit is not None:
            self.registry.escalate_fault(culprit, now)
        self._refund_deposits(exclude=culprit)
        tx.successful = False
        tx.culprit = culprit
        self._close()
        return culprit

    def void(self) -> dict[str, int]:
        """Close an open transaction without blame (e.g. no route exists);
        refunds every held guarantee."""
        tx = self.tx
        if tx is None or not tx.active:
            raise NoActiveTransaction("no transaction is open")
        refunded = self._refund_deposits()
        self._close()
        return refunded

    # -- reads -------------------------------------------------------------

    def return_culprit(self) -> str | None:
        if self.last_closed is None:
            return None
        return self.last_closed.culprit

    def get_data(self, caller: str, position: int) -> HopRecord:
        tx = self.tx if self.tx is not None else self.last_closed
        if tx is None or not tx.route:
            raise OutOfRange("no transaction with a route exists")
        if not 0 <= position < len(tx.route):
            raise OutOfRange(f"position {position} not in route of {len(tx.route)}")
        return tx.route[position]

    # -- GCS reset ---------------------------------------------------------

    def abort(self, caller: str) -> AbortReport:
        """GCS-only reset: void any active transaction, clear participation
        flags and route tables, and remove nodes past the blacklist
        threshold (they can never register again)."""
        rec = self.registry.records.get(caller)
        if rec is None:
            raise UnknownNode(caller)
        if not rec.is_gcs:
            raise NotGCS(caller)
        voided = False
        refunded: dict[str, int] = {}
        if self.tx is not None and self.tx.active:
            refunded = self._refund_deposits(exclude=self.tx.culprit)
            self._close()
            voided = True
        self.route_table = {}
        for record in self.registry.records.values():
            record.participating = False
        removed = self.registry.removable()
        for addr in removed:
            self.registry.remove(addr)
        return AbortReport(voided_transaction=voided, refunded=refunded, removed=removed)
