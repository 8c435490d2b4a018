"""Node registration contract: deposits, fault lifecycle, blacklist bookkeeping.

Registration costs a fixed 5-ether deposit held in escrow. A detected
offense marks the node faulty and escalates geometrically: the k-th
offense carries a penalty of 2*2^(k-1) ether payable within a window of
10*10^(k-1) seconds. Blacklist counts are monotone and survive removal;
an address that reached the removal threshold can never register again.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ledger import ETHER, Ledger

REGISTRATION_FEE = 5 * ETHER
REMOVAL_THRESHOLD = 10
BASE_PENALTY = 2 * ETHER
BASE_FAULT_WINDOW = 10.0  # seconds


class RegistryError(Exception):
    pass


class AlreadyRegistered(RegistryError):
    pass


class Blacklisted(RegistryError):
    pass


class WrongDeposit(RegistryError):
    pass


class UnknownNode(RegistryError):
    pass


class NotFaulty(RegistryError):
    pass


class WrongAmount(RegistryError):
    pass


class WindowLapsed(RegistryError):
    pass


@dataclass
class NodeRecord:
    """One registered node's on-ledger state."""

    address: str
    public_key: bytes
    is_gcs: bool = False
    fault_time: float = 0.0  # seconds allowed to pay the pending penalty
    penalty_token: int = 0  # milli-ether owed while faulty
    participating: bool = False
    timestamp: float = 0.0  # sim time of registration or last offense
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    faulty: bool = False


class Registry:
    def __init__(
        self,
        ledger: Ledger,
        fee: int = REGISTRATION_FEE,
        removal_threshold: int = REMOVAL_THRESHOLD,
    ):
        self.ledger = ledger
        self.fee = fee
        self.removal_threshold = removal_threshold
        self.records: dict[str, NodeRecord] = {}
        # offense counts; entries persist even after the node is removed
        self.blacklist: dict[str, int] = {}

    def _get(self, addr: str) -> NodeRecord:
        try:
            return self.records[addr]
        except KeyError:
            raise UnknownNode(addr) from None

    def register(
        self,
        addr: str,
        public_key: bytes,
        is_gcs: bool,
        deposit: int,
        now: float = 0.0,
        x: float = 0.0,
        y: float = 0.0,
        z: float = 0.0,
    ) -> NodeRecord:
        if addr in self.records:
            raise AlreadyRegistered(addr)
        if self.blacklist.get(addr, 0) >= self.removal_threshold:
            raise Blacklisted(f"{addr} was removed and cannot register again")
        if deposit != self.fee:
            raise WrongDeposit(f"registration requires {self.fee} mEth, got {deposit}")
        self.ledger.transfer(addr, self.ledger.escrow, deposit)
        rec = NodeRecord(
            address=addr, public_key=public_key, is_gcs=is_gcs,
            timestamp=now, x=x, y=y, z=z,
        )
        self.records[addr] = rec
        self.blacklist.setdefault(addr, 0)
        return rec

    def escalate_fault(self, addr: str, now: float) -> NodeRecord:
        """Record one offense: bump the blacklist count and restart the
        penalty window with geometrically escalated values."""
        rec = self._get(addr)
        count = self.blacklist.get(addr, 0) + 1
        self.blacklist[addr] = count
        rec.faulty = True
        rec.participating = False
        rec.penalty_token = BASE_PENALTY * (2 ** (count - 1))
        rec.fault_time = BASE_FAULT_WINDOW * (10 ** (count - 1))
        rec.timestamp = now
        return rec

    def pay_penalty(self, addr: str, amount: int, now: float) -> NodeRecord:
        """Clear a node's faulty flag by paying the exact penalty within
        the fault window. A lapsed window escalates and refuses payment."""
        rec = self._get(addr)
        if not rec.faulty:
            raise NotFaulty(addr)
        if now - rec.timestamp > rec.fault_time:
            self.escalate_fault(addr, now)
            raise WindowLapsed(
                f"{addr} missed the payment window; penalty escalated"
            )
        if amount != rec.penalty_token:
            raise WrongAmount(f"penalty is {rec.penalty_token} mEth, got {amount}")
        self.ledger.transfer(addr, self.ledger.escrow, amount)
        rec.faulty = False
        return rec

    def get_table(self, addr: str) -> tuple[NodeRecord | None, int]:
        """Node record (None if removed) plus blacklist count."""
        if addr in self.records:
            return self.records[addr], self.blacklist.get(addr, 0)
        if addr in self.blacklist:
            return None, self.blacklist[addr]
        raise UnknownNode(addr)

    def remove(self, addr: str) -> None:
        """Drop the record; the blacklist count stays so the address is
        refused forever once it hit the removal threshold."""
        self.records.pop(addr, None)

    def removable(self) -> list[str]:
        """Registered addresses at or past the removal threshold."""
        return [
            a for a in self.records
            if self.blacklist.get(a, 0) >= self.removal_threshold
        ]

    def table_rows(self) -> list[dict]:
        """All registered nodes in the public status-table shape:
        address, blacklist count, faulty time, penalty token, balance."""
        return [
            {
                "address": rec.address,
                "blacklist_count": self.blacklist.get(addr, 0),
                "fault_time_s": rec.fault_time,
                "penalty_token_meth": rec.penalty_token,
                "balance_meth": self.ledger.balance(addr),
            }
            for addr, rec in self.records.items()
        ]
