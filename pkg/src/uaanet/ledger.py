"""Account book: addresses, token balances, and atomic transfers.

All amounts are non-negative integers in milli-ether (1 ether = 1000
units), so conservation checks are exact. A single escrow account,
created at genesis with balance 0, holds every contract-side deposit.
"""

from __future__ import annotations

import hashlib

ETHER = 1000  # milli-ether per ether


class LedgerError(Exception):
    pass


class UnknownAccount(LedgerError):
    pass


class InsufficientFunds(LedgerError):
    pass


class Ledger:
    """Single-writer token ledger.

    Addresses are 20-byte identifiers rendered as 0x-prefixed hex,
    derived deterministically from the seed so traces are reproducible.
    """

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._counter = 0
        self._balances: dict[str, int] = {}
        self._genesis_total = 0
        self.escrow = self.create_account(0)

    def _new_address(self) -> str:
        raw = hashlib.sha256(f"uaanet:{self._seed}:{self._counter}".encode()).digest()
        self._counter += 1
        return "0x" + raw[:20].hex()

    def create_account(self, initial_balance: int) -> str:
        if initial_balance < 0:
            raise ValueError("initial balance must be non-negative")
        addr = self._new_address()
        self._balances[addr] = initial_balance
        self._genesis_total += initial_balance
        return addr

    def balance(self, addr: str) -> int:
        try:
            return self._balances[addr]
        except KeyError:
            raise UnknownAccount(addr) from None

    def transfer(self, src: str, dst: str, amount: int) -> None:
        """Move amount from src to dst; a failing transfer moves nothing."""
        if amount < 0:
            raise ValueError("transfer amount must be non-negative")
        if src not in self._balances:
            raise UnknownAccount(src)
        if dst not in self._balances:
            raise UnknownAccount(dst)
        if self._balances[src] < amount:
            raise InsufficientFunds(
                f"{src} holds {self._balances[src]} mEth, needs {amount}"
            )
        self._balances[src] -= amount
        self._balances[dst] += amount
        assert self._balances[src] >= 0

    def total_supply(self) -> int:
        return sum(self._balances.values())

    def genesis_supply(self) -> int:
        return self._genesis_total

    def audit(self) -> None:
        """Raise if conservation is violated or any balance went negative."""
        if self.total_supply() != self._genesis_total:
            raise LedgerError(
                f"supply {self.total_supply()} != genesis {self._genesis_total}"
            )
        for addr, bal in self._balances.items():
            if bal < 0:
                raise LedgerError(f"negative balance on {addr}")

    def accounts(self) -> dict[str, int]:
        """Balance snapshot, address -> milli-ether."""
        return dict(self._balances)

    def __contains__(self, addr: str) -> bool:
        return addr in self._balances
