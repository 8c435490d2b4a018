import pytest

from uaanet.ledger import ETHER, InsufficientFunds, Ledger
from uaanet.registry import (
    AlreadyRegistered,
    Blacklisted,
    NotFaulty,
    Registry,
    UnknownNode,
    WindowLapsed,
    WrongAmount,
    WrongDeposit,
)

PK = b"\x01" * 32


@pytest.fixture
def world():
    ledger = Ledger()
    registry = Registry(ledger)
    return ledger, registry


def fund(ledger, amount=100 * ETHER):
    return ledger.create_account(amount)


def test_registration_moves_five_ether_to_escrow(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, is_gcs=False, deposit=5 * ETHER)
    assert ledger.balance(addr) == 95 * ETHER
    assert ledger.balance(ledger.escrow) == 5 * ETHER
    rec = registry.records[addr]
    assert not rec.faulty and not rec.participating
    assert rec.penalty_token == 0 and rec.fault_time == 0
    assert registry.blacklist[addr] == 0


def test_double_registration_refused_without_charge(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    with pytest.raises(AlreadyRegistered):
        registry.register(addr, PK, False, 5 * ETHER)
    assert ledger.balance(addr) == 95 * ETHER


def test_wrong_deposit_refused(world):
    ledger, registry = world
    addr = fund(ledger)
    with pytest.raises(WrongDeposit):
        registry.register(addr, PK, False, 4 * ETHER)
    with pytest.raises(WrongDeposit):
        registry.register(addr, PK, False, 6 * ETHER)
    assert ledger.balance(addr) == 100 * ETHER
    assert addr not in registry.records


def test_underfunded_registration_refused(world):
    ledger, registry = world
    addr = fund(ledger, 3 * ETHER)
    with pytest.raises(InsufficientFunds):
        registry.register(addr, PK, False, 5 * ETHER)
    assert addr not in registry.records
    assert ledger.balance(addr) == 3 * ETHER


def test_gcs_flag_recorded(world):
    ledger, registry = world
    addr = fund(ledger)
    rec = registry.register(addr, PK, is_gcs=True, deposit=5 * ETHER)
    assert rec.is_gcs


def test_first_offense_sets_base_penalty(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    rec = registry.escalate_fault(addr, now=12.0)
    assert registry.blacklist[addr] == 1
    assert rec.faulty and not rec.participating
    assert rec.penalty_token == 2 * ETHER
    assert rec.fault_time == 10.0
    assert rec.timestamp == 12.0


def test_escalation_is_geometric(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    for k in range(1, 11):
        rec = registry.escalate_fault(addr, now=float(k))
        assert registry.blacklist[addr] == k
        assert rec.penalty_token == 2 * ETHER * 2 ** (k - 1)
        assert rec.fault_time == 10.0 * 10 ** (k - 1)


def test_pay_penalty_within_window_clears_fault(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    registry.escalate_fault(addr, now=0.0)
    escrow_before = ledger.balance(ledger.escrow)
    rec = registry.pay_penalty(addr, 2 * ETHER, now=9.0)
    assert not rec.faulty
    assert ledger.balance(ledger.escrow) == escrow_before + 2 * ETHER
    # the count stays; paying clears only the faulty flag
    assert registry.blacklist[addr] == 1


def test_pay_penalty_requires_fault(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    with pytest.raises(NotFaulty):
        registry.pay_penalty(addr, 2 * ETHER, now=1.0)


def test_wrong_amount_refused(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    registry.escalate_fault(addr, now=0.0)
    with pytest.raises(WrongAmount):
        registry.pay_penalty(addr, 1 * ETHER, now=1.0)
    assert registry.records[addr].faulty


def test_lapsed_window_escalates_and_refuses(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    registry.escalate_fault(addr, now=0.0)
    balance_before = ledger.balance(addr)
    with pytest.raises(WindowLapsed):
        registry.pay_penalty(addr, 2 * ETHER, now=10.5)
    rec = registry.records[addr]
    assert rec.penalty_token == 4 * ETHER
    assert rec.fault_time == 100.0
    assert registry.blacklist[addr] == 2
    assert rec.timestamp == 10.5
    assert ledger.balance(addr) == balance_before


def test_offense_after_cleared_penalty_keeps_doubling(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    registry.escalate_fault(addr, now=0.0)
    registry.pay_penalty(addr, 2 * ETHER, now=1.0)
    rec = registry.escalate_fault(addr, now=2.0)
    assert rec.penalty_token == 4 * ETHER
    assert rec.fault_time == 100.0
    assert registry.blacklist[addr] == 2


def test_removed_address_is_refused_forever(world):
    ledger, registry = world
    addr = fund(ledger, 5000 * ETHER)
    registry.register(addr, PK, False, 5 * ETHER)
    for k in range(10):
        registry.escalate_fault(addr, now=float(k))
    assert registry.removable() == [addr]
    registry.remove(addr)
    assert addr not in registry.records
    with pytest.raises(Blacklisted):
        registry.register(addr, PK, False, 5 * ETHER)


def test_get_table(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    rec, count = registry.get_table(addr)
    assert rec is not None and count == 0
    registry.escalate_fault(addr, now=0.0)
    rec, count = registry.get_table(addr)
    assert rec.faulty and count == 1
    registry.remove(addr)
    rec, count = registry.get_table(addr)
    assert rec is None and count == 1
    with pytest.raises(UnknownNode):
        registry.get_table("0x" + "ff" * 20)


def test_table_rows_have_the_five_columns(world):
    ledger, registry = world
    addr = fund(ledger)
    registry.register(addr, PK, False, 5 * ETHER)
    (row,) = registry.table_rows()
    assert set(row) == {
        "address", "blacklist_count", "fault_time_s",
        "penalty_token_meth", "balance_meth",
    }
    assert row["address"] == addr
    assert row["balance_meth"] == 95 * ETHER
