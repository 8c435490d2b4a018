"""Walk the data-sending contract through one honest delivery and one
drop, by hand, watching every token move.

Run: python demos/01_contract_walkthrough.py
"""

from uaanet.contract import DataContract, FailureReason
from uaanet.ledger import ETHER, Ledger
from uaanet.registry import Registry


def eth(meth):
    return f"{meth / ETHER:.3f} eth"


def balances(ledger, names):
    return "  ".join(f"{name}={eth(ledger.balance(addr))}"
                     for name, addr in names.items())


ledger = Ledger(seed=1)
registry = Registry(ledger)
contract = DataContract(ledger, registry)

# Four nodes in a line, 10 m apart, everyone starts with 100 ether.
names = {}
for i, name in enumerate(["alice", "bob", "carol", "dave"]):
    addr = ledger.create_account(100 * ETHER)
    registry.register(addr, bytes([i]) * 32, is_gcs=False,
                      deposit=5 * ETHER, now=0.0, x=i * 10.0, y=0.0, z=0.0)
    names[name] = addr

print("after registration (5 eth fee each):")
print(" ", balances(ledger, names))

# --- an honest transfer alice -> dave ---------------------------------------

payload = b"sensor frame 0001"
contract.do_trans(names["alice"], names["dave"], payload, now=1.0)
for name, addr in names.items():
    rec = registry.records[addr]
    exempt = addr in (names["alice"], names["dave"])
    contract.register_coordinates(addr, rec.x, rec.y, rec.z,
                                  0 if exempt else 1 * ETHER)
route = contract.build_route(range_m=12.0)
print("\nroute:", " -> ".join(name for name in names
                              if names[name] in route))
print("guarantees held (bob and carol staked 1 eth):")
print(" ", balances(ledger, names))

for position, addr in enumerate(route[:-1]):
    data = contract.get_data(addr, position).data if position else payload
    contract.send(addr, data, now=1.0 + position)

refunds = contract.success(names["dave"])
paid = contract.trans_completed(names["alice"], appreciation=100)
print("\nafter success (guarantees back, 0.1 eth appreciation each):")
print(" ", balances(ledger, names))
assert all(ledger.balance(names[n]) == 95 * ETHER + 100 for n in ("bob", "carol"))

# --- the same transfer, but carol drops the packet ---------------------------

contract.do_trans(names["alice"], names["dave"], payload, now=10.0)
for name, addr in names.items():
    rec = registry.records[addr]
    exempt = addr in (names["alice"], names["dave"])
    contract.register_coordinates(addr, rec.x, rec.y, rec.z,
                                  0 if exempt else 1 * ETHER)
contract.build_route(range_m=12.0)
contract.send(names["alice"], payload, now=11.0)
contract.send(names["bob"], payload, now=12.0)
# carol received the data but never forwards; dave eventually times out
culprit = contract.unsuccessful(names["dave"], FailureReason.TIMEOUT, now=20.0)
record, count = registry.get_table(culprit)

print("\nafter the drop settlement:")
print(" ", balances(ledger, names))
print(f"  culprit: carol ({culprit[:10]}...), guarantee forfeited,"
      f" offense #{count}, penalty {eth(record.penalty_token)}"
      f" payable within {record.fault_time:.0f} s")
assert culprit == names["carol"]

registry.pay_penalty(names["carol"], record.penalty_token, now=25.0)
print("\ncarol pays the penalty and may participate again:")
print(" ", balances(ledger, names))

ledger.audit()
print(f"\ntotal supply unchanged at {eth(ledger.total_supply())};"
      f" escrow holds {eth(ledger.balance(ledger.escrow))}")
