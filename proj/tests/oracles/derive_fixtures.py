"""Independent high-precision oracles for the frozen test fixtures.

Run with: python3 tests/oracles/derive_fixtures.py
Nothing here imports the C++ library; values printed are pasted into tests.
"""
import hashlib

from mpmath import mp, mpf, exp, findroot

mp.dps = 50


def weight(filled, limit):
    return exp(mpf(filled) - mpf(limit)) / mpf(filled)


def fractions(fills, limit):
    ws = [weight(f, limit) for f in fills]
    total = sum(ws)
    return [w / total for w in ws]


print("incentive(2,5) =", mp.nstr(weight(2, 5), 20))
print("incentive(3,5) =", mp.nstr(weight(3, 5), 20))
fr = fractions([2, 3], 5)
print("fractions {2,3} =", [mp.nstr(x, 20) for x in fr])
print("x10 =", [mp.nstr(x * 10, 20) for x in fr])
print("x50 =", [mp.nstr(x * 50, 20) for x in fr])
fr = fractions([mpf("0.01"), mpf("0.5")], 1)
print("dust fractions =", [mp.nstr(x, 20) for x in fr])

# Commitment preimage: 16-byte BE amount || 32-byte nonce || utf-8 id.
pre = (5 * 10**18).to_bytes(16, "big") + bytes(32) + b"a"
print("digest(5 ETH, 0^32, a) =", hashlib.sha256(pre).hexdigest())
pre = (1).to_bytes(16, "big") + bytes(range(32)) + "inv-é".encode()
print("digest(1 unit, 00..1f, inv-e) =", hashlib.sha256(pre).hexdigest())

# Sweep fixture: background {2,3}, T=10, price 100 -> 110, margin 50.
bg = [mpf(2), mpf(3)]


def diff(x):
    ws = [weight(b, 10) for b in bg]
    wx = weight(x, 10)
    return wx / (sum(ws) + wx) * 50 - x * 10


n = 10**6
lo, hi = mpf(1), mpf(5)
prev_x, prev_d = lo, diff(lo)
crossings = []
mp.dps = 30
for i in range(1, n + 1):
    x = lo + (hi - lo) * i / n
    d = diff(x)
    if (prev_d > 0) != (d > 0):
        crossings.append((prev_x, x))
    prev_x, prev_d = x, d
print("grid crossings:", len(crossings), [(mp.nstr(a, 12), mp.nstr(b, 12)) for a, b in crossings])
mp.dps = 50
root = findroot(diff, crossings[0][0])
print("sweep threshold =", mp.nstr(root, 25))


# Episode partition threshold: fills {2,3}, T=5, margin 50, price 100 -> 110.
def part(x):
    ws = sum(weight(b, 5) for b in bg)
    return weight(x, 5) / ws * 50 - x * 10


print("partition threshold =", mp.nstr(findroot(part, 2.7), 25))
print("redeem 200 STABLE at 150 -> wei", (200 * 10**6 * 10**12) // 150)
