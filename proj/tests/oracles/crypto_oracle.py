#!/usr/bin/env python3
"""Independent oracle for the crypto golden vectors.

Pure-Python secp256k1 arithmetic, RFC 6979 nonces (HMAC-SHA256) and
stdlib json canonicalization. Shares no code with the C++ library; its
output is frozen into tests/fixtures/crypto_vectors.json.

    python3 tests/oracles/crypto_oracle.py > tests/fixtures/crypto_vectors.json
"""

import hashlib
import hmac
import json
import random
import sys

P = 2**256 - 2**32 - 977
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
G = (0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
     0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8)

IDENTITY_TAG = b"agentosi/identity/v1"


def ec_add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if a[0] == b[0] and (a[1] + b[1]) % P == 0:
        return None
    if a == b:
        lam = 3 * a[0] * a[0] * pow(2 * a[1], -1, P) % P
    else:
        lam = (b[1] - a[1]) * pow(b[0] - a[0], -1, P) % P
    x = (lam * lam - a[0] - b[0]) % P
    return (x, (lam * (a[0] - x) - a[1]) % P)


def ec_mul(k, pt=G):
    acc = None
    while k:
        if k & 1:
            acc = ec_add(acc, pt)
        pt = ec_add(pt, pt)
        k >>= 1
    return acc


def pub_bytes(pt):
    return b"\x04" + pt[0].to_bytes(32, "big") + pt[1].to_bytes(32, "big")


def secret_from_seed(seed):
    ctr = 0
    while True:
        h = hashlib.sha256(IDENTITY_TAG + seed.to_bytes(8, "big") + ctr.to_bytes(4, "big")).digest()
        d = int.from_bytes(h, "big")
        if 1 <= d < N:
            return d
        ctr += 1


def address_of(pub):
    return hashlib.sha256(pub).digest()[-20:]


def rfc6979_k(d, h1):
    x = d.to_bytes(32, "big")
    h = (int.from_bytes(h1, "big") % N).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        cand = int.from_bytes(v, "big")
        if 1 <= cand < N:
            return cand
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign(d, msg):
    h1 = hashlib.sha256(msg).digest()
    z = int.from_bytes(h1, "big")
    k = rfc6979_k(d, h1)
    R = ec_mul(k)
    r = R[0] % N
    s = pow(k, -1, N) * (z + r * d) % N
    recid = (R[1] & 1) | (2 if R[0] >= N else 0)
    if s > N // 2:
        s = N - s
        recid ^= 1
    return r.to_bytes(32, "big") + s.to_bytes(32, "big") + bytes([recid])


def canon(v):
    return json.dumps(v, ensure_ascii=False, separators=(",", ":"), sort_keys=True).encode("utf-8")


def main():
    sha_inputs = [b"", b"abc", b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
                  b"\x00" * 64, bytes(range(256))]
    canon_inputs = [
        {"b": 1, "a": 2},
        {},
        {"x": [{"z": 0, "y": ""}]},
        {"price": 250000, "currency": "USDC", "nested": {"k2": [3, 2, 1], "k1": None, "k0": True}},
        {"été": "café", "Z": "quote\"slash\\nl\n\ttab\u0001", "a": -17, "emoji": "\U0001F431"},
        [1, [2, [3, {"b": False, "a": []}]]],
    ]
    identities = []
    for seed in (1, 2, 3, 42):
        d = secret_from_seed(seed)
        pub = pub_bytes(ec_mul(d))
        identities.append({"seed": seed, "secret": d.to_bytes(32, "big").hex(),
                           "public_key": pub.hex(), "address": address_of(pub).hex()})
    sig_cases = []
    rng = random.Random(6979)
    messages = [b"", b"Satoshi Nakamoto", b'{"a":2,"b":1}', bytes(rng.getrandbits(8) for _ in range(97))]
    for ident in identities[:3]:
        d = int(ident["secret"], 16)
        for m in messages:
            sig_cases.append({"seed": ident["seed"], "message": m.hex(), "signature": sign(d, m).hex()})
    # Known secp256k1/RFC 6979 vector (private key 1) cross-checks the oracle itself.
    known = sign(1, b"Satoshi Nakamoto")
    assert known[:64].hex() == (
        "934b1ea10a4b3c1757e2b0c017d0b6143ce3c9a7e6a4a49860d7a6ab210ee3d8"
        "2442ce9d2b916064108014783e923ec36b49743e2ffa1c4496f01a512aafd9e5"), known.hex()
    out = {
        "sha256": [{"input": x.hex(), "digest": hashlib.sha256(x).hexdigest()} for x in sha_inputs],
        "canonical_json": [{"value": v, "canonical": canon(v).hex()} for v in canon_inputs],
        "identities": identities,
        "signatures": sig_cases,
        "raw_key_signatures": [{"secret": (1).to_bytes(32, "big").hex(), "message": b"Satoshi Nakamoto".hex(),
                                "signature": known.hex()}],
    }
    json.dump(out, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
