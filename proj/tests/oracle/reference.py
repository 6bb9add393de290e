#!/usr/bin/env python3
"""Independent reference for the derivation and encoding pipeline.

Written from the format description only (no code shared with the C++ build).
Used to freeze expected values into the C++ tests:

    python3 tests/oracle/reference.py vectors   # print unit-test constants
    python3 tests/oracle/reference.py golden tests/data/golden_vectors.json
"""

import base64
import hashlib
import json
import random
import struct
import sys

from cryptography.hazmat.primitives.ciphers.aead import AESGCM

TAG = b"autopass.v1"
MASTER_AAD = b"autopass-vault.v1/master"

CLASS_ORDER = ["lower", "upper", "digit", "symbol"]


def sha256(data):
    return hashlib.sha256(data).digest()


def char_class(c):
    if "a" <= c <= "z":
        return "lower"
    if "A" <= c <= "Z":
        return "upper"
    if "0" <= c <= "9":
        return "digit"
    return "symbol"


def charset(policy):
    return "".join(
        chr(o)
        for o in range(0x21, 0x7F)
        if char_class(chr(o)) in policy["allowed_classes"] and chr(o) not in policy["forbidden_chars"]
    )


def field(present, data):
    if not present:
        return b"\x00" + struct.pack(">I", 0)
    return b"\x01" + struct.pack(">I", len(data)) + data


def serialize(stretched, site_value, source, user_constant, user_name, object_digest, nonce):
    out = TAG
    out += field(True, stretched)
    out += field(True, site_value.encode())
    out += field(True, bytes([1 if source == "url" else 2]))
    out += field(user_constant is not None, (user_constant or "").encode())
    out += field(user_name is not None, (user_name or "").encode())
    out += field(object_digest is not None, object_digest or b"")
    out += field(True, struct.pack(">Q", nonce))
    return out


def stretch(secret, iterations):
    x = secret
    for _ in range(iterations):
        x = sha256(x)
    return x


def draw(bits, chars, length, nonce):
    n = len(chars)
    limit = 256 - (256 % n)
    out = []
    block = 0
    while len(out) < length:
        stream = sha256(bits + struct.pack(">Q", nonce) + struct.pack(">I", block))
        for b in stream:
            if b < limit:
                out.append(chars[b % n])
                if len(out) == length:
                    break
        block += 1
    return "".join(out)


def encode(bits, policy, nonce=0):
    chars = charset(policy)
    for attempt in range(32):
        pw = draw(bits, chars, policy["length_min"], nonce + attempt)
        if set(policy["required_classes"]) <= {char_class(c) for c in pw}:
            return pw, attempt + 1
    raise RuntimeError("retries exhausted")


def apply_offset(pw, offset, chars):
    n = len(chars)
    assert offset["modulus"] == n
    return "".join(chars[(chars.index(c) + s) % n] for c, s in zip(pw, offset["shifts"]))


def b64(data):
    return base64.b64encode(data).decode()


def generate(vault, user_password, site_key, object_content):
    g = vault["global"]
    salt = base64.b64decode(g["kdf"]["salt"])
    key = hashlib.pbkdf2_hmac("sha256", user_password.encode(), salt, g["kdf"]["iterations"], 32)
    master = AESGCM(key).decrypt(
        base64.b64decode(g["master"]["nonce"]), base64.b64decode(g["master"]["ciphertext"]), MASTER_AAD
    )
    pw_bytes = user_password.encode()
    inner = struct.pack(">I", len(master)) + master + struct.pack(">I", len(pw_bytes)) + pw_bytes
    stretched = stretch(inner, g["inner_iterations"])
    site = vault["sites"][site_key]
    p = site["input_params"]
    bits = sha256(
        serialize(
            stretched,
            site["site_key"]["value"],
            site["site_key"]["source"],
            g["user_constant"] if p["use_user_constant"] else None,
            (p["user_name"] or "") if p["use_user_name"] else None,
            sha256(object_content) if p["use_object"] else None,
            p["version_nonce"],
        )
    )
    pw, _ = encode(bits, site["policy"])
    if site["offset"] is not None:
        pw = apply_offset(pw, site["offset"], charset(site["policy"]))
    return pw


def make_vault(rng, user_password, kdf_iterations, inner_iterations, user_constant):
    salt = rng.randbytes(16)
    nonce = rng.randbytes(12)
    master = rng.randbytes(32)
    key = hashlib.pbkdf2_hmac("sha256", user_password.encode(), salt, kdf_iterations, 32)
    sealed = AESGCM(key).encrypt(nonce, master, MASTER_AAD)
    return {
        "magic": "autopass-vault",
        "format_version": 1,
        "global": {
            "kdf": {"algorithm": "pbkdf2-hmac-sha256", "salt": b64(salt), "iterations": kdf_iterations},
            "master": {"algorithm": "aes-256-gcm", "nonce": b64(nonce), "ciphertext": b64(sealed)},
            "user_constant": user_constant,
            "hash": "sha256",
            "inner_iterations": inner_iterations,
            "site_labels": 2,
        },
        "sites": {},
        "policy_cache": {},
        "sync": {"user_id": None, "record_version": 0},
    }


def policy(length, allowed, required, forbidden="", version=0):
    return {
        "length_min": length,
        "length_max": length,
        "allowed_classes": [c for c in CLASS_ORDER if c in allowed],
        "required_classes": [c for c in CLASS_ORDER if c in required],
        "forbidden_chars": forbidden,
        "policy_version": version,
    }


def site_config(key, source, pol, offset=None, use_uc=True, user_name=None, use_object=False, nonce=0,
                reminder=None):
    return {
        "site_key": {"value": key, "source": source},
        "policy": pol,
        "offset": offset,
        "input_params": {
            "use_user_constant": use_uc,
            "use_user_name": user_name is not None,
            "use_object": use_object,
            "user_name": user_name,
            "version_nonce": nonce,
        },
        "reminder": reminder,
        "version": 1,
        "updated_at": 1700000000,
    }


def golden(path):
    rng = random.Random(20240607)
    cases = []
    vaults = []
    default = policy(12, CLASS_ORDER, ["lower", "digit"])
    alnum = policy(8, ["lower", "upper", "digit"], [])
    pin = policy(4, ["digit"], ["digit"])
    strict = policy(16, CLASS_ORDER, CLASS_ORDER, forbidden="\"'\\`")
    for v in range(4):
        pw = "user-pw-%d-é" % v  # non-ASCII exercises UTF-8 handling
        kdf_it = 100000 if v == 0 else rng.randint(1000, 5000)
        inner_it = 100000 if v == 0 else rng.randint(1000, 5000)
        vault = make_vault(rng, pw, kdf_it, inner_it, "constant-%d" % v)
        obj = rng.randbytes(64)
        chars62 = charset(alnum)
        sites = [
            site_config("example.com", "url", default),
            site_config("bank.co", "url", strict, user_name="alice%d" % v),
            site_config("my bank", "user_site_name", alnum, use_uc=False, nonce=3),
            site_config("files.org", "url", alnum, use_object=True, reminder="holiday photo"),
            site_config("pin.net", "url", pin),
            site_config("offset.io", "url", alnum,
                        offset={"shifts": [rng.randrange(62) for _ in range(8)], "modulus": len(chars62)}),
        ]
        for s in sites:
            vault["sites"][s["site_key"]["value"]] = s
        queries = [
            ("https://www.Example.com:443/login?x=1", "url", "example.com", None),
            ("example.com", "url", "example.com", None),
            ("login.bank.co", "url", "bank.co", None),
            ("  My Bank ", "user_site_name", "my bank", None),
            ("files.org", "url", "files.org", obj),
            ("pin.net", "url", "pin.net", None),
            ("http://user:pw@offset.io/x", "url", "offset.io", None),
        ]
        vaults.append(vault)
        for raw, mode, key, content in queries:
            cases.append({
                "vault": len(vaults) - 1,
                "user_password": pw,
                "site": raw,
                "mode": mode,
                "object_hex": content.hex() if content is not None else None,
                "expected": generate(vault, pw, key, content),
            })
    with open(path, "w") as f:
        json.dump({"vaults": vaults, "cases": cases}, f, indent=1, sort_keys=True)
        f.write("\n")


def vectors():
    zero = bytes(32)
    p62 = policy(8, ["lower", "upper", "digit"], [])
    print("encode(zero, 62, len 8, nonce 0) =", encode(zero, p62)[0])
    print("encode(zero, 62, len 8, nonce 5) =", encode(zero, p62, 5)[0])
    pdef = policy(12, CLASS_ORDER, ["lower", "digit"])
    print("encode(zero, default policy) =", encode(zero, pdef))
    ones = bytes([0xFF]) * 32
    print("encode(ff, default policy) =", encode(ones, pdef))
    # nearly impossible: two required classes each reduced to a single char
    tight = policy(2, CLASS_ORDER, ["lower", "digit"],
                   forbidden="123456789" + "bcdefghijklmnopqrstuvwxyz")
    try:
        print("tight:", encode(zero, tight))
    except RuntimeError as e:
        print("tight: ", e)
    # fixed bundle
    stretched = bytes(range(32))
    s = serialize(stretched, "example.com", "url", "c", None, None, 0)
    print("serialize(fixed) hex =", s.hex())
    print("derive_bits(fixed) =", sha256(s).hex())
    s2 = serialize(stretched, "example.com", "url", "", None, None, 0)
    print("derive_bits(empty constant) =", sha256(s2).hex())
    print("stretch('abc', 1) =", stretch(b"abc", 1).hex())
    print("stretch('abc', 100000) =", stretch(b"abc", 100000).hex())


if __name__ == "__main__":
    if sys.argv[1] == "vectors":
        vectors()
    elif sys.argv[1] == "golden":
        golden(sys.argv[2])
