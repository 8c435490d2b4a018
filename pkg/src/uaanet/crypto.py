"""Asymmetric authenticated-encryption envelopes for node payloads.

Only the holder of the matching private key can open an envelope, and
any mutation of the ciphertext is detected at decrypt time. The scheme
is pluggable: SealedEnvelope (X25519 + ChaCha20-Poly1305, the default)
for real runs, MarkerEnvelope (payload left readable, integrity still
enforced) for debugging. Intermediaries only ever handle envelope bytes;
no forwarding-path operation takes a private key.
"""

from __future__ import annotations

import hashlib
import os
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

SEED_BYTES = 32


class DecryptFailure(Exception):
    """Wrong private key or tampered ciphertext."""


@dataclass(frozen=True)
class KeyPair:
    public: bytes
    private: bytes


def _seed_material(seed: bytes | None, rng: random.Random | None) -> bytes:
    if seed is not None:
        if len(seed) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes")
        return seed
    if rng is not None:
        return rng.randbytes(SEED_BYTES)
    return os.urandom(SEED_BYTES)


class SealedEnvelope:
    """Hybrid envelope: ephemeral X25519 agreement, HKDF-SHA256 key
    derivation bound to both public keys, ChaCha20-Poly1305 payload."""

    name = "x25519-chacha20poly1305"
    _overhead = 32 + 16  # ephemeral public key + AEAD tag

    @staticmethod
    def keygen(seed: bytes | None = None) -> KeyPair:
        material = _seed_material(seed, None)
        sk = X25519PrivateKey.from_private_bytes(material)
        return KeyPair(public=sk.public_key().public_bytes_raw(), private=material)

    @staticmethod
    def _derive(shared: bytes, eph_pub: bytes, recip_pub: bytes) -> bytes:
        return HKDF(
            algorithm=hashes.SHA256(), length=32, salt=None,
            info=b"uaanet-envelope-v1",
        ).derive(shared + eph_pub + recip_pub)

    @classmethod
    def encrypt(
        cls, public_key: bytes, plaintext: bytes, rng: random.Random | None = None
    ) -> bytes:
        eph = X25519PrivateKey.from_private_bytes(_seed_material(None, rng))
        eph_pub = eph.public_key().public_bytes_raw()
        shared = eph.exchange(X25519PublicKey.from_public_bytes(public_key))
        key = cls._derive(shared, eph_pub, public_key)
        # key is unique per envelope, so a fixed nonce is safe
        body = ChaCha20Poly1305(key).encrypt(b"\x00" * 12, plaintext, None)
        return eph_pub + body

    @classmethod
    def decrypt(cls, private_key: bytes, envelope: bytes) -> bytes:
        if len(envelope) < cls._overhead:
            raise DecryptFailure("truncated envelope")
        eph_pub, body = envelope[:32], envelope[32:]
        try:
            sk = X25519PrivateKey.from_private_bytes(private_key)
            recip_pub = sk.public_key().public_bytes_raw()
            shared = sk.exchange(X25519PublicKey.from_public_bytes(eph_pub))
            key = cls._derive(shared, eph_pub, recip_pub)
            return ChaCha20Poly1305(key).decrypt(b"\x00" * 12, body, None)
        except (InvalidTag, ValueError) as exc:
            raise DecryptFailure(str(exc)) from None


class MarkerEnvelope:
    """Debugging scheme: plaintext stays visible, but wrong-key and
    tamper detection behave exactly like the sealed scheme."""

    name = "marker"
    _tag_len = 8
    _mac_len = 16
    _overhead = _tag_len + _mac_len

    @staticmethod
    def _public_for(private: bytes) -> bytes:
        return hashlib.sha256(b"uaanet-marker-pub" + private).digest()

    @classmethod
    def keygen(cls, seed: bytes | None = None) -> KeyPair:
        material = _seed_material(seed, None)
        return KeyPair(public=cls._public_for(material), private=material)

    @classmethod
    def encrypt(
        cls, public_key: bytes, plaintext: bytes, rng: random.Random | None = None
    ) -> bytes:
        tag = public_key[: cls._tag_len]
        mac = hashlib.sha256(public_key + plaintext).digest()[: cls._mac_len]
        return tag + mac + plaintext

    @classmethod
    def decrypt(cls, private_key: bytes, envelope: bytes) -> bytes:
        if len(envelope) < cls._overhead:
            raise DecryptFailure("truncated envelope")
        public_key = cls._public_for(private_key)
        tag = envelope[: cls._tag_len]
        mac = envelope[cls._tag_len: cls._overhead]
        plaintext = envelope[cls._overhead:]
        if tag != public_key[: cls._tag_len]:
            raise DecryptFailure("wrong key")
        if mac != hashlib.sha256(public_key + plaintext).digest()[: cls._mac_len]:
            raise DecryptFailure("integrity check failed")
        return plaintext


SCHEMES = {SealedEnvelope.name: SealedEnvelope, MarkerEnvelope.name: MarkerEnvelope}

# module-level defaults use the sealed scheme
keygen = SealedEnvelope.keygen
encrypt = SealedEnvelope.encrypt
decrypt = SealedEnvelope.decrypt
