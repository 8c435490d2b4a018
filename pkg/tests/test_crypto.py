import random

import pytest

from uaanet.crypto import (
    DecryptFailure,
    MarkerEnvelope,
    SealedEnvelope,
    decrypt,
    encrypt,
    keygen,
)

SCHEMES = [SealedEnvelope, MarkerEnvelope]


@pytest.fixture(params=SCHEMES, ids=lambda s: s.name)
def scheme(request):
    return request.param


def seed(i):
    return bytes([i]) * 32


def test_keygen_is_deterministic(scheme):
    assert scheme.keygen(seed(1)) == scheme.keygen(seed(1))
    assert scheme.keygen(seed(1)) != scheme.keygen(seed(2))


def test_keygen_rejects_bad_seed_length(scheme):
    with pytest.raises(ValueError):
        scheme.keygen(b"short")


def test_round_trip(scheme):
    kp = scheme.keygen(seed(3))
    for payload in (b"", b"x", b"hello world", bytes(range(256)) * 16,
                    random.Random(0).randbytes(64 * 1024)):
        assert scheme.decrypt(kp.private, scheme.encrypt(kp.public, payload)) == payload


def test_wrong_key_matrix(scheme):
    pairs = [scheme.keygen(seed(i)) for i in range(4)]
    envelopes = [scheme.encrypt(kp.public, b"confidential") for kp in pairs]
    for i, kp in enumerate(pairs):
        for j, env in enumerate(envelopes):
            if i == j:
                assert scheme.decrypt(kp.private, env) == b"confidential"
            else:
                with pytest.raises(DecryptFailure):
                    scheme.decrypt(kp.private, env)


def test_every_byte_position_is_tamper_evident(scheme):
    kp = scheme.keygen(seed(4))
    env = scheme.encrypt(kp.public, b"short message")
    for pos in range(len(env)):
        for mask in (0x01, 0x80, 0xFF):
            broken = bytearray(env)
            broken[pos] ^= mask
            with pytest.raises(DecryptFailure):
                scheme.decrypt(kp.private, bytes(broken))


def test_truncated_envelope_fails(scheme):
    kp = scheme.keygen(seed(5))
    env = scheme.encrypt(kp.public, b"payload")
    for cut in (0, 1, len(env) // 2, len(env) - 1):
        with pytest.raises(DecryptFailure):
            scheme.decrypt(kp.private, env[:cut])


def test_seeded_rng_gives_reproducible_envelopes():
    kp = SealedEnvelope.keygen(seed(6))
    env1 = SealedEnvelope.encrypt(kp.public, b"replay", rng=random.Random(99))
    env2 = SealedEnvelope.encrypt(kp.public, b"replay", rng=random.Random(99))
    assert env1 == env2
    env3 = SealedEnvelope.encrypt(kp.public, b"replay", rng=random.Random(100))
    assert env1 != env3


def test_fresh_entropy_envelopes_differ():
    kp = SealedEnvelope.keygen(seed(7))
    assert SealedEnvelope.encrypt(kp.public, b"m") != SealedEnvelope.encrypt(kp.public, b"m")


def test_module_level_default_is_the_sealed_scheme():
    kp = keygen(seed(8))
    assert decrypt(kp.private, encrypt(kp.public, b"default")) == b"default"


def test_marker_scheme_exposes_plaintext_for_debugging():
    kp = MarkerEnvelope.keygen(seed(9))
    env = MarkerEnvelope.encrypt(kp.public, b"visible")
    assert b"visible" in env
