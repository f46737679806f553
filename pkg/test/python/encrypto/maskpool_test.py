"""
Tests for the function pool and packet masking.
"""

from encrypto import maskpool
from encrypto.errors import (
  AmbiguousDecrypt,
  ConfigError,
  NoCandidate,
  PoolExhausted,
  WrongFunction
)
from encrypto.maskpool import (
  EncryptedPacket,
  MaskFunction,
  build_pool,
  decrypt_packet,
  draw_function,
  encrypt_packet,
  make_packet,
  mask_values,
  trial_decrypt
)

import numpy as np
from pytest import fixture, raises
from scipy.stats import chisquare


@fixture
def rng():
  return np.random.default_rng(1234)


def random_packet(rng, length=None):
  length = int(rng.integers(0, 65)) if length is None else length
  payload = rng.integers(0, 256, size=length, dtype=np.uint8).tobytes()
  return make_packet(int(rng.integers(0, 1 << 63)), int(rng.integers(0, 8)), payload)


def test_minimal_pool():
  pool = build_pool(1, 7)
  assert pool.size == 1
  assert pool.functions[0].id == 0


def test_pool_is_deterministic():
  assert build_pool(8, 42) == build_pool(8, 42)


def test_pool_depends_on_seed():
  a, b = build_pool(8, 42), build_pool(8, 43)
  assert any(fa.seed != fb.seed for fa, fb in zip(a.functions, b.functions))


def test_pool_ids_and_seeds():
  pool = build_pool(64, 5)
  assert [f.id for f in pool.functions] == list(range(64))
  assert len(set(f.seed for f in pool.functions)) == 64


def test_empty_pool_rejected():
  with raises(ConfigError):
    build_pool(0, 1)


def test_forced_draw():
  assert draw_function(build_pool(3, 9), 17, {0, 1}).id == 2


def test_exhausted_pool():
  with raises(PoolExhausted):
    draw_function(build_pool(4, 9), 17, {0, 1, 2, 3})


def test_draws_are_uniform():
  pool = build_pool(8, 11)
  counts = np.zeros(8)
  for draw_seed in range(10 ** 5):
    counts[draw_function(pool, draw_seed, set()).id] += 1
  assert chisquare(counts).pvalue > 0.001


def test_mask_values_basics():
  fn = MaskFunction(0, 99)
  assert mask_values(fn, 1, 0, 0) == b""
  assert mask_values(fn, 1, 0, 100) == mask_values(fn, 1, 0, 100)
  assert len(mask_values(fn, 1, 0, 100)) == 100
  # Longer streams extend shorter ones.
  assert mask_values(fn, 1, 0, 100)[:10] == mask_values(fn, 1, 0, 10)


def test_mask_streams_differ_by_index(rng):
  for _ in range(10 ** 4):
    fn = MaskFunction(0, int(rng.integers(0, 1 << 63)))
    tag = int(rng.integers(0, 1 << 63))
    assert mask_values(fn, tag, 0, 16) != mask_values(fn, tag, 1, 16)


def test_encrypt_adds_mask(monkeypatch):
  monkeypatch.setattr(maskpool, "mask_values", lambda fn, tag, idx, n: bytes([5, 6, 7])[:n])
  p = make_packet(1, 0, bytes([10, 20, 30]))
  e = encrypt_packet(MaskFunction(0, 1), p)
  assert list(e.masked_payload) == [15, 26, 37]
  assert (e.block_tag, e.packet_index, e.checksum) == (p.block_tag, p.packet_index, p.checksum)


def test_encrypt_wraps_around(monkeypatch):
  monkeypatch.setattr(maskpool, "mask_values", lambda fn, tag, idx, n: bytes([10]))
  e = encrypt_packet(MaskFunction(0, 1), make_packet(1, 0, bytes([250])))
  assert list(e.masked_payload) == [4]


def test_zero_payload_reveals_mask():
  fn = MaskFunction(3, 12345)
  e = encrypt_packet(fn, make_packet(77, 2, bytes(64)))
  assert e.masked_payload == mask_values(fn, 77, 2, 64)


def test_round_trip(rng):
  for _ in range(10 ** 4):
    fn = MaskFunction(0, int(rng.integers(0, 1 << 63)))
    p = random_packet(rng)
    assert decrypt_packet(fn, encrypt_packet(fn, p)) == p


def test_empty_payload_round_trip():
  fn = MaskFunction(0, 3)
  p = make_packet(5, 0, b"")
  assert decrypt_packet(fn, encrypt_packet(fn, p)).payload == b""


def test_wrong_function_rejected(rng):
  pool = build_pool(8, 21)
  for _ in range(10 ** 3):
    p = random_packet(rng, length=16)
    used = pool.functions[int(rng.integers(0, 8))]
    e = encrypt_packet(used, p)
    for fn in pool.functions:
      if fn.id == used.id:
        continue
      with raises(WrongFunction):
        decrypt_packet(fn, e)


def test_trial_decrypt_finds_function(rng):
  pool = build_pool(8, 3)
  p = random_packet(rng, length=16)
  assert trial_decrypt(pool, encrypt_packet(pool.functions[5], p)) == (5, p)


def test_trial_decrypt_single_function(rng):
  pool = build_pool(1, 3)
  p = random_packet(rng, length=16)
  assert trial_decrypt(pool, encrypt_packet(pool.functions[0], p)) == (0, p)


def test_trial_decrypt_tampered_checksum(rng):
  pool = build_pool(8, 3)
  e = encrypt_packet(pool.functions[2], random_packet(rng, length=16))
  with raises(NoCandidate):
    trial_decrypt(pool, e._replace(checksum=e.checksum ^ 1))


def test_trial_decrypt_soundness(rng):
  pool = build_pool(64, 8)
  ambiguous = 0
  for _ in range(10 ** 4):
    p = random_packet(rng, length=16)
    fn = pool.functions[int(rng.integers(0, 64))]
    try:
      assert trial_decrypt(pool, encrypt_packet(fn, p)) == (fn.id, p)
    except AmbiguousDecrypt:
      ambiguous += 1
  assert ambiguous <= 1


def test_encrypted_header_is_anonymous():
  assert set(EncryptedPacket._fields) == {"block_tag", "packet_index", "checksum",
                                          "masked_payload"}
