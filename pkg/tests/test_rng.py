import numpy as np
import pytest

from cfrsense import rng


def _words(counter, key):
    out = rng.philox4x32(np.array(counter, dtype=np.uint64), np.array(key, dtype=np.uint64))
    return [int(w) for w in out]


class TestPhiloxKnownAnswers:
    # Published Philox4x32-10 known-answer vectors (Random123 kat_vectors).
    def test_zero_counter_zero_key(self):
        assert _words([0, 0, 0, 0], [0, 0]) == [0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8]

    def test_all_ones(self):
        ones = 0xFFFFFFFF
        assert _words([ones] * 4, [ones] * 2) == [0x408F276D, 0x41C83B0E, 0xA20BC7C6,
                                                  0x6D5451FD]

    def test_pi_digits(self):
        counter = [0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344]
        key = [0xA4093822, 0x299F31D0]
        assert _words(counter, key) == [0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1]


class TestDerivedDraws:
    def test_bits_are_words_lsb_first(self):
        key, stream = 7, 11
        w = rng.blocks(key, stream, np.uint64(0)).reshape(-1)
        expected = [(int(w[i // 32]) >> (i % 32)) & 1 for i in range(128)]
        assert rng.bits(key, stream, 128).tolist() == expected

    def test_bits_many_matches_rows(self):
        streams = np.array([3, 5, 99], dtype=np.uint64)
        many = rng.bits_many(1, streams, 300)
        for row, s in zip(many, streams):
            assert np.array_equal(row, rng.bits(1, s, 300))

    def test_uniforms_in_unit_interval(self):
        u = rng.uniforms(0, 1, 10_000)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.01

    def test_complex_normals_unit_variance(self):
        z = rng.complex_normals(3, 4, np.arange(50_000, dtype=np.uint64))
        assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.02
        assert abs(np.mean(z)) < 0.02

    def test_stream_sequence_reproducible(self):
        a, b = rng.Stream(5, 1, 2), rng.Stream(5, 1, 2)
        assert np.array_equal(a.random(7), b.random(7))
        assert np.array_equal(a.permutation(20), b.permutation(20))

    def test_permutation_is_a_permutation(self):
        p = rng.Stream(0, 9).permutation(101)
        assert sorted(p.tolist()) == list(range(101))

    def test_choice_weighted_skips_zero_weight(self):
        w = np.array([0.0, 1.0, 0.0, 3.0])
        idx = rng.Stream(0, 1).choice_weighted(w, 4000)
        assert set(np.unique(idx).tolist()) == {1, 3}
        assert abs(np.mean(idx == 3) - 0.75) < 0.03

    def test_domains_separate_streams(self):
        assert rng.derive_stream(rng.DOMAIN_BITS, 1) != rng.derive_stream(rng.DOMAIN_NOISE, 1)

    @pytest.mark.parametrize("key", [0, 2**64 - 1])
    def test_extreme_keys(self, key):
        assert rng.bits(key, 0, 10).shape == (10,)
