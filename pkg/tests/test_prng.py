from collections import Counter

import pytest

from rebac.prng import Xoshiro256, fnv1a64, stream


def test_same_seed_same_sequence():
    a = Xoshiro256(12345)
    b = Xoshiro256(12345)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_outputs_are_64_bit():
    rng = Xoshiro256(7)
    for _ in range(1000):
        assert 0 <= rng.next_u64() < 1 << 64


def test_streams_are_independent():
    seq = {label: [stream(99, label).next_u64() for _ in range(5)]
           for label in ("rbac", "labels", "policy", "requests/one-of")}
    values = list(seq.values())
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            assert values[i] != values[j]


def test_fnv1a64_reference_values():
    # published FNV-1a test vectors
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a64("foobar") == 0x85944171F73967E8


def test_randrange_covers_domain_uniformly_enough():
    rng = Xoshiro256(3)
    counts = Counter(rng.randrange(5) for _ in range(5000))
    assert set(counts) == {0, 1, 2, 3, 4}
    assert all(800 < c < 1200 for c in counts.values())


def test_randrange_rejects_non_positive():
    with pytest.raises(ValueError):
        Xoshiro256(1).randrange(0)


def test_sample_indices_are_distinct_and_in_range():
    rng = Xoshiro256(11)
    for n, k in [(10, 10), (100, 7), (670, 300)]:
        picked = rng.sample_indices(n, k)
        assert len(picked) == len(set(picked)) == k
        assert all(0 <= i < n for i in picked)
    with pytest.raises(ValueError):
        rng.sample_indices(3, 4)


def test_sample_preserves_determinism():
    seq = list(range(50))
    assert Xoshiro256(8).sample(seq, 10) == Xoshiro256(8).sample(seq, 10)


def test_generator_regression_pins():
    # frozen outputs guard against accidental algorithm changes that would
    # silently re-randomize every published fixture
    rng = Xoshiro256(0)
    first = [rng.next_u64() for _ in range(3)]
    assert first == [11091344671253066420, 13793997310169335082, 1900383378846508768]
    assert stream(42, "rbac").next_u64() == 7561719548394110847
