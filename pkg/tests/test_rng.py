import math

from hypothesis import given
from hypothesis import strategies as st

from contactqsd.rng import MASK64, Stream, derive, mix64


def test_mix64_is_64_bit():
    for x in (0, 1, MASK64, 0xDEADBEEF):
        assert 0 <= mix64(x) <= MASK64


def test_derive_depends_on_every_word():
    base = derive(42, 1, 2, 3)
    assert derive(42, 1, 2, 4) != base
    assert derive(42, 1, 3, 3) != base
    assert derive(43, 1, 2, 3) != base


def test_derive_is_order_sensitive():
    assert derive(7, 1, 2) != derive(7, 2, 1)


def test_stream_reproducible():
    a = Stream(123)
    b = Stream(123)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]


def test_next_double_in_open_interval():
    s = Stream(99)
    for _ in range(10000):
        u = s.next_double()
        assert 0.0 < u < 1.0


def test_next_double_roughly_uniform():
    s = Stream(5)
    n = 50000
    mean = sum(s.next_double() for _ in range(n)) / n
    assert abs(mean - 0.5) < 4 * math.sqrt(1 / 12 / n)


@given(n=st.integers(1, 1000))
def test_next_below_in_range(n):
    s = Stream(n)
    for _ in range(50):
        assert 0 <= s.next_below(n) < n


def test_next_below_roughly_uniform():
    s = Stream(2024)
    n = 60000
    counts = [0] * 6
    for _ in range(n):
        counts[s.next_below(6)] += 1
    for c in counts:
        assert abs(c - n / 6) < 5 * math.sqrt(n / 6)
