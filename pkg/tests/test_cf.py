import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tankmate import cf_combine, cf_conjunction

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestCombine:
    @pytest.mark.parametrize("x", [0.0, 0.3, 0.5, 1.0])
    def test_zero_is_identity(self, x):
        assert cf_combine(0.0, x) == x
        assert cf_combine(x, 0.0) == x

    @pytest.mark.parametrize("x", [0.0, 0.3, 0.5, 1.0])
    def test_one_absorbs(self, x):
        assert cf_combine(1.0, x) == 1.0
        assert cf_combine(x, 1.0) == 1.0

    def test_half_half(self):
        # direct evaluation: 0.5 + 0.5 * (1 - 0.5)
        assert cf_combine(0.5, 0.5) == 0.75

    @given(unit, unit)
    def test_commutative(self, a, b):
        assert cf_combine(a, b) == pytest.approx(cf_combine(b, a), abs=1e-12)

    @given(unit, unit, unit)
    def test_associative(self, a, b, c):
        left = cf_combine(cf_combine(a, b), c)
        right = cf_combine(a, cf_combine(b, c))
        assert left == pytest.approx(right, abs=1e-9)

    @given(unit, unit)
    def test_never_below_inputs_and_in_range(self, a, b):
        out = cf_combine(a, b)
        assert max(a, b) <= out <= 1.0

    @pytest.mark.parametrize("bad", [-0.1, 1.1, 2.0])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError):
            cf_combine(bad, 0.5)
        with pytest.raises(ValueError):
            cf_combine(0.5, bad)


class TestConjunction:
    def test_singleton(self):
        assert cf_conjunction([0.9]) == 0.9

    def test_minimum(self):
        assert cf_conjunction([0.9, 0.5, 0.9]) == 0.5

    def test_permutation_invariant(self):
        values = [0.2, 0.9, 0.5, 0.7]
        results = {cf_conjunction(list(p)) for p in itertools.permutations(values)}
        assert results == {0.2}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            cf_conjunction([])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            cf_conjunction([0.5, 1.2])
