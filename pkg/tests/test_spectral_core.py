import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgt_spectral.errors import ShapeError, UnsupportedBasisError
from mgt_spectral.spectral_core import (Basis, Coords, EigenSequence, SpectralState, analyze,
                                        dirichlet_eigs, frac_apply, grid_l2_norm, grid_points,
                                        natural_to_reduced, product_norm, reduced_to_natural,
                                        scale_norm, synthesize, z_norm)


def sine_matrix(eigs):
    """Brute-force O(N^2) evaluation matrix phi_n(x_j)."""
    x = grid_points(eigs)
    n = np.arange(1, len(eigs) + 1)
    return math.sqrt(2 / eigs.length) * np.sin(np.outer(x, n) * np.pi / eigs.length)


def unit(n, k=0):
    e = np.zeros(n, dtype=complex)
    e[k] = 1
    return e


class TestDirichletEigs:
    def test_unit_interval_is_squares(self):
        np.testing.assert_allclose(dirichlet_eigs(3, math.pi).values, [1, 4, 9], rtol=1e-15)

    def test_length_one(self):
        np.testing.assert_allclose(dirichlet_eigs(1, 1.0).values, [9.8696044010893586], rtol=1e-15)

    def test_length_two(self):
        np.testing.assert_allclose(dirichlet_eigs(2, 2.0).values, [math.pi**2 / 4, math.pi**2])

    @pytest.mark.parametrize("n, L", [(0, 1.0), (-2, 1.0), (2.5, 1.0), (3, 0.0), (3, -1.0)])
    def test_invalid(self, n, L):
        with pytest.raises(ValueError):
            dirichlet_eigs(n, L)

    def test_source_and_length(self):
        e = dirichlet_eigs(4, 2.5)
        assert e.source is Basis.DIRICHLET_1D and e.length == 2.5 and len(e) == 4


class TestEigenSequence:
    @pytest.mark.parametrize("vals", [[], [1, 1], [2, 1], [0, 1], [-1, 2], [1, np.inf]])
    def test_rejects_bad_values(self, vals):
        with pytest.raises(ValueError):
            EigenSequence.user(vals)

    def test_json_roundtrip(self):
        e = EigenSequence.user([0.5, 2.0, 7.25])
        back = EigenSequence.from_json(e.to_json())
        np.testing.assert_array_equal(back.values, e.values)
        assert json.loads(e.to_json()) == [0.5, 2.0, 7.25]

    def test_values_read_only(self):
        e = dirichlet_eigs(3)
        with pytest.raises(ValueError):
            e.values[0] = 5.0

    def test_cube_roots(self):
        np.testing.assert_allclose(EigenSequence.user([1, 8, 27]).cube_roots, [1, 2, 3])


class TestFracApply:
    def test_alpha_zero_identity(self):
        v = np.array([1 + 2j, -3, 0.5j])
        np.testing.assert_array_equal(frac_apply(0, v, dirichlet_eigs(3)), v)

    def test_cube_root(self):
        e = EigenSequence.user([8.0])
        assert frac_apply(1 / 3, [1.0], e)[0] == pytest.approx(2.0, rel=1e-15)
        assert frac_apply(-1 / 3, [1.0], e)[0] == pytest.approx(0.5, rel=1e-15)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            frac_apply(0.5, [1, 2], dirichlet_eigs(3))

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([1 / 3, -1 / 3, 2 / 3, -2 / 3]),
           st.sampled_from([1 / 3, -1 / 3, 2 / 3, -2 / 3]),
           st.integers(0, 2**31))
    def test_power_law(self, al, be, seed):
        rng = np.random.default_rng(seed)
        e = dirichlet_eigs(12)
        c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        lhs = frac_apply(al, frac_apply(be, c, e), e)
        rhs = frac_apply(al + be, c, e)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestNorms:
    def test_half_power(self):
        assert scale_norm(0.5, [1.0], EigenSequence.user([4.0])) == pytest.approx(2.0, rel=1e-15)

    def test_euclidean(self):
        assert scale_norm(0, [3, 4], dirichlet_eigs(2)) == 5.0

    def test_two_modes(self):
        e = EigenSequence.user([1.0, 8.0])
        brute = math.sqrt(sum((m ** (1 / 3)) ** 2 for m in (1.0, 8.0)))
        assert scale_norm(1 / 3, [1, 1], e) == pytest.approx(math.sqrt(5), rel=1e-15)
        assert scale_norm(1 / 3, [1, 1], e) == pytest.approx(brute, rel=1e-15)

    def test_consistent_with_frac_apply(self):
        rng = np.random.default_rng(3)
        e = dirichlet_eigs(20)
        c = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        for al in (-1, -1 / 3, 0.5, 1):
            assert scale_norm(al, c, e) == scale_norm(0, frac_apply(al, c, e), e)

    def test_bit_stable(self):
        rng = np.random.default_rng(4)
        e = dirichlet_eigs(300)
        c = rng.standard_normal(300)
        assert len({scale_norm(1 / 3, c.copy(), e) for _ in range(5)}) == 1

    def test_z_norm_examples(self):
        assert z_norm(SpectralState.zeros(3), dirichlet_eigs(3)) == 0.0
        e1 = EigenSequence.user([1.0])
        assert z_norm(SpectralState([1], [0], [0]), e1) == pytest.approx(1.0, rel=1e-15)
        e8 = EigenSequence.user([8.0])
        st8 = SpectralState([1], [1], [1])
        assert z_norm(st8, e8) == pytest.approx(math.sqrt(21), rel=1e-14)
        parts = [scale_norm(a, [1], e8) ** 2 for a in (2 / 3, 1 / 3, 0)]
        assert z_norm(st8, e8) == pytest.approx(math.sqrt(sum(parts)), rel=1e-15)

    def test_product_norm(self):
        e = dirichlet_eigs(2)
        assert product_norm(([3, 0], [0, 4]), (0, 0), e) == pytest.approx(5.0)

    def test_z_norm_shape_error(self):
        with pytest.raises(ShapeError):
            z_norm(SpectralState.zeros(2), dirichlet_eigs(3))


class TestState:
    def test_unequal_lengths(self):
        with pytest.raises(ShapeError):
            SpectralState([1, 2], [1], [1, 2])

    def test_stacked_roundtrip(self):
        s = SpectralState([1, 2], [3, 4], [5, 6j], Coords.NATURAL)
        back = SpectralState.from_stacked(s.stacked(), s.coords)
        np.testing.assert_array_equal(back.stacked(), s.stacked())
        assert back.coords is Coords.NATURAL

    def test_conversion_identity(self):
        e = EigenSequence.user([8.0])
        red = natural_to_reduced(SpectralState([1.0], [0.0], [0.0], Coords.NATURAL), e)
        # v = u_t + A^{1/3}u = A^{1/3}u0; w = u_tt + A^{1/3}u_t = 0 at rest
        np.testing.assert_array_equal(red.stacked(), [[1, 2, 0]])
        moving = natural_to_reduced(SpectralState([1.0], [3.0], [5.0], Coords.NATURAL), e)
        np.testing.assert_array_equal(moving.stacked(), [[1, 3 + 2, 5 + 2 * 3]])

    def test_conversion_roundtrip(self):
        rng = np.random.default_rng(5)
        e = dirichlet_eigs(6)
        nat = SpectralState(*rng.standard_normal((3, 6)), Coords.NATURAL)
        back = reduced_to_natural(natural_to_reduced(nat, e), e)
        np.testing.assert_allclose(back.stacked(), nat.stacked(), atol=1e-13)

    def test_conversion_checks_coords(self):
        e = dirichlet_eigs(2)
        with pytest.raises(ValueError):
            natural_to_reduced(SpectralState.zeros(2, Coords.REDUCED), e)
        with pytest.raises(ValueError):
            reduced_to_natural(SpectralState.zeros(2, Coords.NATURAL), e)


class TestGridTransform:
    def test_single_mode(self):
        e = dirichlet_eigs(8, 2.0)
        field = synthesize(unit(8), e)
        x = grid_points(e)
        np.testing.assert_allclose(field, math.sqrt(2 / 2.0) * np.sin(np.pi * x / 2.0), atol=1e-14)
        np.testing.assert_allclose(analyze(field, e), unit(8), atol=1e-12)

    def test_zero(self):
        e = dirichlet_eigs(5)
        np.testing.assert_array_equal(synthesize(np.zeros(5), e), np.zeros(5))

    @pytest.mark.parametrize("n", [1, 2, 8, 16, 64])
    def test_roundtrip_and_brute_force(self, n):
        rng = np.random.default_rng(n)
        e = dirichlet_eigs(n, 1.7)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        np.testing.assert_allclose(synthesize(c, e), sine_matrix(e) @ c, atol=1e-12)
        assert np.linalg.norm(analyze(synthesize(c, e), e) - c) <= 1e-12 * max(1, np.linalg.norm(c))

    @pytest.mark.parametrize("n", [1, 8, 64])
    def test_parseval(self, n):
        rng = np.random.default_rng(10 + n)
        e = dirichlet_eigs(n, 3.0)
        c = rng.standard_normal(n)
        lhs = scale_norm(0, c, e) ** 2
        assert grid_l2_norm(synthesize(c, e), e) ** 2 == pytest.approx(lhs, rel=1e-10)

    def test_user_basis_unsupported(self):
        e = EigenSequence.user([1.0, 2.0])
        with pytest.raises(UnsupportedBasisError):
            synthesize([1, 0], e)
        with pytest.raises(UnsupportedBasisError):
            analyze([1, 0], e)
