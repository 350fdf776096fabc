from __future__ import annotations

from cwb import direct_factorization, is_prime_power


def test_is_prime_power():
    primes = [p for p in range(2, 130) if all(p % d for d in range(2, p))]
    powers = {1}
    for p in primes:
        q = p
        while q < 130:
            powers.add(q)
            q *= p
    for m in range(1, 130):
        assert is_prime_power(m) == (m in powers)
    assert not is_prime_power(0)


def test_z6_splits_into_2_and_3(z6):
    f = direct_factorization(z6)
    assert sorted(f.sizes) == [2, 3]
    assert f.all_prime_power
    # Kernels are the 3-block and 2-block coset partitions in some order.
    kernel_blocks = {tuple(sorted(len(b) for b in k.blocks())) for k in f.kernels}
    assert kernel_blocks == {(2, 2, 2), (3, 3)}


def test_z4_is_directly_indecomposable(z4):
    f = direct_factorization(z4)
    assert f.sizes == (4,)
    assert f.prime_power == (True,)
    assert f.iso == tuple(range(4))


def test_z2x2_splits(z2x2):
    f = direct_factorization(z2x2)
    assert sorted(f.sizes) == [2, 2]
    assert f.all_prime_power


def test_trivial_single_factor(trivial):
    f = direct_factorization(trivial)
    assert f.sizes == (1,)
    assert f.all_prime_power


def test_s3_indecomposable_not_prime_power(s3):
    f = direct_factorization(s3)
    assert f.sizes == (6,)
    assert not f.all_prime_power


def test_d4_single_prime_power_factor(d4):
    f = direct_factorization(d4)
    assert f.sizes == (8,)
    assert f.all_prime_power


def test_iso_map_is_operation_preserving(z6):
    """Rebuild the product algebra and check the map explicitly."""
    from itertools import product as iproduct

    f = direct_factorization(z6)
    sizes = f.sizes
    for op_index, (_, arity) in enumerate(z6.signature):
        for args in iproduct(range(6), repeat=arity):
            image = f.iso[z6.apply(op_index, *args)]
            parts = []
            for fi, factor in enumerate(f.factors):
                coords = []
                for a in args:
                    r = f.iso[a]
                    for fj in range(len(sizes) - 1, fi, -1):
                        r //= sizes[fj]
                    coords.append(r % sizes[fi])
                parts.append(factor.apply(op_index, *coords))
            rank = 0
            for p, s in zip(parts, sizes):
                rank = rank * s + p
            assert image == rank
