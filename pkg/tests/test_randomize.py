import numpy as np
import pytest
from scipy import stats

from qmcmedian import gf2, nets, walsh
from qmcmedian import randomize as R
from qmcmedian.gf2 import DomainError


def test_crd_deterministic(make_rng):
    a = R.completely_random_design(3, 5, make_rng("crd", 1))
    b = R.completely_random_design(3, 5, make_rng("crd", 1))
    assert np.array_equal(a.columns, b.columns) and np.array_equal(a.shifts, b.shifts)


def test_crd_point_marginally_uniform(make_rng):
    vals = np.empty(10_000)
    for rep in range(vals.size):
        net = R.completely_random_design(2, 4, make_rng("marg", rep))
        vals[rep] = nets.to_unit(nets.generate_point(net, 5))[1]
    assert abs(vals.mean() - 0.5) < 0.02


def test_crd_zero_m_is_single_uniform_point(make_rng):
    real = R.randomize(R.CompletelyRandom(3, 0), make_rng("m0"))
    pts = real()
    assert pts.shape == (1, 3)
    assert np.array_equal(pts[0], real.net.shifts)


def test_crd_dual_probability(make_rng):
    # Pr(Z(k) = 1) = 2^-m for every nonzero k
    m, draws = 3, 100_000
    cols = gf2.random_words(64, (draws, 2, m), make_rng("zk"))
    p = 2.0**-m
    sigma = np.sqrt(p * (1 - p) / draws)
    for k in [(1, 0), (0, 5), (3, 1 << 40), ((1 << 63) | 1, 2)]:
        freq = walsh.Z_batch(walsh.WalshIndex(k), cols).mean()
        assert abs(freq - p) < 3 * sigma


def test_linear_scramble_identity_draw(zero_rng):
    base = nets.sobol_net(3, 6)
    out = R.linear_scramble(base, zero_rng)
    assert np.array_equal(nets.generate_pointset(out), nets.generate_pointset(base))


def test_linear_scramble_matches_matrix_product(make_rng):
    g = make_rng("prod")
    base = nets.sobol_net(3, 5)
    lower = gf2.lower_triangular_words(64, 5, 3, g)
    cols = R.scramble_columns(base.columns, lower)
    for j in range(3):
        M = gf2.BitMatrix(64, 5, tuple(int(w) for w in lower[j]))
        B = gf2.BitMatrix(5, 5, tuple(int(w) for w in base.columns[j]))
        assert cols[j].tolist() == list((M @ B).columns)


def test_linear_scramble_prefix_bijective(make_rng):
    m = 6
    base = nets.sobol_net(2, m)
    out = R.linear_scramble(base, make_rng("bij")).unshifted()
    top = np.uint64(64 - m)
    pts = nets.generate_pointset(out) >> top
    base_pts = nets.generate_pointset(base) >> top
    for j in range(2):
        assert len(set(pts[:, j].tolist())) == 1 << m
        assert len(set(zip(base_pts[:, j].tolist(), pts[:, j].tolist()))) == 1 << m


@pytest.mark.parametrize("m", range(2, 9))
def test_linear_scramble_preserves_t(make_rng, m):
    base = nets.sobol_net(2, m)
    for seed in range(5):
        out = R.linear_scramble(base, make_rng("t", m, seed)).unshifted()
        assert nets.verify_net(nets.generate_pointset(out), 0)


def test_linear_scramble_rejects_tall_base(make_rng):
    tall = nets.NetDefinition(np.array([[1 << 10]], dtype=np.uint64), np.zeros(1, dtype=np.uint64))
    with pytest.raises(DomainError):
        R.linear_scramble(tall, make_rng())


def test_rls_first_point_is_shift(make_rng):
    real = R.randomize(R.LinearScramble(nets.sobol_net(4, 7)), make_rng("first"))
    assert np.array_equal(real()[0], real.net.shifts)


def test_shift_only_zero_draw_is_base(zero_rng):
    base = nets.sobol_net(3, 5)
    real = R.randomize(R.DigitalShiftOnly(base), zero_rng)
    assert np.array_equal(real(), nets.generate_pointset(base))


def test_each_point_uniform_per_bit(make_rng):
    # digital shift makes every digit of every point a fair coin
    kinds = [R.CompletelyRandom(2, 5), R.LinearScramble(nets.sobol_net(2, 5)), R.OwenScramble(nets.sobol_net(2, 5))]
    for kind in kinds:
        words = np.array([R.randomize(kind, make_rng("bits", rep))()[7] for rep in range(4000)])
        bits = (words[:, :, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)
        freq = bits.mean(axis=0)
        assert np.all(np.abs(freq - 0.5) < 0.04), type(kind).__name__
        assert abs(nets.to_unit(words).mean() - 0.5) < 0.02


# ------------------------------------------------------------------- Owen


def test_owen_vectorized_matches_reference(make_rng):
    g = make_rng("ref")
    tree = R.ScrambleTree(987654321)
    x = g.integers(0, 1 << 64, size=300, dtype=np.uint64)
    x[:100] &= np.uint64(gf2.top_mask(9))
    x[100:110] = 0
    for depth in (64, 30, 1):
        vec = R.owen_scramble(tree, x, 2, depth)
        ref = [R.owen_scramble_point(tree, int(v), 2, depth) for v in x]
        assert vec.tolist() == ref


def test_owen_prefix_equivalence(make_rng):
    g = make_rng("prefix")
    tree = R.ScrambleTree(42)
    for _ in range(300):
        a, b = (int(v) for v in g.integers(0, 1 << 64, size=2, dtype=np.uint64))
        l = int(g.integers(0, 65))
        b = (a & gf2.top_mask(l)) | (b & ~gf2.top_mask(l) & ((1 << 64) - 1))
        sa, sb = R.owen_scramble_point(tree, a, 0), R.owen_scramble_point(tree, b, 0)
        common_in = 64 - (a ^ b).bit_length()
        common_out = 64 - (sa ^ sb).bit_length()
        assert common_in == common_out


def test_owen_bit_is_pure():
    tree = R.ScrambleTree(7)
    assert tree.bit(3, 10, 0b101) == R.ScrambleTree(7).bit(3, 10, 0b101)


def test_owen_fixed_input_uniform(make_rng):
    keys = make_rng("ks").integers(0, 1 << 64, size=10_000, dtype=np.uint64)
    x = int(nets.from_unit(0.3)[()]) & gf2.top_mask(16)
    vals = nets.to_unit(np.array([R.owen_scramble(R.ScrambleTree(int(k)), np.array([x], dtype=np.uint64), 0)[0] for k in keys]))
    assert stats.kstest(vals, "uniform").pvalue > 0.01


@pytest.mark.parametrize("m", [1, 4, 8])
def test_owen_preserves_0m2_net(make_rng, m):
    base = nets.sobol_net(2, m)
    for seed in range(100):
        pts = R.randomize(R.OwenScramble(base), make_rng("owen-net", m, seed))()
        assert nets.verify_net(pts, 0)


def test_owen_preserves_cell_counts_at_every_level(make_rng):
    # 1-d: a (0, m, 1)-net stays one point per level-l cell group
    m = 7
    pts = R.randomize(R.OwenScramble(nets.sobol_net(1, m)), make_rng("lvl"))()[:, 0]
    for l in range(1, m + 1):
        counts = np.bincount((pts >> np.uint64(64 - l)).astype(np.int64), minlength=1 << l)
        assert np.all(counts == 1 << (m - l))


def test_unknown_kind_rejected(make_rng):
    with pytest.raises(TypeError):
        R.randomize("owen", make_rng())
