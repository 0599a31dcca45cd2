import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_mcp import corank1 as c1
from carnot_mcp.errors import AllZero, CutLocus, IdentityPoint, NotSkew, OutOfDomain

from oracles import fd_jacobian, literal_jacobian, random_orthogonal, random_skew, rk4_exp

P, Z = c1.Covector, c1.GroupPoint


def point(x, z):
    return Z(np.array(x, dtype=float), z)


# --- canonical form ----------------------------------------------------------


def test_canonical_examples():
    G = c1.canonicalize([[0, 1], [-1, 0]])
    assert G.alphas.tolist() == [1.0] and G.d == 1 and G.kernel_dim == 0
    assert c1.canonicalize([[0, 2], [-2, 0]]).alphas.tolist() == [2.0]


def test_rotated_block_matches_eigenvalue_oracle():
    rng = np.random.default_rng(3)
    R = random_orthogonal(3, rng)
    A = R.T @ c1.block_form(1, [3.0]) @ R
    G = c1.canonicalize(A)
    oracle = np.sort(np.abs(np.linalg.eigvals(A).imag))[-1]
    assert G.kernel_dim == 1 and G.alphas == pytest.approx([oracle], abs=1e-12)
    assert np.abs(G.O.T @ A @ G.O - G.A).max() <= 1e-10


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 7, 8])
def test_random_skew_canonicalization(k):
    rng = np.random.default_rng(k)
    for _ in range(20):
        A = random_skew(k, rng)
        G = c1.canonicalize(A)
        assert np.allclose(G.O.T @ G.O, np.eye(k), atol=1e-12)
        assert np.abs(G.O.T @ A @ G.O - G.A).max() <= 1e-10
        assert np.all(np.diff(G.alphas) >= 0) and G.kernel_dim == k % 2
        eig = np.sort(np.abs(np.linalg.eigvals(A).imag))[::-1][: 2 * G.d : 2]
        assert np.allclose(np.sort(eig), G.alphas, atol=1e-10)


def test_repeated_singular_values():
    rng = np.random.default_rng(0)
    R = random_orthogonal(5, rng)
    A = R.T @ c1.block_form(1, [1.0, 1.0]) @ R
    G = c1.canonicalize(A)
    assert G.alphas == pytest.approx([1.0, 1.0]) and G.kernel_dim == 1


def test_canonical_errors():
    with pytest.raises(NotSkew, match=r"A\[0,1\]"):
        c1.canonicalize([[0, 1], [1, 0]])
    with pytest.raises(AllZero):
        c1.canonicalize(np.zeros((3, 3)))


# --- special functions -------------------------------------------------------


@pytest.mark.parametrize("name,ref", [
    ("sinc", lambda w: mpmath.sin(w) / w),
    ("gtilde", lambda w: (mpmath.sin(w) - w * mpmath.cos(w)) / w**3),
    ("phi", lambda w: (w - mpmath.sin(w)) / mpmath.sin(w / 2) ** 2),
])
def test_stable_functions_against_high_precision(name, ref):
    mpmath.mp.dps = 50
    fn = getattr(c1, name)
    ws = np.concatenate([np.logspace(-8, 0.7, 200), [0.4999, 0.5, 0.5001]])
    for w in ws:
        exact = float(ref(mpmath.mpf(w)))
        assert fn(np.array([w]))[0] == pytest.approx(exact, rel=1e-13)
        assert fn(np.array([-w]))[0] == pytest.approx(exact if name != "phi" else -exact, rel=1e-13)


def test_phi_is_strictly_increasing():
    w = np.linspace(-2 * math.pi + 1e-3, 2 * math.pi - 1e-3, 200001)
    assert np.all(np.diff(c1.phi(w)) > 0)


# --- exponential map ---------------------------------------------------------


def test_exp_examples(h3):
    q = c1.exp(h3, P([1, 0], 0.0))
    assert q.x.tolist() == [1.0, 0.0] and q.z == 0.0
    q = c1.exp(h3, P([1, 0], math.pi))
    assert q.x == pytest.approx([0.0, 2 / math.pi], abs=1e-15)
    assert q.z == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    q = c1.exp(h3, P([0, 0], 1.7))
    assert np.all(q.x == 0) and q.z == 0.0


@pytest.mark.parametrize("m,alphas", [(0, [1]), (1, [2]), (2, [1]), (0, [0.5, 1.5]), (1, [1, 1, 3])])
def test_exp_matches_rk4(m, alphas):
    rng = np.random.default_rng(len(alphas) + m)
    G = c1.canonicalize(random_orthogonal(m + 2 * len(alphas), rng).T
                        @ c1.block_form(m, alphas) @ random_orthogonal(m + 2 * len(alphas), rng) * 0
                        + c1.block_form(m, alphas))
    k = G.k
    p = rng.normal(size=(300, k + 1))
    p *= (5 * rng.random(300) / np.linalg.norm(p, axis=1))[:, None]
    x, z = c1.exp_batch(G, p[:, :k], p[:, k])
    xr, zr = rk4_exp(G.A, p[:, :k], p[:, k])
    assert np.abs(x - xr).max() <= 1e-8 and np.abs(z - zr).max() <= 1e-8


def test_exp_in_original_basis_matches_rk4():
    rng = np.random.default_rng(11)
    A = random_skew(5, rng)
    G = c1.canonicalize(A)
    p = rng.normal(size=(200, 6))
    p *= (4 * rng.random(200) / np.linalg.norm(p, axis=1))[:, None]
    x, z = c1.exp_batch(G, G.to_canonical(p[:, :5]), p[:, 5])
    xr, zr = rk4_exp(A, p[:, :5], p[:, 5], steps=4000)
    assert np.abs(G.from_canonical(x) - xr).max() <= 1e-8 and np.abs(z - zr).max() <= 1e-8


# --- Jacobian ----------------------------------------------------------------


def test_jacobian_examples(h3):
    assert c1.jacobian(h3, P([1, 0], 0.0)) == pytest.approx(1 / 12, rel=1e-15)
    assert c1.jacobian(h3, P([1, 0], math.pi)) == pytest.approx(4 / math.pi**4, rel=1e-14)
    with pytest.raises(OutOfDomain):
        c1.jacobian(h3, P([1, 0], 2 * math.pi))


def test_jacobian_vanishes_linearly_at_the_boundary(h3):
    # J(2 pi - delta) ~ delta / (8 pi^3) as delta -> 0
    for delta in (1e-3, 1e-6, 1e-9):
        J = c1.jacobian(h3, P([1, 0], 2 * math.pi - delta))
        assert J == pytest.approx(delta / (8 * math.pi**3), rel=2 * delta + 1e-6)


def test_jacobian_matches_literal_formula():
    rng = np.random.default_rng(5)
    for m, alphas in [(0, [1]), (2, [1]), (0, [1, 2]), (1, [0.5, 1, 1.5])]:
        G = c1.from_blocks(m, alphas)
        lim = G.pz_limit
        for _ in range(200):
            px = rng.normal(size=G.k)
            pz = rng.choice([-1, 1]) * rng.uniform(0.1, lim - 0.1)
            blocks = px[m:].reshape(-1, 2)
            ref = literal_jacobian(G.alphas, (blocks**2).sum(1), pz)
            assert c1.jacobian_batch(G, px, pz) == pytest.approx(ref, rel=1e-10)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(6)
    for m, alphas in [(0, [1]), (2, [1]), (1, [1, 2])]:
        G = c1.from_blocks(m, alphas)
        for _ in range(100):
            px = rng.uniform(-2, 2, size=G.k)
            pz = rng.uniform(-G.pz_limit + 0.05, G.pz_limit - 0.05)

            def f(q):
                x, z = c1.exp_batch(G, q[:-1], q[-1])
                return np.append(x, z)

            fd = fd_jacobian(f, np.append(px, pz), step=1e-5)
            assert c1.jacobian_batch(G, px, pz) == pytest.approx(fd, rel=1e-5, abs=1e-12)


def test_jacobian_zero_iff_abnormal(kernel4):
    assert c1.jacobian(kernel4, P([1, -2, 0, 0], 1.0)) == 0.0
    assert c1.jacobian(kernel4, P([1, -2, 1e-3, 0], 1.0)) > 0.0


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.floats(-6.2, 6.2), st.floats(0, 1))
def test_jacobian_contraction_at_least_t_squared(px, pz, t):
    G = c1.from_blocks(0, [1])
    J = c1.jacobian_batch(G, np.array(px), pz)
    Jt = c1.jacobian_batch(G, t * np.array(px), t * pz)
    assert Jt >= t * t * J * (1 - 1e-12) - 1e-300


def test_contraction_equality_at_pz_zero(kernel4):
    px = np.array([0.3, 0.1, -0.5, 0.7])
    for t in (0.5, 0.1, 1e-3):
        assert c1.jacobian_batch(kernel4, t * px, 0.0) == pytest.approx(t * t * c1.jacobian_batch(kernel4, px, 0.0), rel=1e-14)


def test_injectivity_domain(h3):
    assert c1.in_injectivity_domain(h3, P([1, 0], math.pi))
    assert not c1.in_injectivity_domain(h3, P([1, 0], 2 * math.pi))
    G = c1.from_blocks(1, [1])
    for pz in (0.0, 1.0, -5.0):
        assert not c1.in_injectivity_domain(G, P([1, 0, 0], pz))


# --- logarithm and metric ----------------------------------------------------


def test_log_examples(h3):
    p = c1.log(h3, point([1, 0], 0.0))
    assert p.px.tolist() == [1.0, 0.0] and p.pz == 0.0
    p = c1.log(h3, point([0, 2 / math.pi], 1 / (2 * math.pi)))
    assert p.px == pytest.approx([1, 0], abs=1e-12) and p.pz == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(CutLocus):
        c1.log(h3, point([0, 0], 1.0))
    with pytest.raises(IdentityPoint):
        c1.log(h3, point([0, 0], 0.0))


def test_log_kernel_only_point_is_cut(kernel4):
    with pytest.raises(CutLocus):
        c1.log(kernel4, point([1, 0, 0, 0], 0.5))
    assert c1.distance(kernel4, c1.identity(kernel4), point([3, 4, 0, 0], 0.0)) == 5.0


groups = st.sampled_from([(0, (1.0,)), (2, (1.0,)), (0, (1.0, 2.0)), (1, (0.5, 1.0, 1.0))])


@given(groups, st.integers(0, 2**32 - 1))
def test_log_exp_roundtrip(spec, seed):
    m, alphas = spec
    G = c1.from_blocks(m, alphas)
    rng = np.random.default_rng(seed)
    px = rng.normal(size=G.k) * rng.uniform(0.1, 3)
    pz = rng.uniform(-1, 1) * (G.pz_limit - 0.05)
    q = c1.exp(G, P(px, pz))
    back = c1.log(G, q)
    scale = max(1.0, np.abs(np.append(px, pz)).max())
    assert np.abs(np.append(back.px, back.pz) - np.append(px, pz)).max() <= 1e-9 * scale
    assert c1.distance(G, c1.identity(G), q) == pytest.approx(np.linalg.norm(px), rel=1e-9)


def test_distance_examples(h3):
    e = c1.identity(h3)
    assert c1.distance(h3, e, point([3, 4], 0.0)) == pytest.approx(5.0, rel=1e-15)
    q = point([0, 2 / math.pi], 1 / (2 * math.pi))
    assert c1.distance(h3, e, q) == pytest.approx(1.0, rel=1e-12)
    assert c1.distance(h3, c1.dilate(h3, e, 2), c1.dilate(h3, q, 2)) == pytest.approx(2.0, rel=1e-12)
    assert c1.distance(h3, q, q) == 0.0


def test_group_law_examples(h3):
    e = c1.identity(h3)
    q = point([0.3, -1.2], 0.7)
    for r in (c1.group_mul(h3, e, q), c1.group_mul(h3, q, e)):
        assert r.x.tolist() == q.x.tolist() and r.z == q.z
    r = c1.group_mul(h3, point([1, 0], 0), point([0, 1], 0))
    assert r.x.tolist() == [1, 1] and r.z == 0.5
    r = c1.group_mul(h3, q, c1.group_inv(h3, q))
    assert np.all(r.x == 0) and r.z == 0
    d = c1.dilate(h3, point([1, 0], 1.0), 2)
    assert d.x.tolist() == [2, 0] and d.z == 4


def test_left_translation_pushes_frame_to_frame():
    # (dL_a) X_i(e) = X_i(a) for the frame X_i = d_i - 1/2 sum_j A_ij x_j d_z
    rng = np.random.default_rng(8)
    G = c1.canonicalize(random_skew(4, rng))
    A = G.A
    a = point(rng.normal(size=4), rng.normal())
    h = 1e-6
    for i in range(4):
        e_i = np.eye(4)[i]
        plus = c1.group_mul(G, a, point(h * e_i, 0.0))
        minus = c1.group_mul(G, a, point(-h * e_i, 0.0))
        dx = (plus.x - minus.x) / (2 * h)
        dz = (plus.z - minus.z) / (2 * h)
        assert dx == pytest.approx(e_i, abs=1e-9)
        assert dz == pytest.approx(-0.5 * (A[i] @ a.x), abs=1e-8)


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_group_axioms_and_dilations(seed, eps):
    rng = np.random.default_rng(seed)
    G = c1.from_blocks(1, [1.0, 2.0])
    a, b, c = (point(rng.normal(size=5), rng.normal()) for _ in range(3))
    ab_c = c1.group_mul(G, c1.group_mul(G, a, b), c)
    a_bc = c1.group_mul(G, a, c1.group_mul(G, b, c))
    assert np.allclose(ab_c.as_array(), a_bc.as_array(), atol=1e-12)
    lhs = c1.dilate(G, c1.group_mul(G, a, b), eps)
    rhs = c1.group_mul(G, c1.dilate(G, a, eps), c1.dilate(G, b, eps))
    assert np.allclose(lhs.as_array(), rhs.as_array(), rtol=1e-12, atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 20))
def test_dilation_of_exp_keeps_pz(seed, eps):
    rng = np.random.default_rng(seed)
    G = c1.from_blocks(2, [1.0])
    px, pz = rng.normal(size=4), rng.uniform(-6, 6)
    lhs = c1.dilate(G, c1.exp(G, P(px, pz)), eps)
    rhs = c1.exp(G, P(eps * px, pz))
    assert np.allclose(lhs.as_array(), rhs.as_array(), rtol=1e-12, atol=1e-14)


def test_metric_identities_on_random_samples(h3):
    rng = np.random.default_rng(9)
    for _ in range(100):
        a, b, c = (point(rng.normal(size=2), rng.normal()) for _ in range(3))
        d = c1.distance(h3, b, c)
        assert c1.distance(h3, c1.group_mul(h3, a, b), c1.group_mul(h3, a, c)) == pytest.approx(d, rel=1e-9)
        eps = rng.uniform(0.1, 5)
        assert c1.distance(h3, c1.dilate(h3, b, eps), c1.dilate(h3, c, eps)) == pytest.approx(eps * d, rel=1e-9)
        assert c1.distance(h3, c, b) == pytest.approx(d, rel=1e-9)


def test_homothety(h3):
    e = c1.identity(h3)
    y = point([0, 2 / math.pi], 1 / (2 * math.pi))
    mid = c1.homothety(h3, e, y, 0.5)
    assert mid.x == pytest.approx([1 / math.pi, 1 / math.pi], rel=1e-12)
    assert mid.z == pytest.approx((math.pi / 2 - 1) / (2 * math.pi**2), rel=1e-12)
    assert mid.z == pytest.approx(0.0289169, abs=1e-7)
    rng = np.random.default_rng(10)
    for _ in range(50):
        x0 = point(rng.normal(size=2), rng.normal())
        y = point(rng.normal(size=2), rng.normal())
        t = rng.random()
        end = c1.homothety(h3, x0, y, 1.0)
        assert np.allclose(end.as_array(), y.as_array(), atol=1e-9)
        assert c1.homothety(h3, x0, y, 0.0).as_array() == pytest.approx(x0.as_array(), abs=1e-12)
        d = c1.distance(h3, x0, y)
        assert c1.distance(h3, x0, c1.homothety(h3, x0, y, t)) == pytest.approx(t * d, rel=1e-8, abs=1e-12)


# --- the g inequality --------------------------------------------------------


def test_g_examples():
    x, t = math.pi / 2, 0.5
    assert float(c1.g_function(np.array(x))) == pytest.approx(1.0)
    assert float(c1.g_function(np.array(t * x))) == pytest.approx(math.sqrt(2) / 2 * (1 - math.pi / 4))
    assert c1.g_contraction_check(3, [x], [t]).passed
    assert c1.g_contraction_check(3).passed
    lo = float(c1.g_function(np.array(0.05)))
    hi = 0.25 * float(c1.g_function(np.array(0.1)))
    # t^2 g(0.1) = 0.25 * 3.3300e-4; g(x) = x^3/3 - x^5/30 + ...
    assert lo == pytest.approx(4.1656e-5, rel=1e-4) and hi == pytest.approx(8.3250e-5, rel=1e-4)
    res = c1.g_contraction_check(2, [0.1], [0.5])
    assert not res.passed and res.witness == (0.1, 0.5)


def test_f_is_nonnegative():
    s = np.linspace(1e-6, math.pi - 1e-6, 10001)
    assert np.all(c1.f_function(s) >= 0)
    mpmath.mp.dps = 40
    for v in (1e-3, 0.5, 0.999, 1.0, 2.0):
        ref = (3 - mpmath.mpf(v) ** 2) * mpmath.sin(v) - 3 * v * mpmath.cos(v)
        assert float(c1.f_function(np.array(v))) == pytest.approx(float(ref), rel=1e-12)
