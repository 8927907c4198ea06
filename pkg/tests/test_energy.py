import numpy as np
import pytest

from fracteig.energy import (
    FracParams,
    apply_Lp,
    gagliardo_energy,
    rayleigh_gradient,
    rayleigh_quotient,
    surface_measure,
)
from fracteig.geometry import (
    GridFunction,
    build_interval,
    distance_to_complement,
    high_ridge,
    nearest_node,
)
from fracteig.infinity import representation


def random_function(dom, seed, signed=True):
    rng = np.random.default_rng(seed)
    vals = np.where(dom.inside_flat, rng.normal(size=dom.n_nodes), 0.0)
    if not signed:
        vals = np.abs(vals)
    return GridFunction(dom, vals.reshape(dom.lattice_shape))


def brute_quotient(u, prm):
    """Direct double sum over the lattice, no chunking, no log tricks."""
    dom = u.domain
    h, n = dom.h, dom.dim
    flat = u.flat()
    coords = dom.node_coords
    inside = np.flatnonzero(dom.inside_flat)
    num = 0.0
    for i in inside:
        for j in range(dom.n_nodes):
            if j == i:
                continue
            w = np.linalg.norm(coords[i] - coords[j]) ** (-prm.ap)
            if dom.inside_flat[j]:
                num += abs(flat[j] - flat[i]) ** prm.p * w * h ** (2 * n)
            else:
                num += 2.0 * abs(flat[i]) ** prm.p * w * h ** (2 * n)
        near = min(coords[i, 0] - dom.box_lo[0], dom.box_hi[0] - coords[i, 0])
        far = max(coords[i, 0] - dom.box_lo[0], dom.box_hi[0] - coords[i, 0])
        sig = surface_measure(n)
        tail = lambda d: 2.0 * sig * d ** (n - prm.ap) / (prm.ap - n) * h ** n
        num += abs(flat[i]) ** prm.p * 0.5 * (tail(near) + tail(far))
    den = np.sum(np.abs(flat[inside]) ** prm.p) * h ** n
    return num / den


def test_params_validation():
    with pytest.raises(ValueError, match="alpha must lie in"):
        FracParams(0.0, 2.0)
    with pytest.raises(ValueError, match="alpha must lie in"):
        FracParams(1.5, 2.0)
    with pytest.raises(ValueError, match="p must be finite and >= 2"):
        FracParams(0.5, 1.5)
    with pytest.raises(ValueError, match="<= n = 1"):
        FracParams(0.3, 2.0).validate_for_dim(1)
    # alpha <= 1 makes the upper window bound automatic; the plane still
    # rejects alpha*p = 2 at the lower end
    with pytest.raises(ValueError, match="<= n = 2"):
        FracParams(1.0, 2.0).validate_for_dim(2)


def test_params_flags():
    f = FracParams(0.75, 4.0).flags(1)  # ap = 3
    assert f["narrow_window"]       # 3 < 1 + 4 - 1
    assert f["regularity_window"]   # 3 > 2
    f = FracParams(0.6, 2.0).flags(1)  # ap = 1.2
    assert f["narrow_window"]
    assert not f["regularity_window"]


def test_zero_function_energy():
    dom = build_interval(0.0, 1.0, 0.25)
    u = GridFunction(dom, np.zeros(dom.lattice_shape))
    b = gagliardo_energy(u, FracParams(0.75, 2.0))
    assert b.interior == 0.0 and b.cross == 0.0
    assert b.tail_lower == 0.0 and b.tail_upper == 0.0
    with pytest.raises(ValueError, match="quotient undefined for the zero function"):
        rayleigh_quotient(u, FracParams(0.75, 2.0))


@pytest.mark.parametrize("alpha,p", [(0.75, 2.0), (0.6, 3.0)])
def test_single_node_cross_by_hand(alpha, p):
    """One inside node at 0, h=1, box [-3,3]: the whole energy is explicit."""
    dom = build_interval(-1.0, 1.0, 1.0, margin=1.0)
    assert dom.inside_count == 1
    u = GridFunction.from_inside(dom, np.array([1.0]))
    prm = FracParams(alpha, p)
    b = gagliardo_energy(u, prm)
    ap = alpha * p
    assert b.interior == 0.0
    expected_cross = 2.0 * 2.0 * (1.0 + 2.0 ** (-ap) + 3.0 ** (-ap))
    assert b.cross == pytest.approx(expected_cross, rel=1e-14)
    # both box endpoints sit at distance 3, so the bracket collapses
    expected_tail = 2.0 * 2.0 * 3.0 ** (1.0 - ap) / (ap - 1.0)
    assert b.tail_lower == pytest.approx(expected_tail, rel=1e-14)
    assert b.tail_width == pytest.approx(0.0, abs=1e-16)


def test_energy_homogeneity():
    dom = build_interval(0.0, 1.0, 1 / 8)
    u = random_function(dom, 1)
    v = GridFunction(dom, 2.0 * u.values)
    prm = FracParams(0.6, 3.5)
    a, b = gagliardo_energy(u, prm), gagliardo_energy(v, prm)
    c = 2.0 ** 3.5
    assert b.interior == pytest.approx(c * a.interior, rel=1e-13)
    assert b.cross == pytest.approx(c * a.cross, rel=1e-13)
    assert b.tail_lower == pytest.approx(c * a.tail_lower, rel=1e-13)
    assert b.tail_upper == pytest.approx(c * a.tail_upper, rel=1e-13)


def test_breakdown_nonnegative_and_ordered():
    dom = build_interval(0.0, 1.0, 1 / 10)
    for seed in range(4):
        b = gagliardo_energy(random_function(dom, seed), FracParams(0.7, 2.5))
        assert b.interior >= 0.0 and b.cross >= 0.0
        assert 0.0 <= b.tail_lower <= b.tail_upper
        assert b.total == pytest.approx(b.interior + b.cross + b.tail_mid)


@pytest.mark.parametrize("alpha,p", [(0.75, 2.0), (0.5, 8.0), (0.5, 16.0), (0.6, 3.5)])
def test_quotient_against_brute_force(alpha, p):
    dom = build_interval(0.0, 1.0, 1 / 12)
    u = random_function(dom, 42)
    got = rayleigh_quotient(u, FracParams(alpha, p))
    want = brute_quotient(u, FracParams(alpha, p))
    assert got == pytest.approx(want, rel=1e-13)


def test_quotient_zero_homogeneity():
    dom = build_interval(0.0, 1.0, 1 / 16)
    u = random_function(dom, 5)
    prm = FracParams(0.6, 4.0)
    q = rayleigh_quotient(u, prm)
    # scaling by a power of two is exact in floating point
    assert rayleigh_quotient(GridFunction(dom, 2.0 * u.values), prm) == q
    assert rayleigh_quotient(GridFunction(dom, 3.0 * u.values), prm) == pytest.approx(q, rel=1e-13)
    assert rayleigh_quotient(GridFunction(dom, -u.values), prm) == q


def test_modulus_contraction():
    dom = build_interval(0.0, 1.0, 1 / 16)
    prm = FracParams(0.75, 3.0)
    u = random_function(dom, 9)
    assert np.any(u.inside_values() < 0) and np.any(u.inside_values() > 0)
    v = GridFunction(dom, np.abs(u.values))
    assert rayleigh_quotient(v, prm) < rayleigh_quotient(u, prm)


def test_exact_scaling_law():
    """Doubling the domain and the spacing rescales the quotient by k^(n-ap)."""
    k = 2.0
    for alpha, p in ((0.75, 4.0), (0.6, 8.0)):
        prm = FracParams(alpha, p)
        dom1 = build_interval(0.0, 1.0, 1 / 16)
        dom2 = build_interval(0.0, 2.0, 2 / 16)
        vals = random_function(dom1, 17).values
        u1 = GridFunction(dom1, vals)
        u2 = GridFunction(dom2, vals)
        q1 = rayleigh_quotient(u1, prm)
        q2 = rayleigh_quotient(u2, prm)
        assert q2 == pytest.approx(k ** (1 - alpha * p) * q1, rel=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.5, 8.0])
def test_gradient_matches_central_differences(p):
    dom = build_interval(0.0, 1.0, 1 / 12)
    prm = FracParams(0.6, p)
    u = random_function(dom, 23)
    g = rayleigh_gradient(u, prm).inside_values()
    rng = np.random.default_rng(24)
    eps = 1e-6
    for _ in range(5):
        v = rng.normal(size=dom.inside_count)
        v /= np.linalg.norm(v)

        def q_at(s):
            w = u.flat().copy()
            w[dom.inside_indices] += s * v
            return rayleigh_quotient(GridFunction(dom, w.reshape(dom.lattice_shape)), prm)

        fd = (q_at(eps) - q_at(-eps)) / (2.0 * eps)
        gv = float(g @ v)
        assert abs(fd - gv) <= 1e-6 * max(abs(gv), abs(fd))


def test_gradient_zero_homogeneity():
    dom = build_interval(0.0, 1.0, 1 / 12)
    prm = FracParams(0.7, 3.0)
    u = random_function(dom, 31)
    g1 = rayleigh_gradient(u, prm).inside_values()
    g2 = rayleigh_gradient(GridFunction(dom, 2.0 * u.values), prm).inside_values()
    np.testing.assert_allclose(g2, g1 / 2.0, rtol=1e-12, atol=1e-14)


def test_gradient_vanishes_outside():
    dom = build_interval(0.0, 1.0, 1 / 12)
    g = rayleigh_gradient(random_function(dom, 2), FracParams(0.7, 3.0))
    assert np.all(g.flat()[~dom.inside_flat] == 0.0)


def test_apply_Lp_zero_and_range():
    dom = build_interval(0.0, 1.0, 0.25)
    u = GridFunction(dom, np.zeros(dom.lattice_shape))
    prm = FracParams(0.75, 2.0)
    for ix in dom.inside_indices:
        assert apply_Lp(u, prm, int(ix)) == 0.0
    with pytest.raises(ValueError, match="out of range"):
        apply_Lp(u, prm, dom.n_nodes)


def test_apply_L2_odd_symmetry():
    # odd function about the midpoint of a symmetric lattice: both half-sums cancel
    dom = build_interval(0.0, 2.0, 0.25)
    xs = dom.inside_coords[:, 0]
    u = GridFunction.from_inside(dom, np.sin(np.pi * (xs - 1.0)))
    mid = nearest_node(dom, 1.0)
    assert apply_Lp(u, FracParams(0.75, 2.0), mid) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p", [2.0, 3.5, 8.0])
def test_apply_Lp_consistent_with_gradient(p):
    """The quotient gradient encodes the operator: check the algebraic identity."""
    dom = build_interval(0.0, 1.0, 1 / 12)
    prm = FracParams(0.6, p)
    u = random_function(dom, 7)
    q = rayleigh_quotient(u, prm)
    g = rayleigh_gradient(u, prm)
    den = float(np.sum(np.abs(u.inside_values()) ** p) * dom.h)
    for ix in dom.inside_indices[::3]:
        ux = u.flat()[ix]
        want = -(g.flat()[ix] * den / (p * dom.h) + q * abs(ux) ** (p - 2) * ux)
        assert apply_Lp(u, prm, int(ix)) == pytest.approx(want, rel=1e-11, abs=1e-11)


def test_apply_Lp_monotone_in_upper_function():
    # psi >= phi with equality at the evaluation node forces L_p(psi) >= L_p(phi)
    dom = build_interval(0.0, 1.0, 1 / 16)
    delta = distance_to_complement(dom)
    phi_vals = np.where(dom.inside_flat, delta.flat(), 0.0)
    psi_vals = np.where(dom.inside_flat, np.sqrt(0.5 * delta.flat()), 0.0)
    phi = GridFunction(dom, phi_vals.reshape(dom.lattice_shape))
    psi = GridFunction(dom, psi_vals.reshape(dom.lattice_shape))
    x0 = nearest_node(dom, 0.5)
    assert psi.flat()[x0] == pytest.approx(phi.flat()[x0], abs=1e-15)
    assert np.all(psi.values >= phi.values)
    prm = FracParams(0.6, 3.0)
    assert apply_Lp(psi, prm, x0) >= apply_Lp(phi, prm, x0)


def test_tail_bracket_nesting():
    """A wider box moves cross + tail into the narrower box's bracket."""
    prm = FracParams(0.6, 3.0)
    mids, brackets = {}, {}
    for margin in (2.0, 3.0):
        dom = build_interval(0.0, 1.0, 1 / 16, margin=margin)
        delta = distance_to_complement(dom)
        u = GridFunction(dom, np.where(dom.inside_flat, delta.flat(), 0.0).reshape(dom.lattice_shape))
        b = gagliardo_energy(u, prm)
        mids[margin] = b.interior + b.cross + b.tail_mid
        brackets[margin] = (b.interior + b.cross + b.tail_lower,
                            b.interior + b.cross + b.tail_upper)
    lo, hi = brackets[2.0]
    assert lo <= mids[3.0] <= hi


def test_energy_requires_zero_extension():
    dom = build_interval(0.0, 2.0, 0.25)
    delta = distance_to_complement(dom)
    rho = GridFunction(dom, delta.values + 1.0, zero_extended=False)
    with pytest.raises(ValueError, match="requires a zero-extended"):
        gagliardo_energy(rho, FracParams(0.75, 2.0))


def test_quotient_survives_p64():
    dom = build_interval(0.0, 2.0, 1 / 32)
    delta = distance_to_complement(dom)
    ridge = high_ridge(delta)
    u = representation(dom, ridge, 0.5)
    q = rayleigh_quotient(u, FracParams(0.5, 64.0))
    assert np.isfinite(q) and q > 0.0
    g = rayleigh_gradient(u, FracParams(0.5, 64.0))
    assert np.all(np.isfinite(g.values))


def test_surface_measure():
    assert surface_measure(1) == 2.0
    assert surface_measure(2) == pytest.approx(2.0 * np.pi)
    with pytest.raises(ValueError, match="unsupported dimension"):
        surface_measure(3)
