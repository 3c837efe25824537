import pytest

from ktforge.errors import CapOverflowError, InvariantViolationError
from ktforge.gca import Poly
from ktforge.jet import JetContext, multi_indices


@pytest.fixture
def ctx():
    return JetContext(base_dim=1, fiber_rank=1, jet_cap=4)


def g(ctx, *args):
    return Poly.gen(ctx.reg, ctx.jet(1, args))


def test_lift_sends_field_to_derivative(ctx):
    u = g(ctx, 0)
    assert ctx.total_derivative(u, 1) == g(ctx, 1)


def test_derivative_of_constant_vanishes(ctx):
    c = Poly.scalar(ctx.reg, 7)
    assert ctx.total_derivative(c, 1).is_zero()


def test_leibniz_on_product(ctx):
    # D_t(u * u_t) = u_t^2 + u * u_tt
    u, ut, utt = g(ctx, 0), g(ctx, 1), g(ctx, 2)
    out = ctx.total_derivative(u * ut, 1)
    assert out == ut * ut + u * utt


def test_cap_overflow_is_an_error(ctx):
    top = g(ctx, 4)
    with pytest.raises(CapOverflowError):
        ctx.total_derivative(top, 1)


def test_prolong_single_derivative(ctx):
    ut = g(ctx, 1)
    out = ctx.prolong(ut, 1)
    assert [a for a, _p in out] == [(0,), (1,)]
    assert out[0][1] == ut
    assert out[1][1] == g(ctx, 2)


def test_prolong_zeroth(ctx):
    p = g(ctx, 0) * g(ctx, 1)
    out = ctx.prolong(p, 0)
    assert len(out) == 1 and out[0][1] == p


def test_prolong_cap_check(ctx):
    with pytest.raises(CapOverflowError):
        ctx.prolong(g(ctx, 1), 4)


def test_mixed_partials_commute_2d():
    ctx = JetContext(base_dim=2, fiber_rank=1, jet_cap=3)
    u = Poly.gen(ctx.reg, ctx.jet(1, (0, 0)))
    dxy = ctx.total_derivative(ctx.total_derivative(u, 1), 2)
    dyx = ctx.total_derivative(ctx.total_derivative(u, 2), 1)
    assert dxy == dyx
    assert dxy == Poly.gen(ctx.reg, ctx.jet(1, (1, 1)))


def test_commutativity_random_2d():
    import random

    rng = random.Random(3)
    ctx = JetContext(base_dim=2, fiber_rank=2, jet_cap=4)
    gens = [ctx.jet(j, a) for j in (1, 2) for a in [(0, 0), (1, 0), (0, 1)]]
    gens.append(ctx.coord(1))
    for _ in range(200):
        word = [rng.choice(gens) for _ in range(rng.randint(0, 3))]
        p = Poly.from_word(ctx.reg, word, rng.randint(-3, 3))
        d12 = ctx.total_derivative(ctx.total_derivative(p, 1), 2)
        d21 = ctx.total_derivative(ctx.total_derivative(p, 2), 1)
        assert d12 == d21


def test_leibniz_random(ctx):
    import random

    rng = random.Random(5)
    gens = [ctx.jet(1, (k,)) for k in range(3)] + [ctx.coord(1)]
    for _ in range(200):
        w1 = [rng.choice(gens) for _ in range(rng.randint(0, 3))]
        w2 = [rng.choice(gens) for _ in range(rng.randint(0, 3))]
        p = Poly.from_word(ctx.reg, w1, rng.randint(-3, 3))
        q = Poly.from_word(ctx.reg, w2, rng.randint(-3, 3))
        lhs = ctx.total_derivative(p * q, 1)
        rhs = ctx.total_derivative(p, 1) * q + p * ctx.total_derivative(q, 1)
        assert lhs == rhs


def test_degree_zero_and_jet_raise_by_one(ctx):
    p = g(ctx, 2) * g(ctx, 1)
    out = ctx.total_derivative(p, 1)
    assert out.hdeg() == 0
    assert ctx.mono_max_order(out) <= ctx.mono_max_order(p) + 1


def test_extended_mode_towers():
    ctx = JetContext(1, 1, 3, extended=True)
    phi = ctx.add_tower("phi*", 1)
    v0 = ctx.tower_var(phi, (0,))
    p = Poly.gen(ctx.reg, v0)
    out = ctx.total_derivative(p, 1)
    assert out == Poly.gen(ctx.reg, ctx.tower_var(phi, (1,)))
    assert ctx.reg.hdeg(v0) == 1 and ctx.reg.is_odd(v0)


def test_towers_require_extended_mode(ctx):
    with pytest.raises(InvariantViolationError):
        ctx.add_tower("phi*", 1)


def test_var_by_name(ctx):
    assert ctx.var_by_name("u1") == ctx.jet(1, (0,))
    assert ctx.var_by_name("u1_xx") == ctx.jet(1, (2,))
    assert ctx.var_by_name("x1") == ctx.coord(1)
    with pytest.raises(Exception) as e:
        ctx.var_by_name("u1_y")
    assert "unknown direction" in str(e.value)


def test_multi_indices_deterministic():
    out = multi_indices(2, 2)
    assert out[0] == (0, 0)
    assert set(out) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert len(out) == 6
