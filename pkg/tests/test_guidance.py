import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaor import guidance as gd
from adaor.flow import analytical_id_prediction
from adaor.rng import stream


def _preds(rng, dim=6, with_id=True):
    return gd.PredictionSet(
        eps_cond=rng.normal(size=dim),
        eps_null=rng.normal(size=dim),
        eps_id=rng.normal(size=dim) if with_id else None,
    )


def test_scheduler_eval_values():
    assert gd.scheduler_eval("sqrt", 0.0) == 0.0
    assert gd.scheduler_eval("sqrt", 1.0) == 1.0
    assert gd.scheduler_eval("sqrt", 0.25) == 0.5
    assert gd.scheduler_eval("linear", 0.3) == 0.3
    with pytest.raises(ValueError):
        gd.scheduler_eval("sqrt", 1.5)
    with pytest.raises(ValueError):
        gd.scheduler_eval("cubic", 0.5)


def test_scheduler_monotone_on_grid():
    alphas = np.linspace(0.0, 1.0, 33)
    for kind in gd.SCHEDULERS:
        vals = [gd.scheduler_eval(kind, a) for a in alphas]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_cfg_combine():
    p = _preds(stream(0, "g"))
    assert np.allclose(gd.cfg_combine(p, 1.0), p.eps_cond, atol=1e-15)
    assert np.array_equal(gd.cfg_combine(p, 0.0), p.eps_null)
    one = gd.PredictionSet(eps_cond=np.array([2.0]), eps_null=np.array([0.0]))
    assert np.array_equal(gd.cfg_combine(one, 3.0), [6.0])
    with pytest.raises(ValueError):
        gd.cfg_combine(gd.PredictionSet(np.zeros(2), np.zeros(3)), 1.0)


def test_adaptive_origin():
    p = _preds(stream(1, "g"))
    assert np.array_equal(gd.adaptive_origin(p, 0.0, "sqrt"), p.eps_id)
    assert np.array_equal(gd.adaptive_origin(p, 1.0, "sqrt"), p.eps_null)
    mid = gd.PredictionSet(eps_cond=np.zeros(1), eps_null=np.array([0.0]), eps_id=np.array([1.0]))
    assert np.array_equal(gd.adaptive_origin(mid, 0.25, "sqrt"), [0.5])
    with pytest.raises(ValueError, match="identity"):
        gd.adaptive_origin(_preds(stream(2, "g"), with_id=False), 0.5, "sqrt")


def test_adaor_combine_hand_example():
    p = gd.PredictionSet(eps_cond=np.array([2.0]), eps_null=np.array([0.0]), eps_id=np.array([1.0]))
    cfg = gd.GuidanceConfig(variant="adaor", w=2.0, alpha=0.25, scheduler="sqrt")
    # origin 0.5, steering 0.25*2*(2-0) = 1.0
    assert np.allclose(gd.adaor_combine(p, cfg), [1.5], atol=1e-15)


def test_cfgid_combine():
    p = _preds(stream(3, "g"))
    assert np.allclose(gd.cfgid_combine(p, 1.0), p.eps_cond, atol=1e-15)
    assert np.array_equal(gd.cfgid_combine(p, 0.0), p.eps_id)
    one = gd.PredictionSet(eps_cond=np.array([2.0]), eps_null=np.zeros(1), eps_id=np.array([1.0]))
    assert np.array_equal(gd.cfgid_combine(one, 3.0), [4.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 1.0, 4.0]),
       st.sampled_from(gd.SCHEDULERS))
def test_boundary_exactness_property(seed, w, scheduler):
    p = _preds(stream(seed, "bound"))
    at0 = gd.adaor_combine(p, gd.GuidanceConfig(variant="adaor", w=w, alpha=0.0, scheduler=scheduler))
    scale = np.abs(p.eps_id).max()
    assert np.abs(at0 - p.eps_id).max() <= 1e-12 * max(scale, 1.0)
    at1 = gd.adaor_combine(p, gd.GuidanceConfig(variant="adaor", w=w, alpha=1.0, scheduler=scheduler))
    ref = gd.cfg_combine(p, w)
    assert np.abs(at1 - ref).max() <= 1e-12 * max(np.abs(ref).max(), 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0), st.sampled_from(gd.SCHEDULERS))
def test_origin_on_segment_property(seed, alpha, scheduler):
    p = _preds(stream(seed, "seg"))
    origin = gd.adaptive_origin(p, alpha, scheduler)
    s = gd.scheduler_eval(scheduler, alpha)
    exact = p.eps_id + s * (p.eps_null - p.eps_id)
    assert np.abs(origin - exact).max() <= 1e-12 * max(np.abs(exact).max(), 1.0)


def test_combines_linear_in_predictions():
    rng = stream(7, "lin")
    cfg = gd.GuidanceConfig(variant="adaor", w=3.0, alpha=0.6)
    for combine in (
        lambda p: gd.cfg_combine(p, 2.5),
        lambda p: gd.adaor_combine(p, cfg),
        lambda p: gd.cfgid_combine(p, 2.5),
    ):
        a = _preds(rng)
        b = _preds(rng)
        lam = 0.37
        mixed = gd.PredictionSet(
            eps_cond=a.eps_cond + lam * b.eps_cond,
            eps_null=a.eps_null + lam * b.eps_null,
            eps_id=a.eps_id + lam * b.eps_id,
        )
        assert np.allclose(combine(mixed), combine(a) + lam * combine(b), atol=1e-12)


def test_cfgid_divergence_law_with_analytical_id():
    rng = stream(8, "div")
    dim = 16
    c_i = rng.normal(size=dim)
    z = c_i + rng.normal(size=dim)  # fixed nonzero offset
    cond = 0.05 * rng.normal(size=dim)
    w = 4.0
    grid = [0.4, 0.2, 0.1, 0.05]
    norms = []
    for t in grid:
        p = gd.PredictionSet(eps_cond=cond, eps_null=np.zeros(dim),
                             eps_id=analytical_id_prediction(z, c_i, t))
        norms.append(np.linalg.norm(gd.cfgid_combine(p, w)))
    for (t_hi, t_lo), (n_hi, n_lo) in zip(zip(grid, grid[1:]), zip(norms, norms[1:])):
        ratio = n_lo / n_hi
        predicted = t_hi / t_lo
        assert abs(ratio - predicted) <= 0.05 * predicted


class _CountingNet:
    null_token = 4
    id_token = 5

    def __init__(self):
        self.calls = []

    def predict(self, z, c_i, token, t):
        self.calls.append(token)
        return np.full(z.shape[0], float(token))


@pytest.mark.parametrize("variant,n_calls", [("cfg", 2), ("adaor", 3), ("cfgid", 3), ("adaor-analytic", 2)])
def test_resolve_predictions_network_budget(variant, n_calls):
    net = _CountingNet()
    z = np.ones(4)
    c_i = np.zeros(4)
    cfg = gd.GuidanceConfig(variant=variant, alpha=0.5)
    p = gd.resolve_predictions(net, z, 0.25, c_i, token=1, cfg=cfg)
    assert len(net.calls) == n_calls
    if variant == "cfg":
        assert p.eps_id is None
    elif variant == "adaor-analytic":
        assert np.allclose(p.eps_id, (z - c_i) / 0.25)
    else:
        assert np.array_equal(p.eps_id, np.full(4, 5.0))


def test_apply_guidance_dispatch():
    p = _preds(stream(9, "disp"))
    cfg_sweep = gd.GuidanceConfig(variant="cfg", w=4.0, alpha=0.5)
    assert np.allclose(gd.apply_guidance(p, cfg_sweep), gd.cfg_combine(p, 2.0))
    cfgid = gd.GuidanceConfig(variant="cfgid", w=4.0, alpha=0.25)
    assert np.allclose(gd.apply_guidance(p, cfgid), gd.cfgid_combine(p, 1.0))
    adaor = gd.GuidanceConfig(variant="adaor", w=4.0, alpha=0.5)
    assert np.allclose(gd.apply_guidance(p, adaor), gd.adaor_combine(p, adaor))


def test_guidance_config_validation():
    with pytest.raises(ValueError):
        gd.GuidanceConfig(variant="bogus")
    with pytest.raises(ValueError):
        gd.GuidanceConfig(alpha=1.2)
    with pytest.raises(ValueError):
        gd.GuidanceConfig(w=-1.0)
    with pytest.raises(ValueError):
        gd.GuidanceConfig(scheduler="cosine")
