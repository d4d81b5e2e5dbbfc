import numpy as np
import pytest

from adaor import task
from adaor.rng import stream


def test_sample_params_reproducible_and_in_range():
    p1 = task.sample_params(stream(3, "case"))
    p2 = task.sample_params(stream(3, "case"))
    assert p1 == p2
    assert task.sample_params(stream(4, "case")) != p1
    rng = stream(0, "ranges")
    for _ in range(2000):
        p = task.sample_params(rng)
        assert 4.0 <= p.cx <= 8.0
        assert 5.0 <= p.cy <= 11.0
        assert 2.5 <= p.r <= 4.5
        assert 0.4 <= p.b <= 0.8
        assert p.hollow == 0.0


def test_render_basics():
    p = task.DiscParams(cx=7.0, cy=8.0, r=3.0, b=0.6)
    img = task.render(p)
    assert img.shape == (256,)
    assert img.min() >= 0.0 and img.max() <= 1.0
    # exact center has full coverage
    assert img[8 * 16 + 7] == pytest.approx(0.6, abs=1e-12)
    # pixels farther than r+1 from the center are exactly zero
    d = np.hypot(np.arange(16)[None, :] - 7.0, np.arange(16)[:, None] - 8.0).reshape(-1)
    assert np.all(img[d > 4.0] == 0.0)
    assert np.all(task.render(task.DiscParams(7.0, 8.0, 3.0, b=0.0)) == 0.0)


def test_apply_edit_values():
    p = task.DiscParams(cx=5.0, cy=8.0, r=3.0, b=0.5)
    assert task.apply_edit(p, 0, 0.0) == p
    assert task.apply_edit(p, 0, 1.0).cx == 9.0
    assert task.apply_edit(p, 1, 0.5).r == pytest.approx(3.9, abs=1e-12)  # 3 * 1.3
    assert task.apply_edit(p, 2, 1.0).b == pytest.approx(0.9, abs=1e-12)
    assert task.apply_edit(task.DiscParams(5, 8, 3, 0.8), 2, 1.0).b == 1.0  # clamp
    assert task.apply_edit(p, 3, 0.7).hollow == 0.7
    for bad in (task.NULL_TOKEN, task.ID_TOKEN):
        with pytest.raises(ValueError):
            task.apply_edit(p, bad, 0.5)


def test_edit_distance_nondecreasing_in_strength():
    rng = stream(11, "mono")
    lams = np.linspace(0.0, 1.0, 9)
    for _ in range(8):
        p = task.sample_params(rng)
        base = task.render(p)
        for tok in task.EDIT_TOKENS:
            dists = [np.linalg.norm(task.render(task.apply_edit(p, tok, l)) - base) for l in lams]
            assert all(b >= a - 1e-9 for a, b in zip(dists, dists[1:])), (tok, dists)


def test_make_triplet():
    trip = task.make_triplet(stream(5, "trip"))
    again = task.make_triplet(stream(5, "trip"))
    assert trip.instruction == again.instruction
    assert np.array_equal(trip.source, again.source)
    assert np.array_equal(trip.target, again.target)

    ident = task.make_triplet(stream(5, "trip"), instruction=task.ID_TOKEN)
    assert np.array_equal(ident.source, ident.target)

    bright = task.make_triplet(stream(6, "trip"), instruction=2)
    assert bright.target.mean() > bright.source.mean()


def test_fit_params_round_trip():
    rng = stream(21, "fit")
    for _ in range(3):
        p = task.sample_params(rng)
        p = task.DiscParams(p.cx, p.cy, p.r, p.b, hollow=float(rng.uniform(0, 1)))
        img = task.render(p)
        fitted, residual = task.fit_params(img)
        assert residual < 1e-6 * np.linalg.norm(img)
        # recovered parameters within one finest-grid cell
        fine = task._FIT_STEPS[-1]
        got = fitted.as_array()
        true = p.as_array()
        assert np.all(np.abs(got - true) <= np.array(fine) + 1e-9), (got, true)


def test_fit_params_degenerate_and_noise():
    zero = np.zeros(256)
    fitted, residual = task.fit_params(zero)
    assert fitted.b == pytest.approx(0.4, abs=1e-6)  # intensity floor of the search box
    assert residual > 0.0

    p = task.DiscParams(cx=6.0, cy=8.0, r=3.5, b=0.6)
    img = task.render(p)
    _, clean = task.fit_params(img)
    noisy = img + 0.3 * stream(2, "noise").uniform(0, 1, 256)
    _, dirty = task.fit_params(noisy)
    assert dirty > clean


def test_vec_task_edits():
    x = task.vec_sample(stream(9, "vec"))
    assert x.shape == (8,)
    assert np.array_equal(task.vec_sample(stream(9, "vec")), x)
    for tok in task.EDIT_TOKENS:
        assert np.allclose(task.vec_apply_edit(x, tok, 0.0), x)
        full = task.vec_apply_edit(x, tok, 1.0)
        for lam in (0.25, 0.5, 0.75):
            lerp = (1 - lam) * x + lam * full
            assert np.allclose(task.vec_apply_edit(x, tok, lam), lerp, atol=1e-12)
    trip = task.vec_make_triplet(stream(12, "vt"), instruction=task.ID_TOKEN)
    assert np.array_equal(trip.source, trip.target)


def test_get_task_and_interface():
    for name in ("disc", "vec"):
        t = task.get_task(name)
        rng = stream(1, "iface", name)
        case = t.sample_case(rng)
        src = t.render_case(case)
        assert src.shape == (t.dim,)
        ref0 = t.reference(case, 1, 0.0)
        assert np.allclose(ref0, src, atol=1e-12)
        gray = t.to_grayscale(src)
        assert gray.shape == t.image_shape
        assert gray.min() >= 0.0 and gray.max() <= 1.0
    with pytest.raises(ValueError):
        task.get_task("nope")
    with pytest.raises(ValueError, match="SHIFT_RIGHT"):
        task.token_id("blur")
