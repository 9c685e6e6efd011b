import math

import numpy as np
import pytest

from vactrap.errors import InvalidGrid
from vactrap.grid import (CH_E0, CH_G0, CH_G1, absorbing_mask,
                          apply_momentum_kick, channel_norms_sq,
                          gaussian_state, inside_probability, kinetic_energy,
                          make_grid, mean_momentum, mean_position, norm_sq,
                          normalized, save_state_csv, validate_grid,
                          zero_state)
from vactrap.params import Severity


def random_state(grid, rng, channels=(0, 1, 2)):
    s = zero_state(grid)
    for c in channels:
        s.data[c] = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    return normalized(s)


def test_make_grid_values():
    g = make_grid(4096, 400.0)
    assert abs(g.dx - 0.1953125) < 1e-15
    assert abs(np.abs(g.p).max() - math.pi / g.dx) < 1e-9
    assert abs(np.abs(g.p).max() - 16.1) < 0.1
    assert g.x[0] == -400.0 and abs(g.x[-1] - (400.0 - g.dx)) < 1e-12


def test_make_grid_rejects_bad_n():
    with pytest.raises(InvalidGrid):
        make_grid(100, 400.0)
    with pytest.raises(InvalidGrid):
        make_grid(32, 400.0)
    with pytest.raises(InvalidGrid):
        make_grid(1024, -1.0)


def test_grid_dx_bound_reported_not_raised():
    g = make_grid(1024, 400.0)
    assert abs(g.dx - 0.78125) < 1e-15
    diags = validate_grid(g)
    assert any(d.severity is Severity.ERROR and d.code == "grid-dx"
               for d in diags)
    assert not validate_grid(make_grid(4096, 400.0))


def test_norm_and_scaling():
    grid = make_grid(256, 64.0)
    s = gaussian_state(grid, 3.0)
    assert abs(norm_sq(s) - 1.0) < 1e-9
    s.data *= 0.5
    assert abs(norm_sq(s) - 0.25) < 1e-9


def test_channel_norms_split():
    grid = make_grid(256, 64.0)
    rng = np.random.default_rng(0)
    s = random_state(grid, rng)
    per = channel_norms_sq(s)
    assert abs(per.sum() - norm_sq(s)) < 1e-12
    assert np.all(per > 0)


def test_parseval_and_fft_round_trip():
    grid = make_grid(512, 100.0)
    rng = np.random.default_rng(1)
    s = random_state(grid, rng)
    ft = np.fft.fft(s.data, axis=1)
    spectral = np.sum(np.abs(ft) ** 2) * grid.dx / grid.n
    assert abs(spectral - norm_sq(s)) < 1e-12
    back = np.fft.ifft(ft, axis=1)
    assert np.max(np.abs(back - s.data)) < 1e-12


def test_inside_probability_full_support():
    grid = make_grid(512, 100.0)
    s = gaussian_state(grid, 2.0)
    assert abs(inside_probability(s, 50.0) - 1.0) < 1e-9


def test_inside_probability_reflection_symmetry():
    grid = make_grid(512, 100.0)
    rng = np.random.default_rng(5)
    s = random_state(grid, rng)
    mirrored = s.copy()
    # x_j -> -x_j on a grid holding -L but not +L is reverse-then-roll
    mirrored.data[:] = np.roll(mirrored.data[:, ::-1], 1, axis=1)
    for sigma in (10.0, 37.0, 80.0):
        a = inside_probability(s, sigma)
        b = inside_probability(mirrored, sigma)
        assert abs(a - b) < 1e-9


def test_momentum_kick_identity_and_norm():
    grid = make_grid(256, 64.0)
    rng = np.random.default_rng(2)
    s = random_state(grid, rng)
    assert np.max(np.abs(apply_momentum_kick(s, 0.0).data - s.data)) == 0.0
    for u in (-1.0, 0.37, 2.5):
        kicked = apply_momentum_kick(s, u)
        assert abs(norm_sq(kicked) - norm_sq(s)) < 1e-12
        undone = apply_momentum_kick(kicked, -u)
        assert np.max(np.abs(undone.data - s.data)) < 1e-12


def test_momentum_kick_shifts_mean():
    grid = make_grid(512, 100.0)
    s = gaussian_state(grid, 4.0)
    assert abs(mean_momentum(s)) < 1e-10
    kicked = apply_momentum_kick(s, 1.0)
    assert abs(mean_momentum(kicked) + 1.0) < 1e-9


def test_momentum_kick_channel_selector():
    grid = make_grid(256, 64.0)
    rng = np.random.default_rng(4)
    s = random_state(grid, rng)
    kicked = apply_momentum_kick(s, 0.7, channels=(CH_E0,))
    assert np.array_equal(kicked.data[CH_G0], s.data[CH_G0])
    assert np.array_equal(kicked.data[CH_G1], s.data[CH_G1])
    assert not np.array_equal(kicked.data[CH_E0], s.data[CH_E0])


def test_kinetic_energy_plane_wave():
    grid = make_grid(256, 64.0)
    er = 4e3
    k0 = grid.p[7]  # a grid momentum
    s = zero_state(grid)
    s.data[CH_G0] = np.exp(1j * k0 * grid.x) / math.sqrt(2 * grid.half_extent)
    assert abs(kinetic_energy(s, er) - er * k0 ** 2) < 1e-9 * er * k0 ** 2


def test_kinetic_energy_gaussian():
    grid = make_grid(1024, 128.0)
    er = 4e3
    for w in (2.0, 5.0, 11.0):
        s = gaussian_state(grid, w)
        expected = er / (4 * w * w)
        assert abs(kinetic_energy(s, er) - expected) < 0.01 * expected


def test_kick_energy_increase_is_recoil():
    grid = make_grid(1024, 128.0)
    er = 4e3
    s = gaussian_state(grid, 5.0)
    e0 = kinetic_energy(s, er)
    e1 = kinetic_energy(apply_momentum_kick(s, 1.0), er)
    assert abs((e1 - e0) - er) < 1e-6 * er


def test_mean_momentum_real_even_state():
    grid = make_grid(512, 100.0)
    s = gaussian_state(grid, 6.0)
    assert abs(mean_momentum(s)) < 1e-10
    assert abs(mean_position(s)) < 1e-9


def test_absorbing_mask_shape():
    grid = make_grid(512, 100.0)
    m = absorbing_mask(grid, 0.05)
    assert m.max() == 1.0 and m.min() >= 0.0
    inner = np.abs(grid.x) < 0.9 * grid.half_extent
    assert np.all(m[inner] == 1.0)
    assert m[0] < 1e-3  # edge fully absorbing


def test_state_csv_round_trip(tmp_path):
    grid = make_grid(128, 32.0)
    s = gaussian_state(grid, 2.0)
    path = tmp_path / "state.csv"
    save_state_csv(s, path)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    assert rows.shape[0] == grid.n
    assert np.allclose(rows["x"], grid.x, atol=1e-9)
    assert np.allclose(rows["dens_g0"], np.abs(s.data[CH_G0]) ** 2,
                       rtol=1e-9, atol=1e-300)
    total = (rows["dens_g0"] + rows["dens_g1"] + rows["dens_e0"]).sum() * grid.dx
    assert abs(total - 1.0) < 1e-6
