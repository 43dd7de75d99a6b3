"""Resource grid construction, pilot lattice and OFDM round trips."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ltesense.waveform import (
    GridConfig,
    ResourceGrid,
    build_subframe_grid,
    generate_crs,
    ofdm_demodulate,
    ofdm_modulate,
    pilot_mask,
    subcarrier_frequencies,
)

SMALL = GridConfig(fft_size=64, occupied_subcarriers=36)


def test_default_config_layout():
    config = GridConfig()
    assert config.fft_size == 512
    assert config.subcarrier_spacing == 15_000.0
    assert config.occupied_subcarriers == 300
    assert config.symbols_per_subframe == 14
    assert config.cp_length == 64
    assert config.sample_rate == 512 * 15_000.0
    assert config.pilot_symbol_indices == (0, 4, 7, 11)


def test_config_validation():
    with pytest.raises(ValueError):
        GridConfig(fft_size=100)
    with pytest.raises(ValueError):
        GridConfig(occupied_subcarriers=301)
    with pytest.raises(ValueError):
        GridConfig(occupied_subcarriers=512)
    with pytest.raises(ValueError):
        GridConfig(symbols_per_subframe=12)
    with pytest.raises(ValueError):
        GridConfig(cell_seed=-1)
    with pytest.raises(ValueError):
        GridConfig(carrier_frequency=0.0)


def test_pilot_count_per_symbol():
    # 12 occupied subcarriers give 2 pilots on each of the 4 pilot symbols.
    pilots = generate_crs(GridConfig(fft_size=64, occupied_subcarriers=12))
    by_symbol = {}
    for _, symbol, _ in pilots:
        by_symbol[symbol] = by_symbol.get(symbol, 0) + 1
    assert by_symbol == {0: 2, 4: 2, 7: 2, 11: 2}

    pilots = generate_crs(GridConfig())
    assert sum(1 for _, symbol, _ in pilots if symbol == 0) == 50


def test_pilot_density_exact():
    for config in (SMALL, GridConfig()):
        mask = pilot_mask(config)
        assert mask.sum() == 4 * config.occupied_subcarriers // 6


def test_crs_deterministic_and_unit_magnitude():
    config = GridConfig(cell_seed=11)
    first = generate_crs(config)
    second = generate_crs(config)
    assert first == second
    assert all(abs(abs(value) - 1.0) < 1e-12 for _, _, value in first)


def test_crs_lattice_offsets_shift_by_three():
    config = GridConfig(cell_seed=5)
    pilots = generate_crs(config)
    base = {k % 6 for k, symbol, _ in pilots if symbol in (0, 7)}
    shifted = {k % 6 for k, symbol, _ in pilots if symbol in (4, 11)}
    assert base == {5}
    assert shifted == {(5 + 3) % 6}


def test_build_grid_unit_cells_and_energy():
    grid = build_subframe_grid(SMALL, payload_seed=3)
    assert_allclose(np.abs(grid.cells), 1.0, atol=1e-12)
    assert_allclose(
        grid.energy(), SMALL.occupied_subcarriers * SMALL.symbols_per_subframe, rtol=1e-12
    )


def test_payload_seed_changes_only_payload():
    a = build_subframe_grid(SMALL, payload_seed=0)
    b = build_subframe_grid(SMALL, payload_seed=1)
    assert_array_equal(a.pilot_mask, b.pilot_mask)
    assert_array_equal(a.cells[a.pilot_mask], b.cells[b.pilot_mask])
    assert np.any(a.cells[~a.pilot_mask] != b.cells[~b.pilot_mask])


def test_grid_validate_rejects_bad_pilots():
    grid = build_subframe_grid(SMALL, payload_seed=0)
    cells = grid.cells.copy()
    cells[grid.pilot_mask] *= 2.0
    broken = ResourceGrid(cells, grid.pilot_mask, SMALL)
    with pytest.raises(ValueError):
        broken.validate()


def test_subcarrier_frequencies_skip_dc():
    freqs = subcarrier_frequencies(SMALL)
    assert freqs.size == SMALL.occupied_subcarriers
    assert 0.0 not in freqs
    assert np.all(np.diff(freqs) > 0)
    # Symmetric occupancy around the unused DC bin.
    assert_allclose(freqs[0], -18 * SMALL.subcarrier_spacing)
    assert_allclose(freqs[-1], 18 * SMALL.subcarrier_spacing)


def test_zero_grid_modulates_to_silence():
    shape = (SMALL.occupied_subcarriers, SMALL.symbols_per_subframe)
    grid = ResourceGrid(np.zeros(shape, dtype=complex), pilot_mask(SMALL), SMALL)
    assert_array_equal(ofdm_modulate(grid), np.zeros(SMALL.samples_per_subframe))


def test_single_subcarrier_gives_constant_magnitude_tone():
    shape = (SMALL.occupied_subcarriers, SMALL.symbols_per_subframe)
    cells = np.zeros(shape, dtype=complex)
    cells[7, :] = 1.0
    grid = ResourceGrid(cells, pilot_mask(SMALL), SMALL)
    samples = ofdm_modulate(grid).reshape(
        SMALL.symbols_per_subframe, SMALL.fft_size + SMALL.cp_length
    )
    bodies = samples[:, SMALL.cp_length:]
    assert_allclose(np.abs(bodies), 1.0 / SMALL.fft_size, rtol=1e-12)


def test_symbol_energy_follows_grid_energy():
    # The 1/N inverse FFT makes each symbol body carry column energy / N.
    grid = build_subframe_grid(SMALL, payload_seed=9)
    samples = ofdm_modulate(grid).reshape(
        SMALL.symbols_per_subframe, SMALL.fft_size + SMALL.cp_length
    )
    bodies = samples[:, SMALL.cp_length:]
    body_energy = np.sum(np.abs(bodies) ** 2, axis=1)
    column_energy = np.sum(np.abs(grid.cells) ** 2, axis=0)
    assert_allclose(body_energy, column_energy / SMALL.fft_size, rtol=1e-12)


def test_roundtrip_on_random_grids():
    rng = np.random.default_rng(0)
    shape = (SMALL.occupied_subcarriers, SMALL.symbols_per_subframe)
    mask = pilot_mask(SMALL)
    for _ in range(100):
        cells = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        grid = ResourceGrid(cells, mask, SMALL)
        back = ofdm_demodulate(ofdm_modulate(grid), SMALL)
        assert np.max(np.abs(back.cells - grid.cells)) < 1e-9
        assert_array_equal(back.pilot_mask, mask)


def test_roundtrip_default_size_grid():
    grid = build_subframe_grid(GridConfig(cell_seed=2), payload_seed=4)
    back = ofdm_demodulate(ofdm_modulate(grid), grid.config)
    assert np.max(np.abs(back.cells - grid.cells)) < 1e-9


def test_demodulate_rejects_wrong_length():
    with pytest.raises(ValueError):
        ofdm_demodulate(np.zeros(10, dtype=complex), SMALL)


def test_identical_seeds_identical_grids():
    a = build_subframe_grid(SMALL, payload_seed=21)
    b = build_subframe_grid(SMALL, payload_seed=21)
    assert_array_equal(a.cells, b.cells)
