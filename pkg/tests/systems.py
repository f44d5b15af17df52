"""Shared test fixtures: small dispatch systems with known structure."""

from __future__ import annotations

import numpy as np

from tsagg.dispatch_model import Generator, SystemData, add_nse_generator

THERMAL = Generator("thermal", 10.0, 100.0)
WIND = Generator("wind", 0.0, 50.0, is_variable=True, cf_series_id="wind")


def thermal_wind(demand, wind_cf, nse=True, nse_cost=1000.0) -> SystemData:
    """Thermal 100 MW @ 10 plus wind 50 MW @ 0, optionally with NSE."""
    system = SystemData(
        (THERMAL, WIND), np.asarray(demand, float), {"wind": np.asarray(wind_cf, float)}
    )
    return add_nse_generator(system, cost=nse_cost) if nse else system


def random_system(rng, hours=24, nse=True) -> SystemData:
    """Randomised two-unit system with distinct costs and rich regimes."""
    base = rng.uniform(40.0, 110.0)
    demand = np.clip(
        base
        + rng.uniform(10.0, 40.0) * np.sin(2.0 * np.pi * np.arange(hours) / 24.0)
        + rng.normal(0.0, 8.0, hours),
        0.0,
        None,
    )
    cf = np.clip(rng.beta(2.0, 3.0, hours), 0.0, 1.0)
    wind_cap = rng.uniform(60.0, 160.0)
    thermal_cap = rng.uniform(50.0, 120.0)
    gens = (
        Generator("wind", 0.0, wind_cap, is_variable=True, cf_series_id="wind"),
        Generator("thermal", rng.uniform(5.0, 40.0), thermal_cap),
    )
    system = SystemData(gens, demand, {"wind": cf})
    return add_nse_generator(system) if nse else system
