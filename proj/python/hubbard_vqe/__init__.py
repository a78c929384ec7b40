"""Symmetry-resolved VQE for the Hubbard ring.

The numerical work happens in the compiled ``_core`` extension. This package
adds thin conveniences on top of it.
"""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    DimensionError,
    DomainError,
    HubbardParams,
    Irrep,
    ModelOracle,
    NumericalError,
    PauliSum,
    SectorLabel,
    SectorProblem,
    __version__,
    config_from_json,
    emit_plotdata,
    find_transition,
    lanczos_energy,
    parse_irrep,
    weighted_average,
)
from ._core import run_cell as _run_cell


def run_cell(config, grid_index, sector):
    """Run one (grid point, sector) cell.

    ``config`` is a dict or a JSON string; ``sector`` an ``Irrep`` or its name.
    Returns the records as dicts.
    """
    text = config if isinstance(config, str) else _json.dumps(config)
    if isinstance(sector, str):
        sector = parse_irrep(sector)
    return [_json.loads(r) for r in _run_cell(text, grid_index, sector)]


def sector_energies(t_prime, u=0.5, n_sites=4, t=1.0, irreps=("A1", "B1", "E")):
    """Lowest half-filling energy in each listed sector."""
    oracle = ModelOracle(HubbardParams(n_sites=n_sites, t=t, t_prime=t_prime * t, u=u * t))
    return {name: oracle.sector_ground_energy(parse_irrep(name)) for name in irreps}
