"""Full and directional polynomial flow maps."""

from .maps import (
    KIND_DIRECTIONAL,
    KIND_FULL,
    DirectionFrame,
    PolyFlowMap,
    build_da_map,
    build_dda_map,
    chain_maps,
    eval_map,
    eval_map_batch,
    stretching_direction,
    transverse_basis,
)
from .serialization import dump_map, dumps_map, load_map, loads_map
