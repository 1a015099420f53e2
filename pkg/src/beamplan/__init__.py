"""Production planning toolkit for heterogeneous prestressed precast beams.

Builds casting-pattern catalogs, the four integer programs over them
(idle capacity, makespan in two formulations, total completion time),
solves them exactly by branch and bound, runs six constructive priority
rules plus a size-reduction matheuristic, and independently verifies and
scores any production plan.
"""

from .instance import (
    BeamType,
    Instance,
    InstanceDataError,
    InstanceFormatError,
    format_instance,
    format_quantity,
    parse_instance,
    parse_quantity,
    validate_instance,
)
from .patterns import (
    CONTINUATION,
    CatalogSizeError,
    IncompatiblePatternError,
    Pattern,
    PatternCatalog,
    build_catalog,
    catalog_from_patterns,
    enumerate_maximal_patterns,
    idle_cost,
    is_maximal,
    select_qc_maximal,
    used_capacity,
)

__version__ = "0.1.0"
