"""unknot-kit: boundary graphs, canonical model surfaces, and isotopy signatures.

The toolkit decides isotopy equivalence of properly embedded surfaces in a
ball through the complete invariant (genus, canonical boundary tree), builds
the canonical unknotted representative of any such class as a triangle mesh,
and computes stabilized slice graphs ("graphs at infinity") for surfaces
with ends.
"""

__version__ = "0.1.0"

from .analysis import (
    BallDomain,
    InvalidSurfaceError,
    Signature,
    ValidationReport,
    boundary_graph_of_surface,
    genus_and_boundary,
    isotopy_equivalent,
    isotopy_signature,
    self_intersects,
    validate_properly_embedded,
)
from .arrangement import (
    CurveError,
    LoopGeometryError,
    RegionDecomposition,
    SphericalLoop,
    boundary_graph,
    read_loops_jsonl,
    region_decomposition,
    sphere_boundary_graph,
    write_loops_jsonl,
)
from .mesh import MeshTopologyError, TriMesh, read_obj, weld_soup, write_obj
from .modelsurface import (
    GenerationError,
    ModelSurfaceSpec,
    attach_genus,
    generate_model_surface,
    generate_with_report,
)
from .shrinkers import (
    SliceResult,
    StabilizationReport,
    TransversalityError,
    builtin_shrinker,
    graph_at_infinity,
    slice_graph,
)
from .trees import (
    CanonicalCode,
    InvalidTreeError,
    Multigraph,
    Tree,
    TreeFormatError,
    ahu_code,
    cayley_lower_bound,
    enumerate_free_trees,
    is_tree,
    multigraphs_isomorphic,
    parse_tree,
    to_dot,
    trees_isomorphic,
)

__all__ = [
    "__version__",
    "BallDomain", "InvalidSurfaceError", "Signature", "ValidationReport",
    "boundary_graph_of_surface", "genus_and_boundary", "isotopy_equivalent",
    "isotopy_signature", "self_intersects", "validate_properly_embedded",
    "CurveError", "LoopGeometryError", "RegionDecomposition", "SphericalLoop",
    "boundary_graph", "read_loops_jsonl", "region_decomposition",
    "sphere_boundary_graph", "write_loops_jsonl",
    "MeshTopologyError", "TriMesh", "read_obj", "weld_soup", "write_obj",
    "GenerationError", "ModelSurfaceSpec", "attach_genus",
    "generate_model_surface", "generate_with_report",
    "SliceResult", "StabilizationReport", "TransversalityError",
    "builtin_shrinker", "graph_at_infinity", "slice_graph",
    "CanonicalCode", "InvalidTreeError", "Multigraph", "Tree",
    "TreeFormatError", "ahu_code", "cayley_lower_bound", "enumerate_free_trees",
    "is_tree", "multigraphs_isomorphic", "parse_tree", "to_dot",
    "trees_isomorphic",
]
