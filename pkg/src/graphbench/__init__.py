"""Graph-analytics benchmark kit: failure-free graph generation, eight
reference kernels, benchmark metrics and dataset similarity statistics."""

import warnings

from numba.core.errors import NumbaWarning

# numba probes for TBB on first parallel launch and warns when it is absent
warnings.filterwarnings("ignore", message=".*TBB.*", category=NumbaWarning)

from .generator import GenerationReport, GeneratorConfig, LdbcRefConfig, generate_any  # noqa: E402
from .graph import CsrGraph, EdgeList, build_csr, dataset_name, read_edge_list, write_edge_list  # noqa: E402
from .kernels import KERNEL_NAMES, KernelParams, run_kernel  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "CsrGraph",
    "EdgeList",
    "GenerationReport",
    "GeneratorConfig",
    "KERNEL_NAMES",
    "KernelParams",
    "LdbcRefConfig",
    "__version__",
    "build_csr",
    "dataset_name",
    "generate_any",
    "read_edge_list",
    "run_kernel",
    "write_edge_list",
]
