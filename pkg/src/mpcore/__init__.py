"""Multi-component and arbitrary-precision dense linear algebra.

Short formats: double-double, triple-double and quad-double values (tags
dd/td/qd, 106/159/212 significand bits) built from error-free binary64
transformations, stored planar so the same kernel formulas run on scalars
and on numpy lanes with bitwise-identical results. Long format: BigFloat,
a correctly rounded significand/exponent float at any precision >= 2 bits.

On top of the arithmetic: LU factorization with partial pivoting and
solves in either representation, mixed-precision iterative refinement
(short factorization, long residuals), a deterministic ill-conditioned
system generator, a text matrix file format, a benchmark CLI (`mpcore`)
and a C-ABI shared-library surface (`python -m mpcore.build_lib`).
"""

__version__ = "0.1.0"

from .bigfloat import (
    BigFloat,
    PrecisionContext,
    bf_from_multicomp,
    bf_parse_decimal,
    bf_to_multicomp,
)
from .errors import (
    ArithmeticOverflowError,
    DimensionError,
    DivideByZeroError,
    DomainError,
    GenerationError,
    MpcoreError,
    ParseError,
    SingularMatrixError,
)
from .linalg import (
    BfDomain,
    DenseMatrix,
    McDomain,
    PivotRecord,
    Vector,
    convert_matrix,
    convert_vector,
    lu_factor_pp,
    lu_solve,
    mat_mul_blocked,
    mat_norm_fro,
    mat_vec,
    max_rel_err,
    vec_norm2,
)
from .matfile import load_matrix, load_vector, save_matrix, save_vector
from .mcfloat import MultiComp, mc_add, mc_div, mc_mul, mc_sqrt, mc_sub
from .refine import (
    RefineConfig,
    RefineReport,
    check_stop,
    iterative_refinement,
)
from .simd import simd_enabled
from .testgen import GeneratedSystem, ProblemSpec, build_system

__all__ = [
    "__version__",
    "MpcoreError", "ArithmeticOverflowError", "DivideByZeroError",
    "DomainError", "SingularMatrixError", "DimensionError", "ParseError",
    "GenerationError",
    "MultiComp", "mc_add", "mc_sub", "mc_mul", "mc_div", "mc_sqrt",
    "BigFloat", "PrecisionContext", "bf_parse_decimal",
    "bf_to_multicomp", "bf_from_multicomp",
    "McDomain", "BfDomain", "Vector", "DenseMatrix", "PivotRecord",
    "lu_factor_pp", "lu_solve", "mat_vec", "mat_mul_blocked",
    "vec_norm2", "mat_norm_fro", "max_rel_err",
    "convert_vector", "convert_matrix",
    "save_matrix", "save_vector", "load_matrix", "load_vector",
    "RefineConfig", "RefineReport", "check_stop", "iterative_refinement",
    "ProblemSpec", "GeneratedSystem", "build_system",
    "simd_enabled",
]
