"""Siegel theta series for quadratic forms with one negative direction.

The package evaluates the holomorphic series built from the exact locally
constant cone weight f, its modular completion built from the Gaussian
simplex kernel g, and verifies the transformation laws and the scale-up
limit g -> f numerically.
"""

from .cone import (
    ConeFrame,
    FValue,
    XData,
    enum_bound,
    f_value,
    validate_frame,
    x_data,
)
from .errors import ConeThetaError
from .problem import Problem, load_problem, parse_problem
from .quadspace import (
    PairForm,
    QuadraticSpace,
    SplitData,
    pair_form,
    project,
    quadratic_space,
    signature,
    split,
)
from .simplex import (
    GResult,
    SimplexChart,
    erf_like,
    g_n1,
    g_value,
    gaussian_affine_simplex,
    simplex_chart,
    v_map,
    wedge_coeffs,
)
from .theta import (
    Characteristics,
    CosetSet,
    SiegelPoint,
    ThetaValue,
    characteristics,
    cosets,
    enumerate_ellipsoid,
    enumerate_lattice,
    fourier_coefficient,
    siegel_from_complex,
    siegel_point,
    theta_f,
    theta_g,
)
from .verify import (
    TransformReport,
    verify_invert,
    verify_limit,
    verify_translate,
)

__version__ = "0.1.0"
