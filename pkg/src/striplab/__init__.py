"""Laplace eigenvalues on cylinders with striped Dirichlet/Neumann lateral
boundaries: perturbed solvers, homogenized limits, and convergence experiments."""

from .geometry import (Constant, CrossSection, CylinderGeometry, Disk, Modulated,
                       Oscillatory, Polygon, RandomBounded, RegimeParameters,
                       StripPattern, WidthLaw, bounding_constant_patterns,
                       build_pattern, classify_regime, pattern_subset,
                       strip_intervals)
from .mesh import (BoundaryTag, Grading, LateralCondition, Mesh, audit,
                   build_extruded_mesh, build_limit_mesh, build_meridian_mesh,
                   load_mesh, refine_nested, retag_lateral, retag_lateral_uniform,
                   save_mesh)
from .fem import SparseOperatorPair, assemble, quadratic_form_check
from .eigen import Spectrum, dense_spectrum_oracle, inertia_count, smallest_eigenpairs
from .limits import (LimitSpectrum, LimitSpectrumRequest, bessel_j,
                     bessel_j_derivative, closed_form_limit_spectrum,
                     fem_limit_spectrum, radial_roots)
from .experiments import (AsymptoticFit, BracketVerdict, ConvergenceReport,
                          DiscretizationPolicy, SweepConfig, fit_rate, run_sweep,
                          sharpness_probe, verify_bracketing)

__version__ = "0.1.0"
