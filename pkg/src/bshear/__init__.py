"""Hybrid shearlet/wavelet frames on the unit square.

Interior cone-adapted shearlets plus near-boundary wavelets, with matrix-free
analysis/synthesis/frame operators, iterative frame-bound and singular-value
estimation, cartoon-like test images, and scripted experiments.
"""

from .errors import ConfigurationError, ConvergenceError, NumericalError
from .geometry import (BinaryMask, DigitalDomain, DistanceField, build_domain,
                       distance_to_boundary, tubular_region)
from .wavelet import (WaveletIndex, WaveletSystem, build_wavelet_system,
                      wavelet_analysis, wavelet_atom, wavelet_synthesis)
from .shearlet import (ShearletCoefficients, ShearletIndex, ShearletSystem,
                       build_shearlet_system, default_ladder, shear_count,
                       shearlet_analysis, shearlet_atom, shearlet_synthesis)
from .hybrid import (BoundaryShearletSystem, HybridCoefficients, HybridConfig,
                     analysis, build_boundary_shearlet_system,
                     frame_operator_apply, select_boundary_wavelets,
                     select_interior_shearlets, sobolev_weights, synthesis)
from .linalg import (LinearOperatorHandle, SpectralEstimate, cg_solve,
                     extremal_eigenvalues, largest_singular_value)
from .cartoon import (CartoonSpec, disk_spec, random_cartoon_spec,
                      rasterize_cartoon, reference_smoothness_report)
from .experiments import (ExperimentReport, SystemParams, cross_decay_curve,
                          frame_bound_sweep, frame_operator_handle,
                          gelfand_table, gramian_report, hybrid_for,
                          nterm_curve, random_bandlimited, sobolev_proxy)

__version__ = "0.1.0"
