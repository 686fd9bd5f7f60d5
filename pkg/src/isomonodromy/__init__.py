"""Monodromy data and isomonodromic flows of meromorphic linear systems
with two second-order poles.

Subpackage map:

* ``linalg``     -- dense matrix kernels (spectra ladders, matrix powers,
                    unpivoted LDU, dominance orderings);
* ``gammafn``    -- complex Gamma function and pole-safe product ratios;
* ``closedform`` -- closed-form Stokes, monodromy, and connection matrices
                    from boundary data;
* ``odemono``    -- monodromy data by direct numerical transport of the ODE;
* ``flow``       -- the small-time integral-equation flow, coordinates, and
                    the inverse (monodromy -> boundary data) construction;
* ``ttmodels``   -- specializations: sine-Gordon/radial models and the
                    Toda-type family, including scans and braid moves;
* ``cli``        -- command-line entry points.
"""
from __future__ import annotations

__version__ = "0.1.0"

from . import errors  # noqa: F401
from .linalg import (  # noqa: F401
    EigenDecomposition,
    SpectrumLadder,
    delta_truncate,
    dominance_permutation,
    eigen,
    leading_spectra,
    matrix_power,
    unit_lu,
)
from .gammafn import GammaValue, gamma, gamma_product_ratio  # noqa: F401
from .closedform import (  # noqa: F401
    BoundaryDatum,
    Chamber,
    MonodromyData,
    boundary_datum,
    chat_factor,
    connection_chain,
    connection_matrix,
    monodromy_from_boundary,
    nu_from_boundary,
    p_matrix,
    piii_pq,
    similarity_residual,
    stokes_full,
    stokes_subdiagonal_inf,
    stokes_subdiagonal_zero,
)
from .odemono import (  # noqa: F401
    LinearSystemSpec,
    SectorSolution,
    integrate,
    monodromy,
    numeric_connection,
    numeric_monodromy_data,
    numeric_stokes,
    sector_solution,
)
from .flow import (  # noqa: F401
    AdjustedExponents,
    ClassificationResult,
    Coordinates,
    FlowState,
    boundary_to_hat,
    classify_log_confined,
    decoupled_tail_hat,
    inverse_monodromy,
    lambda_adjust,
    picard_flow,
)
from .ttmodels import (  # noqa: F401
    ScanRecord,
    SymmetryReport,
    TodaConfig,
    braid_conjugate,
    build_omega_d,
    bundled_order4_example,
    general_tt_symmetry_check,
    piii_boundary,
    piii_symmetric_frame,
    scan_csv_text,
    toda_boundary,
    toda_scan,
    toda_symmetric_frame,
    write_scan_csv,
)
