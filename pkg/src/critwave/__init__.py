"""critwave: a desk-scale laboratory for the 3-D radial semilinear wave
equation with scaling-invariant damping.

Subpackages follow the pipeline: `exponents` (critical-exponent algebra),
`transforms` (coordinate/unknown changes and data profiles), `nullgrid` and
`char_solver` (characteristic null-form marching, Picard iteration, blow-up
detection), `fd_oracle` (independent finite-difference cross-check),
`estimates` (weighted norms and inequality verifiers), and `harness` / `cli`
(configuration, sweeps, verification drivers, convergence studies).
"""

from .exponents import (
    DampingRegime,
    ExponentSet,
    admissible,
    critical_power_mu2,
    damping_regime,
    fujita_exponent,
    gamma_quadratic,
    iteration_exponents,
    strauss_exponent,
)
from .transforms import (
    Direction,
    NullPoint,
    ProblemParams,
    RadialProfile,
    initial_data_scaled,
    nonlinearity,
    null_to_phys,
    phys_to_null,
    potential,
    scale_unknown,
)
from .nullgrid import NullField, NullGrid
from .char_solver import (
    SolveReport,
    SolveStatus,
    blowup_scan,
    init_from_data,
    picard_solve,
    solve_linear,
    solve_semilinear,
)
from .fd_oracle import PolarField, PolarGrid, compare_solvers, fd_solve, free_bump_wave
from .estimates import (
    EstimateVerdict,
    NormTrace,
    data_norm,
    energy_norm,
    m_norm,
    morawetz_norm,
    rhs_norm,
    verify_energy,
    verify_hardy,
    verify_interpolated,
    verify_morawetz,
    verify_sobolev,
)

__version__ = "0.1.0"
