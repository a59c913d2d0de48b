"""Galilean reduction of the Newtonian n-body problem.

Jacobi centering, the Lax pair Kdot = [P, K] on sp(2n-2), the Gram and
angular-momentum maps, symplectic normal forms and the coadjoint-orbit catalog.
"""
from galilax.errors import (ConsistencyError, DecompositionError, GalilaxError,
                            IntegrationError, InvalidInputError, SingularityError,
                            ToleranceInconsistencyError, UnsupportedCaseError)
from galilax.kernels import BACKEND
from galilax.configuration import (CenteredState, JacobiBasis, MassSystem, PhaseState,
                                   build_jacobi_basis, center, reconstruct)
from galilax.reduction import (AngularMomentum, GramElement, angular_momentum,
                               cone_membership, gram, spectral_traces, symplectic_form)
from galilax.forces import (Potential, assemble_P, energy, small_gram,
                            wintner_conley_full, wintner_conley_reduced)
from galilax.dynamics import (IntegratorConfig, Trajectory, casimirs, simulate,
                              step_K, step_Z)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AngularMomentum", "CenteredState", "ConsistencyError", "DecompositionError",
    "GalilaxError", "GramElement", "IntegrationError", "IntegratorConfig", "InvalidInputError",
    "JacobiBasis", "MassSystem", "PhaseState", "Potential", "SingularityError",
    "ToleranceInconsistencyError", "Trajectory", "UnsupportedCaseError", "angular_momentum",
    "assemble_P", "build_jacobi_basis", "casimirs", "center", "cone_membership", "energy", "gram",
    "reconstruct", "simulate", "small_gram", "spectral_traces", "step_K", "step_Z",
    "symplectic_form", "wintner_conley_full", "wintner_conley_reduced",
]
