"""Six-component photon spinor formalism.

Exact operator algebra, constraint-satisfying helicity modes, spectral
evolution, spin/orbital observables, classical-field correspondence and
Lorentz-boost covariance checks, plus a scenario-driven CLI.
"""

from .algebra import (IdentityReport, Matrix6, OPERATORS, OperatorSet,
                      build_operators, commutator, hamiltonian_matrix,
                      reduced_spin_along, spin_component_along,
                      verify_identities)
from .errors import (ConfigError, ConstraintViolated, GridTooCoarse,
                     IdentityViolation, NotTransverse, NotUnitVector,
                     OffGridMode, OffLightCone, PhotonSpinorError,
                     QuadratureFailure, ResourceError, ZeroWavevector)
from .fields import (ComplexFieldPair, GridSpec, PositionField, RealFieldPair,
                     SpectralField, analytic_signal, classical_to_wavefunction,
                     darwin_consistency, evolve_spectral, field_energy,
                     kernel_pair_check, load_field, maxwell_evolve,
                     rc_residual, save_field, state_to_grid, to_momentum,
                     to_position, wavefunction_to_classical)
from .lorentz import (Boost, CovarianceReport, FourVector, boost_four_vector,
                      boost_mode, boost_state, boost_wavevector,
                      covariance_check, spinor_boost_matrix)
from .modes import (HelicityBasis, ModeState, PlaneWaveMode, WaveVector,
                    constraint_residual, energy_eigenbasis, evolve,
                    helicity_basis, make_mode, make_state, normalize,
                    positive_energy_project, random_state, spinor_of,
                    state_from_json, state_to_json, total_norm)
from .observables import (DensityVariants, ObservableReport, energy,
                          export_density_csv, observable_report,
                          orbital_am_expectation, orbital_am_position,
                          probability_density_variants, spin_density_variants,
                          spin_expectation, total_probability)
from .units import NATURAL, SI, Units

__version__ = "0.1.0"
