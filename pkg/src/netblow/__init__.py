"""netblow: exact blow-up desingularization for network dynamical systems.

Represents networks of scalar nodes with polynomially expressible dynamics,
detects nilpotent equilibria exactly, applies quasihomogeneous directional
blow-up charts (node, parameter, edge and planar polar), desingularizes the
results, verifies structure preservation and chart conjugacy, and probes
stability numerically.
"""

from .blowup import (BlowupChart, ChartField, CircleEquilibriaResult,
                     ConjugacyReport, StructureReport, TrigField, bar_name,
                     circle_equilibria, common_factor_divide, desingularize,
                     directional_blowup, polar_blowup_2d,
                     polar_consistency_check, restrict, structure_report,
                     verify_conjugacy)
from .dynamics import (EquilibriumReport, EquilibriumSearch,
                       IntegratorControls, PortraitBundle, StabilityVerdict,
                       Trajectory, classify_equilibrium, compile_field,
                       find_equilibria, integrate, integrate_rk4_fixed,
                       stability_probe, sweep_portrait)
from .errors import (ChartError, DivisionError, EquilibriumError,
                     IntegrationError, InvariantError, LaurentError,
                     NetblowError, ParseError, SymbolError)
from .examples import (REGISTRY, ExampleEntry, get_example,
                       kuramoto4_phase_jacobian, kuramoto_reduced_field,
                       list_examples)
from .expr import Affine, Expression, parse_expression, taylor_expand
from .netsys import (Interaction, LinearDecomposition, NetworkSystem,
                     VectorField, assemble, diffusive_weights_2node,
                     emit_system_file, lift_parameters, linearize,
                     parse_system_file, shift_origin)
from .nilpotent import (RationalMatrix, SpectrumReport, char_poly,
                        is_nilpotent, jacobian, spectrum_classify)
from .poly import (Monomial, Polynomial, SymbolTable, as_fraction,
                   equal_given_inverses, exact_divide, reduce_by_relation)

__version__ = "0.1.0"
