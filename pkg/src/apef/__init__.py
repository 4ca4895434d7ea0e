"""Area preserving sixth-order elastic flow of closed planar curves."""

from .config import OutputPolicy, RunConfig, Stopping
from .curve import (DiscreteCurve, GeometricCache, NormalField, area, arclength_derivative, geometry,
                    length, load_snapshot, nabla_s, normal_projection, resample_uniform, rotation_index,
                    save_snapshot, self_intersects)
from .errors import (ApefError, ConfigurationError, DegenerateCurve, GenerationError, GraphModeBreakdown,
                     InvalidRHS, NotApplicable, StiffnessFailure, UnresolvedTopology)
from .flow import DiagnosticsRecord, FlowState, StepPolicy, initial_state, run, step, step_graph
from .hspace import HGammaElement, h_dual_norm, h_norm, interpolation_check, project_to_hgamma, weak_solve
from .initial import InitialDatum, generate
from .spectral import differentiate
from .stationary import C_STAR, StationaryReport, analyze, embeddedness_threshold
from .variational import EnergyReport, dissipation, energy, flow_velocity, l2_gradient

__version__ = "0.1.0"
