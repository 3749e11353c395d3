"""Gate graphs, fixed-sector XY and Bose-Hubbard operators, and spectral-gap certificates."""

from .certificates import GapCertificate, certify, certify_chain, gamma_of, npl_lower, variational_upper
from .diagram import GateDiagram, compile_diagram, is_e1_gate_graph, new_diagram, read_diagram
from .element import E1, ElementGraph, load_element, mini_double_element, psi_state, validate_element
from .errors import ComputationError, GateGraphError, InputError
from .graph import Graph, is_simple, mu, new_graph, read_graph, write_graph
from .reductions import (FFBHInstance, Verdict, XYInstance, classify_ffbh, classify_xy, reduce_bh_to_xy,
                         reduce_to_simple)
from .sectors import (BosonBasis, HammingBasis, SectorOperator, bose_hubbard, hardcore_restriction,
                      is_frustration_free, lambda1, theta, xy_sector)
from .transforms import build_NSL, build_SL, lift_state, loopless_set, pipeline, verify_section4

__version__ = "0.1.0"
