from .builders import RingSpec, build_ring, parse_ring_spec
from .charpoly import FactoredPoly, IntPoly, charpoly_dense, charpoly_lowrank
from .local import find_structure_basis, is_local, local_profile
from .matrix import OrderingTag, build_product_matrix, make_ordering
from .ring import FiniteRing
from .theorems import CaseTag, Theorem, classify_case, predict
from .verify import SweepPlan, VerifyOptions, run_sweep, verify_instance
