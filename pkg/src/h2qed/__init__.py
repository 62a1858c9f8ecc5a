"""Finite-dimensional open-system cavity-QED simulator.

Builds reachable occupation-number bases for a family of light–matter
models (association/dissociation of a two-atom molecule, a covalent-bond
variant with phonons, and plain reference cavity models), assembles their
Hamiltonians sparsely, and integrates the quantum master equation with an
exact-unitary / Euler-dissipator split scheme.
"""

from .fock import (
    BasisState,
    Mode,
    Transition,
    TransitionKind,
    Variant,
    apply_annihilate,
    apply_create,
    apply_transition,
    parse_state,
    render_state,
)
from .generator import Basis, BasisOverflowError, ChannelSpec, RuleSet, generate_basis
from .lindblad import (
    DissipationChannel,
    EvolutionResult,
    UnitaryPropagator,
    compile_channel,
    density_from_vector,
    dissipator,
    evolve,
    influx,
    step,
    unitary_step,
)
from .operators import (
    ModelParams,
    SparseOperator,
    build_assoc_dissoc,
    build_covalent_bond,
    build_tcm,
    build_tchm,
    tensor_product_assoc_dissoc,
    tensor_product_covalent,
    tensor_product_tcm,
    tensor_product_tchm,
)
from .scenarios import (
    ScenarioConfig,
    SweepConfig,
    builtin_scenario,
    builtin_sweep,
    run_scenario,
    run_sweep,
)
from .thermal import (
    check_detailed_balance,
    gibbs_state,
    mu_to_temperature,
    temperature_to_mu,
    verify_product_stationarity,
)

__version__ = "0.1.0"
