"""Bell-CHSH simulation for energy-time entanglement under two postselection schemes."""
from .lhv import (
    InstructionSet,
    LhvModel,
    LocalInstruction,
    Path,
    model_beta_franson,
    paper_model,
    paper_tables,
    solve_p_for_beta,
)
from .montecarlo import (
    LhvSource,
    QuantumSource,
    RunConfig,
    TallySet,
    estimate_chsh,
    run,
    split_fractions,
)
from .phys_model import ChshValue, PhaseConfig, SettingPair, OutcomePair, qm_chsh
from .postselect import Scheme

__all__ = [
    "ChshValue", "InstructionSet", "LhvModel", "LhvSource", "LocalInstruction",
    "OutcomePair", "Path", "PhaseConfig", "QuantumSource", "RunConfig", "Scheme",
    "SettingPair", "TallySet", "estimate_chsh", "model_beta_franson", "paper_model",
    "paper_tables", "qm_chsh", "run", "solve_p_for_beta", "split_fractions",
]
__version__ = "0.1.0"
