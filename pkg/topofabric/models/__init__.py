from topofabric.models.connection import ConnectionGraph, GaugeAnchor
from topofabric.models.constraints import AffineConstraint, EnergySpec, IterationReport
from topofabric.models.control import (
    EnvelopeReport,
    LoopModel,
    MarginReport,
    OrtsfCommand,
    OrtsfConfig,
    RationalTF,
    SimResult,
    SmithPredictor,
)
from topofabric.models.experiment import (
    BoundRecord,
    BoundReport,
    DecayTable,
    ExperimentConfig,
    RunReport,
    StepRecord,
    SweepResult,
)
from topofabric.models.graph import CycleBasis, Edge, WeightedGraph
from topofabric.models.scene import (
    Atom,
    FusionResult,
    LossWeights,
    OntologyRule,
    ReasoningTrace,
    SceneState,
    SemanticMap,
    SemanticTensor,
    SolveInfo,
    TrackingReport,
)
from topofabric.models.topology import (
    Filtration,
    MultiscaleResult,
    PersistenceDiagram,
    ScalePolicy,
    SurgeryLog,
    TailEstimate,
)

__all__ = [
    "AffineConstraint",
    "Atom",
    "BoundRecord",
    "BoundReport",
    "ConnectionGraph",
    "CycleBasis",
    "DecayTable",
    "Edge",
    "EnergySpec",
    "EnvelopeReport",
    "ExperimentConfig",
    "Filtration",
    "FusionResult",
    "GaugeAnchor",
    "IterationReport",
    "LoopModel",
    "LossWeights",
    "MarginReport",
    "MultiscaleResult",
    "OntologyRule",
    "OrtsfCommand",
    "OrtsfConfig",
    "PersistenceDiagram",
    "RationalTF",
    "ReasoningTrace",
    "RunReport",
    "ScalePolicy",
    "SceneState",
    "SemanticMap",
    "SemanticTensor",
    "SimResult",
    "SmithPredictor",
    "SolveInfo",
    "StepRecord",
    "SurgeryLog",
    "SweepResult",
    "TailEstimate",
    "TrackingReport",
    "WeightedGraph",
]
