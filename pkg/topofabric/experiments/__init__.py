from topofabric.experiments.delay_sweep import run_delay_sweep
from topofabric.experiments.ingest import ingest_scene_sequence, parse_scene_sequence
from topofabric.experiments.ph_decay import run_ph_decay
from topofabric.experiments.pipeline import run_pipeline
from topofabric.experiments.surgery_demo import run_surgery_demo
from topofabric.experiments.unified_bound import evaluate_unified_bound

__all__ = [
    "evaluate_unified_bound",
    "ingest_scene_sequence",
    "parse_scene_sequence",
    "run_delay_sweep",
    "run_ph_decay",
    "run_pipeline",
    "run_surgery_demo",
]
