from topofabric.graphs.integrated import FrameState, build_integrated_graph, design_control
from topofabric.graphs.pipeline_graph import PipelineStateGraph

__all__ = ["FrameState", "PipelineStateGraph", "build_integrated_graph", "design_control"]
