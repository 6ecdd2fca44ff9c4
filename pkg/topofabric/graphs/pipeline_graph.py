from collections.abc import Callable, Hashable
from typing import Any, TypeVar

from langgraph.graph import END, START, StateGraph

from topofabric.graphs.base import BaseGraphState
from topofabric.logger.logging import add_logging_to_step

StateT = TypeVar("StateT", bound=BaseGraphState)


class PipelineStateGraph(StateGraph[StateT, StateT, StateT]):
    """
    StateGraph with the conventions shared by topofabric pipelines.
    """

    def __init__(
        self,
        state_schema: type[StateT],
        pipeline_name: str,
        config_schema: type[Any] | None = None,
        **kwargs,
    ):
        super().__init__(state_schema, config_schema, **kwargs)
        self.pipeline_name = pipeline_name

    def compile(self, checkpointer=None):
        """Compile the graph with topofabric defaults."""
        return (
            super()
            .compile(checkpointer=checkpointer)
            .with_config({"run_name": self.pipeline_name})
        )

    def add_node(  # type: ignore[override]
        self, func: Callable[..., Any], node_name: str | None = None, **kwargs: Any
    ) -> "PipelineStateGraph[StateT]":
        """
        Add a pipeline step wrapped in ``[ENTER]``/``[EXIT]`` step logging.

        Args:
            func: Step function taking the frame state and returning a partial update.
            node_name: Step name; defaults to ``func.__name__``.
            **kwargs: Passed through to ``StateGraph.add_node``.

        Returns:
            The graph instance for method chaining.
        """
        if node_name is None:
            node_name = func.__name__

        wrapped_func = add_logging_to_step(node_name)(func)

        super().add_node(node_name, wrapped_func, **kwargs)
        return self  # type: ignore[return-value]

    def add_chain(self, *node_names: str, start: bool = False, end: bool = False):
        """
        Connect nodes in sequence.

        Args:
            node_names: Names of nodes already added, in execution order.
            start: Connect START to the first node.
            end: Connect the last node to END.

        Returns:
            The graph instance for method chaining.
        """
        names = [START] * start + list(node_names) + [END] * end
        for source, target in zip(names, names[1:], strict=False):
            self.add_edge(source, target)
        return self

    def add_branch(
        self,
        source: str,
        predicate: Callable[[StateT], bool],
        if_true: str,
        if_false: str,
    ) -> "PipelineStateGraph[StateT]":
        """
        Route from ``source`` to ``if_true`` or ``if_false`` depending on ``predicate(state)``.

        Returns:
            The graph instance for method chaining.
        """

        def route(state: StateT) -> Hashable:
            return if_true if predicate(state) else if_false

        route.__name__ = f"route_after_{source}"
        self.add_conditional_edges(source, route, {if_true: if_true, if_false: if_false})
        return self
