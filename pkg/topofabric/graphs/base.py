from pydantic import BaseModel, ConfigDict, Field


class BaseGraphState(BaseModel):
    """
    Base graph state for all pipeline graphs.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    run_id: str | None = Field(default=None, description="The run identifier")
    frame_index: int | None = Field(default=None, description="Index of the processed frame")
