class OpgraphError(Exception):
    """Base class for library errors."""


class DataError(OpgraphError, ValueError):
    """Input data violates a documented contract."""

    stage = "data"


class IngestError(DataError):
    stage = "ingest"


class GraphError(DataError):
    stage = "graph"


class AnalysisError(DataError):
    stage = "analyze"
