from .engine import ChartEngine, InferredColumn, infer_column_types, propose_charts

__all__ = ["ChartEngine", "InferredColumn", "infer_column_types", "propose_charts"]
