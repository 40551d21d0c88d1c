from .builder import BuildReport, ColumnBlock, DescriptionBatch, HdcBuilder

__all__ = ["BuildReport", "ColumnBlock", "DescriptionBatch", "HdcBuilder"]
