from .engine import FewShotPair, QuestionEngine, SopDocument

__all__ = ["FewShotPair", "QuestionEngine", "SopDocument"]
