"""Evaluation, learning curves, run persistence, the chat REPL and the command line."""
from .metrics import EvalReport, LearningCurve, emit_curve, evaluate, read_curve, report_from_traces

__all__ = ["EvalReport", "LearningCurve", "emit_curve", "evaluate", "read_curve", "report_from_traces"]
