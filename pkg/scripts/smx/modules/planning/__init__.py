from .planning import PlanningManager

__all__ = ['PlanningManager']
