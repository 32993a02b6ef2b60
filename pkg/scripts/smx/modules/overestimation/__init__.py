from .overestimation import OverestimationManager

__all__ = ['OverestimationManager']
