from .sweep import SweepManager

__all__ = ['SweepManager']
