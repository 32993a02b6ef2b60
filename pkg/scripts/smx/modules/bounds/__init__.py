from .bounds import BoundsManager

__all__ = ['BoundsManager']
