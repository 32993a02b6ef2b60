from .learning import LearningManager

__all__ = ['LearningManager']
