from . import info, pricing

__all__ = ['info', 'pricing']
