from .base import BaseCommand, EXIT_OK, EXIT_CONFIG_ERROR, EXIT_NUMERICAL_FAILURE
from .validate import ValidateCommand
from .price import PriceCommand
from .convergence import ConvergenceCommand
from .rmse_table import RmseTableCommand
from .diagnostics import DiagnosticsCommand
from .serve import ServeCommand

COMMANDS = [ValidateCommand, PriceCommand, ConvergenceCommand, RmseTableCommand, DiagnosticsCommand, ServeCommand]

__all__ = ['BaseCommand', 'COMMANDS', 'EXIT_OK', 'EXIT_CONFIG_ERROR', 'EXIT_NUMERICAL_FAILURE']
