import logging
import time
from abc import ABC, abstractmethod
from typing import List

from ..errors import ConfigurationError, Diagnostic, HestonMCError, NumericalDiagnosticError, ParameterError
from ..experiment import ExperimentConfig, load_experiment
from ..harness import validate_config

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class BaseCommand(ABC):
    """Общая логика подкоманд: загрузка эксперимента, флаги, коды выхода."""

    name = ''
    needs_experiment = True

    def __init__(self, app_instance):
        self.app = app_instance
        self.logger = logging.getLogger(self.__class__.__name__)

    def load(self, args) -> ExperimentConfig:
        config_manager = self.app.config_manager
        experiment = load_experiment(args.config)
        return experiment.with_overrides(
            seed=args.seed,
            samples=args.samples,
            output_path=args.output,
            max_level=args.max_level,
            workers=args.workers or config_manager.get('runtime.workers', 1),
            block_size=config_manager.get('runtime.block_size'),
        )

    def check(self, experiment: ExperimentConfig) -> List[Diagnostic]:
        """Log and audit the validation diagnostics."""
        diagnostics = validate_config(experiment)
        for d in diagnostics:
            log = self.logger.error if d.is_error else self.logger.warning
            log(f"[{d.code}] {d.message}")
        self.app.audit_logger.log_diagnostics(diagnostics)
        return diagnostics

    def run(self, args) -> int:
        started = time.perf_counter()
        experiment = None
        try:
            if self.needs_experiment:
                experiment = self.load(args)
            code = self.execute(experiment, args)
        except (ConfigurationError, ParameterError) as e:
            self.logger.error(f"{self.name}: configuration error: {e}")
            code = EXIT_CONFIG_ERROR
        except NumericalDiagnosticError as e:
            self.logger.error(f"{self.name}: numerical diagnostic failed: {e}")
            code = EXIT_NUMERICAL_FAILURE
        except HestonMCError as e:
            self.logger.error(f"{self.name}: {e.__class__.__name__}: {e}")
            code = EXIT_NUMERICAL_FAILURE

        self.app.audit_logger.log_run(
            self.name,
            experiment.model_label if experiment else '-',
            n_samples=experiment.samples if experiment else None,
            seed=experiment.seed if experiment else None,
            workers=experiment.workers if experiment else None,
            elapsed=time.perf_counter() - started,
            exit_code=code,
        )
        return code

    @abstractmethod
    def execute(self, experiment: ExperimentConfig, args) -> int:
        """Run the command; return the process exit code."""


def has_errors(diagnostics: List[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
