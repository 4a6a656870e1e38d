"""
Audit trail of harness runs, validation diagnostics and service calls.
Works with the centralized logging system: every channel is a separate
non-propagating logger configured by setup_logging.
"""

import logging
from typing import Iterable, Optional

from .errors import Diagnostic

SEVERITY_LEVELS = {
    'LOW': logging.INFO,
    'MEDIUM': logging.WARNING,
    'HIGH': logging.ERROR,
    'CRITICAL': logging.CRITICAL,
}

# severity of validation diagnostics in the audit trail
DIAGNOSTIC_SEVERITY = {'warning': 'MEDIUM', 'error': 'HIGH'}


class AuditLogger:
    """
    Provides specialized methods for the audit events of the harness.
    """

    def __init__(self, config_manager):
        self.config_manager = config_manager
        self.audit_enabled = self.config_manager.get('logging.audit_log.enable', True)

        self.run_logger = logging.getLogger('AuditLoggerRun')
        self.api_logger = logging.getLogger('AuditLoggerAPI')
        self.diagnostics_logger = logging.getLogger('AuditLoggerDiagnostics')

    def log_run(self, command: str, model: str, payoff: Optional[str] = None, n_samples: Optional[int] = None,
                seed: Optional[int] = None, workers: Optional[int] = None, elapsed: Optional[float] = None,
                exit_code: int = 0):
        if not self.audit_enabled:
            return

        payoff_info = f" payoff:{payoff}" if payoff else ""
        samples_info = f" samples:{n_samples}" if n_samples is not None else ""
        seed_info = f" seed:{seed}" if seed is not None else ""
        workers_info = f" workers:{workers}" if workers is not None else ""
        time_info = f" ({elapsed:.3f}s)" if elapsed is not None else ""

        log_message = f"RUN {command} model:{model}{payoff_info}{samples_info}{seed_info}{workers_info}" \
                      f" exit:{exit_code}{time_info}"
        level = logging.INFO if exit_code == 0 else logging.WARNING
        self.run_logger.log(level, log_message)

    def log_diagnostic(self, code: str, severity: str = 'MEDIUM', message: Optional[str] = None):
        if not self.audit_enabled:
            return

        details_info = f" - {message}" if message else ""
        level = SEVERITY_LEVELS.get(severity, logging.WARNING)
        self.diagnostics_logger.log(level, f"DIAGNOSTIC {code} [{severity}]{details_info}")

    def log_diagnostics(self, diagnostics: Iterable[Diagnostic]):
        for d in diagnostics:
            self.log_diagnostic(d.code, DIAGNOSTIC_SEVERITY.get(d.severity, 'MEDIUM'), d.message)

    def log_api_call(self, endpoint: str, method: str, status: Optional[int] = None,
                     remote: Optional[str] = None, processing_time: Optional[float] = None):
        if not self.audit_enabled:
            return

        status_info = f" [{status}]" if status is not None else ""
        time_info = f" ({processing_time:.3f}s)" if processing_time is not None else ""
        log_message = f"{method} {endpoint}{status_info} from {remote}{time_info}"

        level = logging.INFO if status is None or status < 400 else logging.WARNING
        self.api_logger.log(level, log_message)
