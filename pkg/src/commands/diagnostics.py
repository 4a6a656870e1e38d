from .base import BaseCommand, EXIT_OK
from ..diagnostics import run_diagnostics
from ..errors import NumericalDiagnosticError
from ..reporting import write_diagnostics


class DiagnosticsCommand(BaseCommand):
    """Самопроверка точных сэмплеров: моменты, KS и порядок сильной сходимости."""

    name = 'diagnostics'

    def execute(self, experiment, args) -> int:
        checks = run_diagnostics(experiment, args.samples)
        failed = [c for c in checks if not c.passed]
        for c in failed:
            self.app.audit_logger.log_diagnostic(c.name, 'HIGH',
                                                 f"observed {c.observed:.6g}, expected {c.expected:.6g}")
        path = write_diagnostics(experiment.output_path, checks)
        print(f"{len(checks) - len(failed)}/{len(checks)} checks passed\t{path}")
        if failed:
            names = ', '.join(c.name for c in failed)
            raise NumericalDiagnosticError(f"{len(failed)} self-check(s) failed: {names}")
        return EXIT_OK
