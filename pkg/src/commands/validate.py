from .base import BaseCommand, EXIT_CONFIG_ERROR, EXIT_OK, has_errors


class ValidateCommand(BaseCommand):
    """Проверка документа эксперимента без запуска симуляции."""

    name = 'validate'

    def execute(self, experiment, args) -> int:
        diagnostics = self.check(experiment)
        for d in diagnostics:
            print(f"{d.severity}\t{d.code}\t{d.message}")
        if not diagnostics:
            print(f"ok\t{experiment.model_label}\tno findings")
        return EXIT_CONFIG_ERROR if has_errors(diagnostics) else EXIT_OK
