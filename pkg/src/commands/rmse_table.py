from .base import BaseCommand, EXIT_CONFIG_ERROR, EXIT_OK, has_errors
from ..harness import run_rmse_table
from ..reporting import write_rmse_table


class RmseTableCommand(BaseCommand):
    """RMSE, средняя работа и время coupled-sum оценщика против эталона Standard(ref_level)."""

    name = 'rmse-table'

    def execute(self, experiment, args) -> int:
        if has_errors(self.check(experiment)):
            return EXIT_CONFIG_ERROR
        rows = run_rmse_table(experiment)
        for row in rows:
            print(f"{row.model}\t{row.payoff}\trmse={row.rmse:.3e}\tse={row.rmse_se:.2e}"
                  f"\twork={row.avg_work:.4f}\t{row.elapsed_s:.2f}s")
        path = write_rmse_table(experiment.output_path, rows)
        self.logger.info(f"RMSE table written to {path}")
        return EXIT_OK
