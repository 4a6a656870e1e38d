import asyncio

from .base import BaseCommand, EXIT_CONFIG_ERROR, EXIT_OK, has_errors
from ..errors import NumericalDiagnosticError
from ..harness import run_convergence_async, variance_summands
from ..reporting import output_path_for, write_convergence


class ConvergenceCommand(BaseCommand):
    """Оценка Err(h) по уровням и наклон log2(Err) относительно n."""

    name = 'convergence'

    def execute(self, experiment, args) -> int:
        if has_errors(self.check(experiment)):
            return EXIT_CONFIG_ERROR
        results = asyncio.run(self._run_all(experiment))

        several = len(results) > 1
        unfitted = []
        for result in results:
            path = write_convergence(output_path_for(experiment.output_path, result.payoff, several), result)
            if result.slope is None:
                self.app.audit_logger.log_diagnostics(result.diagnostics)
                print(f"{result.payoff}\tslope=n/a\t{path}")
                unfitted.append(result.payoff)
                continue
            print(f"{result.payoff}\tslope={result.slope:.3f}\tse={result.slope_se:.3f}\t{path}")

            _, ratios = variance_summands(result.rows, experiment.level_distribution())
            for n, ratio in ratios:
                self.logger.info(f"{result.payoff}: variance summand ratio at n={n}: {ratio:.3f}")
            if any(ratio >= 1.0 for _, ratio in ratios):
                self.logger.warning(f"{result.payoff}: variance summands are not decaying; "
                                    "the coupled-sum variance may be infinite")

        # файлы уже записаны, в том числе для payoff без наклона
        if unfitted:
            raise NumericalDiagnosticError(
                f"fewer than two positive Err(h) points in the fit window for {', '.join(unfitted)}")
        return EXIT_OK

    async def _run_all(self, experiment):
        return [await run_convergence_async(experiment, payoff) for payoff in experiment.payoffs]
