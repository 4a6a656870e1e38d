import asyncio

from .base import BaseCommand, EXIT_CONFIG_ERROR, EXIT_OK, has_errors
from ..harness import run_price_async
from ..reporting import write_prices


class PriceCommand(BaseCommand):
    """Несмещённая оценка цены coupled-sum оценщиком для каждого payoff."""

    name = 'price'

    def execute(self, experiment, args) -> int:
        if has_errors(self.check(experiment)):
            return EXIT_CONFIG_ERROR
        reports = asyncio.run(self._price_all(experiment))

        for label, report in reports.items():
            lo, hi = report.ci()
            print(f"{label}\tmean={report.mean:.8g}\tse={report.std_error:.3g}\tci=[{lo:.8g}, {hi:.8g}]"
                  f"\twork={report.avg_work_units:.4f}")
        path = write_prices(experiment.output_path, reports)
        self.logger.info(f"Prices written to {path}")
        return EXIT_OK

    async def _price_all(self, experiment):
        reports = {}
        for payoff in experiment.payoffs:
            reports[payoff.label] = await run_price_async(experiment, payoff)
        return reports
