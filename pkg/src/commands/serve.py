import asyncio

from .base import BaseCommand, EXIT_OK
from ..service import PricingService


class ServeCommand(BaseCommand):
    """HTTP сервис валидации и оценки (aiohttp)."""

    name = 'serve'
    needs_experiment = False

    def execute(self, experiment, args) -> int:
        try:
            asyncio.run(self._serve(args.host, args.port))
        except KeyboardInterrupt:
            self.logger.info("Received SIGINT signal (Ctrl+C)")
        return EXIT_OK

    async def _serve(self, host, port):
        service = PricingService(self.app.config_manager, self.app.audit_logger)
        runner = await service.start(host, port)
        try:
            await asyncio.Event().wait()
        except asyncio.CancelledError:
            pass
        finally:
            await runner.cleanup()
            self.logger.info("Pricing service stopped")
