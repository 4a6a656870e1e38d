import logging
import time
from aiohttp import web

from ..payoffs import PAYOFF_TYPES


class InfoHandlers:
    """Обработчики информации о сервисе."""

    def __init__(self, service_instance):
        self.service = service_instance
        self.logger = logging.getLogger(self.__class__.__name__)

    async def _api_health_check(self, request):
        """Health check endpoint."""
        self.logger.debug('Health check endpoint.')
        return web.json_response({
            'success': True,
            'status': 'ok',
            'uptime_s': round(time.time() - self.service.started_at, 3),
            'payoffs': sorted(PAYOFF_TYPES),
            'rate_models': ['cir', 'hw', 'bk'],
        })
