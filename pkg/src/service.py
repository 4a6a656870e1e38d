"""
HTTP pricing service
====================

Small aiohttp application exposing validation and coupled-sum pricing of
experiment documents. Started by the ``serve`` command.
"""

import logging
import time

from aiohttp import web

from .audit_logger import AuditLogger
from .handlers import info, pricing


class PricingService:
    """
    aiohttp application around the harness operations.
    """

    def __init__(self, config_manager, audit_logger: AuditLogger = None):
        self.config_manager = config_manager
        self.logger = logging.getLogger(self.__class__.__name__)
        self.audit_logger = audit_logger or AuditLogger(config_manager)

        if self.config_manager.get('logging.aiohttp_access_log.disable'):
            access_logger = logging.getLogger('aiohttp.access')
            access_logger.setLevel(logging.WARNING)
            access_logger.propagate = False

        self.started_at = time.time()
        self.app = web.Application(middlewares=[self.logging_middleware])
        self._init_handlers()
        self._setup_routes()
        self.logger.info("PricingService initialized")

    @web.middleware
    async def logging_middleware(self, request, handler):
        start_time = time.perf_counter()
        try:
            response = await handler(request)
        except web.HTTPException as ex:
            self.audit_logger.log_api_call(request.path, request.method, ex.status, request.remote,
                                           time.perf_counter() - start_time)
            raise
        except Exception as e:
            processing_time = time.perf_counter() - start_time
            self.audit_logger.log_diagnostic(
                'unhandled_exception', 'HIGH',
                f"{request.method} {request.path} ({processing_time:.3f}s): {e}")
            raise
        self.audit_logger.log_api_call(request.path, request.method, response.status, request.remote,
                                       time.perf_counter() - start_time)
        return response

    def _init_handlers(self):
        self.info_handlers = info.InfoHandlers(self)
        self.pricing_handlers = pricing.PricingHandlers(self)

    def _setup_routes(self):
        # Health check - проверка работоспособности сервиса
        self.app.router.add_get('/api/health', self.info_handlers._api_health_check)

        # Pricing API - валидация и оценка документов эксперимента
        self.app.router.add_post('/api/validate', self.pricing_handlers._api_validate)
        self.app.router.add_post('/api/price', self.pricing_handlers._api_price)

    async def start(self, host: str = None, port: int = None):
        host = host or self.config_manager.get('service.host', '127.0.0.1')
        port = port or self.config_manager.get('service.port', 8080)

        runner = web.AppRunner(self.app)
        await runner.setup()
        site = web.TCPSite(runner, host, port)
        await site.start()
        self.logger.info(f"Pricing service started on http://{host}:{port}")
        return runner
