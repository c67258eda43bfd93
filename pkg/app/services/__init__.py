from app.services.citest_service import IndependenceTester
from app.services.discovery_service import DiscoveryService
from app.services.federation_service import AggregationServer, FederatedClient
from app.services.bench_service import BenchService
from app.services.app_service import AppService


__all__ = ['IndependenceTester',
           'DiscoveryService',
           'AggregationServer',
           'FederatedClient',
           'BenchService',
           'AppService']
