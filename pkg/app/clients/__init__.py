from app.clients.federation_client import FederationClient, run_client

__all__ = [
    'FederationClient',
    'run_client'
]
