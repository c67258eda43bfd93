import asyncio
import logging
from typing import Optional, Sequence

import numpy as np

# Schemas
from app.schemas import (AckPayload, ErrorPayload, FeatureSpecPayload, LocalMomentsPayload, MessageKind, Mode, ProtocolMessage,
                         ScalarMomentsPayload)

# Clients and Adapters
from app.clients import wire
from app.adapters.tensor_adapter import TensorAdapter

# Import Exceptions
from app import exceptions


class FederationClient:
    """
    Drives one client through the wire protocol: Hello, optional scalar round, spec, moment upload.
    """

    def __init__(self, host: str, port: int, io_timeout: float = 30.0, spec_timeout: float = 60.0):
        self.host = host
        self.port = port
        self.io_timeout = io_timeout
        self.spec_timeout = spec_timeout
        self.reader: Optional[asyncio.StreamReader] = None
        self.writer: Optional[asyncio.StreamWriter] = None

    async def __aenter__(self) -> "FederationClient":
        self.reader, self.writer = await asyncio.wait_for(asyncio.open_connection(self.host, self.port), self.io_timeout)
        return self

    async def __aexit__(self, *exc) -> None:
        if self.writer is not None:
            self.writer.close()
            try:
                await self.writer.wait_closed()
            except ConnectionError:
                pass

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Messaging

    async def send(self, kind: MessageKind, client_id: str, payload: dict) -> None:
        await wire.write_frame(self.writer, ProtocolMessage(kind=kind.value, client_id=client_id, payload=payload))

    async def receive(self, expected: MessageKind, timeout: Optional[float] = None) -> ProtocolMessage:
        message = await wire.read_frame(self.reader, timeout or self.io_timeout)
        if message is None:
            raise exceptions.ProtocolError("Server closed the connection.")
        wire.check_version(message)
        if message.kind == MessageKind.ERROR.value:
            error = ErrorPayload.model_validate(message.payload)
            raise exceptions.RemoteError(error.code, error.reason)
        if message.kind != expected.value:
            raise exceptions.ProtocolError(f"Expected {expected.value}, got {message.kind}.")
        return message

    async def run(self, client_id: str, data: np.ndarray, columns: Sequence[str]) -> AckPayload:
        """
        Full session for one client. Returns the final Ack.
        """
        # Circular import
        from app.services.federation_service import FederatedClient

        client = FederatedClient(client_id, data, columns)
        await self.send(MessageKind.HELLO, client_id, client.hello().model_dump(mode="json"))
        ack = AckPayload.model_validate((await self.receive(MessageKind.ACK)).payload)

        if ack.mode != Mode.SINGLE_ROUND:
            scalars = ScalarMomentsPayload(moments=client.scalar_moments().tolist())
            await self.send(MessageKind.SCALAR_MOMENTS, client_id, scalars.model_dump(mode="json"))
            await self.receive(MessageKind.ACK)

        broadcast = await self.receive(MessageKind.FEATURE_SPEC, timeout=self.spec_timeout)
        spec_payload = FeatureSpecPayload.model_validate(broadcast.payload)
        moments = client.local_moments(spec_payload.spec, spec_payload.domain_index)

        header, body = TensorAdapter.to_base64(moments)
        await self.send(MessageKind.LOCAL_MOMENTS, client_id, LocalMomentsPayload(header=header, body=body).model_dump())
        final = AckPayload.model_validate((await self.receive(MessageKind.ACK)).payload)
        logging.info(f"Client {client_id} finished: {final.message}")
        return final


async def run_client(host: str, port: int, client_id: str, data: np.ndarray, columns: Sequence[str],
                     io_timeout: float = 30.0, spec_timeout: float = 60.0) -> AckPayload:
    async with FederationClient(host, port, io_timeout=io_timeout, spec_timeout=spec_timeout) as client:
        return await client.run(client_id, data, columns)
