import asyncio
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

# Import models and schemas
from app.models import FeatureSpec, GlobalSummary, LocalMoments
from app.schemas import (AckPayload, FeatureSpecPayload, HelloPayload, LocalMomentsPayload, MessageKind, Mode,
                         ProtocolMessage, ScalarMomentsPayload)

# Import services
from app.services import features_service, summary_service

# Adapters and Clients
from app.adapters.tensor_adapter import TensorAdapter, upload_size_bytes
from app.clients import wire

# Import Exceptions
from app import exceptions


def client_ids(K: int) -> List[str]:
    return [f"client-{k:03d}" for k in range(1, K + 1)]


# In-Process Parties
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


class FederatedClient:
    """
    Holds one client's raw samples; only moments ever leave it.
    """

    def __init__(self, client_id: str, data: np.ndarray, columns: Optional[Sequence[str]] = None):
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] == 0:
            raise exceptions.ProtocolError("Dataset is empty.", client_id=client_id)
        self.client_id = client_id
        self.data = data
        self.columns = list(columns) if columns is not None else [f"V{i}" for i in range(data.shape[1])]
        if len(self.columns) != data.shape[1]:
            raise exceptions.ProtocolError(f"{len(self.columns)} column names for {data.shape[1]} columns.", client_id=client_id)

    def hello(self) -> HelloPayload:
        return HelloPayload(columns=self.columns, n_k=self.data.shape[0])

    def scalar_moments(self) -> np.ndarray:
        try:
            return summary_service.compute_scalar_moments(self.data)
        except exceptions.InputError as e:
            raise exceptions.ProtocolError(str(e), client_id=self.client_id)

    def local_moments(self, spec: FeatureSpec, domain_index: int) -> LocalMoments:
        """
        Append the surrogate column holding this client's domain index and compute raw feature moments.
        """
        augmented = np.column_stack([self.data, np.full(self.data.shape[0], float(domain_index))])
        maps = features_service.draw_feature_maps(spec, augmented.shape[1])
        try:
            moments = summary_service.compute_local_moments(augmented, maps, self.client_id, domain_index)
        except exceptions.InputError as e:
            raise exceptions.ProtocolError(str(e), client_id=self.client_id)
        logging.info(f"Client {self.client_id} computed moments over {moments.n_k} samples")
        return moments


class AggregationServer:
    """
    Protocol state of the server side: roster, bandwidth round, feature spec and uploads.
    """

    def __init__(self, roster: Sequence[str], h: int = 5, seed: int = 0, mode: Mode = Mode.TWO_ROUND,
                 fixed_bandwidth: float = 1.0, one_hot_discrete: bool = False):
        if not roster:
            raise exceptions.InvalidConfiguration("The client roster is empty.")
        if len(set(roster)) != len(roster):
            raise exceptions.InvalidConfiguration(f"Client ids in the roster must be unique: {list(roster)}.")
        self.roster = sorted(roster)
        self.h = h
        self.seed = seed
        self.mode = mode
        self.fixed_bandwidth = fixed_bandwidth
        self.one_hot_discrete = one_hot_discrete

        self.columns: Optional[List[str]] = None
        self.hellos: Dict[str, HelloPayload] = {}
        self.scalars: Dict[str, np.ndarray] = {}
        self.uploads: Dict[str, LocalMoments] = {}
        self.upload_bytes: Dict[str, int] = {}
        self._spec: Optional[FeatureSpec] = None

    @property
    def K(self) -> int:
        return len(self.roster)

    def domain_index(self, client_id: str) -> int:
        return self.roster.index(client_id) + 1

    def missing(self) -> List[str]:
        return [client_id for client_id in self.roster if client_id not in self.uploads]

    @property
    def complete(self) -> bool:
        return not self.missing()

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Rounds

    def register(self, client_id: str, hello: HelloPayload) -> None:
        if client_id not in self.roster:
            raise exceptions.ProtocolError("Client is not on the roster.", client_id=client_id)
        if self.columns is None:
            self.columns = list(hello.columns)
        elif list(hello.columns) != self.columns:
            raise exceptions.ProtocolError(f"Columns {hello.columns} differ from {self.columns}.", client_id=client_id)
        self.hellos[client_id] = hello

    def add_scalar_moments(self, client_id: str, moments: np.ndarray) -> None:
        moments = np.asarray(moments, dtype=float)
        if client_id not in self.hellos:
            raise exceptions.ProtocolError("Scalar moments sent before Hello.", client_id=client_id)
        if moments.shape != (len(self.columns), 3):
            raise exceptions.ProtocolError(f"Scalar moments of shape {moments.shape}, expected ({len(self.columns)}, 3).",
                                           client_id=client_id)
        self.scalars[client_id] = moments

    @property
    def spec_ready(self) -> bool:
        if self._spec is not None:
            return True
        if self.mode == Mode.SINGLE_ROUND:
            return len(self.hellos) == self.K
        return len(self.scalars) == self.K

    def feature_spec(self) -> FeatureSpec:
        """
        Global bandwidths from the pooled scalar moments (or the fixed bandwidth), plus the surrogate over K domains.
        """
        if self._spec is not None:
            return self._spec
        if not self.spec_ready:
            raise exceptions.ProtocolError(f"Feature spec requested before the roster reported: missing "
                                           f"{[c for c in self.roster if c not in self.hellos or c not in self.scalars]}.")

        d = len(self.columns)
        if self.mode == Mode.SINGLE_ROUND:
            sigmas = [self.fixed_bandwidth] * d
        else:
            pooled = np.zeros((d, 3))
            for client_id in self.roster:
                pooled = pooled + self.scalars[client_id]
            sigmas = features_service.bandwidths_from_moments(pooled)

        self._spec = features_service.build_feature_spec(sigmas, self.K, self.h, self.seed, self.one_hot_discrete)
        logging.info(f"Feature spec ready: h={self.h}, K={self.K}, bandwidths={[round(s, 4) for s in sigmas]}")
        return self._spec

    def add_upload(self, client_id: str, moments: LocalMoments) -> bool:
        """
        Record a client's moments. Returns False for an identical re-upload; a differing one is a conflict.
        """
        if client_id not in self.roster:
            raise exceptions.ProtocolError("Client is not on the roster.", client_id=client_id)
        expected_shape = (len(self.columns) + 1, self.h) if self.columns is not None else moments.s1.shape
        if moments.s1.shape != expected_shape:
            raise exceptions.ProtocolError(f"Moments of shape {moments.s1.shape}, expected {expected_shape}.", client_id=client_id)

        previous = self.uploads.get(client_id)
        if previous is not None:
            if (previous.n_k == moments.n_k and np.array_equal(previous.s1, moments.s1)
                    and np.array_equal(previous.s2, moments.s2)):
                logging.info(f"Duplicate upload from {client_id} ignored")
                return False
            raise exceptions.DuplicateUploadConflict(f"Client {client_id} re-uploaded different moments.")

        moments = moments.model_copy(update={"client_id": client_id, "domain_index": self.domain_index(client_id)})
        self.uploads[client_id] = moments
        self.upload_bytes[client_id] = upload_size_bytes(moments.n_variables, moments.h)
        return True

    def summary(self) -> GlobalSummary:
        if not self.complete:
            raise exceptions.PartialRosterError(self.missing())
        return summary_service.aggregate([self.uploads[client_id] for client_id in self.roster])


def simulate(datasets: Sequence[np.ndarray], h: int = 5, seed: int = 0, columns: Optional[Sequence[str]] = None,
             single_round: bool = False, fixed_bandwidth: float = 1.0,
             one_hot_discrete: bool = False) -> Tuple[GlobalSummary, AggregationServer]:
    """
    Both protocol rounds in process. Client k of the list gets id client-00k and domain index k.
    """
    if not datasets:
        raise exceptions.ProtocolError("No client datasets.")

    ids = client_ids(len(datasets))
    clients = [FederatedClient(client_id, data, columns) for client_id, data in zip(ids, datasets)]
    mode = Mode.SINGLE_ROUND if single_round else Mode.TWO_ROUND
    server = AggregationServer(ids, h=h, seed=seed, mode=mode, fixed_bandwidth=fixed_bandwidth,
                               one_hot_discrete=one_hot_discrete)

    for client in clients:
        server.register(client.client_id, client.hello())
    if mode == Mode.TWO_ROUND:
        for client in clients:
            server.add_scalar_moments(client.client_id, client.scalar_moments())

    spec = server.feature_spec()
    for client in clients:
        server.add_upload(client.client_id, client.local_moments(spec, server.domain_index(client.client_id)))
    return server.summary(), server


# Wire Server
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


class FederationSession:
    """
    Serves one aggregation session over TCP. Connections are handled concurrently, state changes under one lock.
    """

    def __init__(self, server: AggregationServer, roster_timeout: float = 60.0, io_timeout: float = 30.0):
        self.server = server
        self.roster_timeout = roster_timeout
        self.io_timeout = io_timeout
        self._lock = asyncio.Lock()
        self._spec_ready = asyncio.Event()
        self._done = asyncio.Event()

    async def _reply(self, writer: asyncio.StreamWriter, kind: MessageKind, payload: dict, client_id: str = "") -> None:
        await wire.write_frame(writer, ProtocolMessage(kind=kind.value, client_id=client_id, payload=payload))

    async def _send_spec(self, writer: asyncio.StreamWriter, client_id: str) -> None:
        await asyncio.wait_for(self._spec_ready.wait(), self.roster_timeout)
        payload = FeatureSpecPayload(spec=self.server.feature_spec(), domain_index=self.server.domain_index(client_id))
        await self._reply(writer, MessageKind.FEATURE_SPEC, payload.model_dump(mode="json"), client_id)

    async def _update_spec_state(self) -> None:
        if self.server.spec_ready:
            self.server.feature_spec()
            self._spec_ready.set()

    async def _dispatch(self, message: ProtocolMessage, writer: asyncio.StreamWriter) -> None:
        client_id = message.client_id
        if message.kind == MessageKind.HELLO.value:
            async with self._lock:
                self.server.register(client_id, HelloPayload.model_validate(message.payload))
                await self._update_spec_state()
            await self._reply(writer, MessageKind.ACK, AckPayload(mode=self.server.mode).model_dump(mode="json"), client_id)
            if self.server.mode == Mode.SINGLE_ROUND:
                await self._send_spec(writer, client_id)

        elif message.kind == MessageKind.SCALAR_MOMENTS.value:
            payload = ScalarMomentsPayload.model_validate(message.payload)
            async with self._lock:
                self.server.add_scalar_moments(client_id, np.asarray(payload.moments, dtype=float))
                await self._update_spec_state()
            await self._reply(writer, MessageKind.ACK, AckPayload(message="scalar moments received").model_dump(mode="json"), client_id)
            await self._send_spec(writer, client_id)

        elif message.kind == MessageKind.LOCAL_MOMENTS.value:
            payload = LocalMomentsPayload.model_validate(message.payload)
            moments = TensorAdapter.from_base64(payload.header, payload.body, client_id)
            async with self._lock:
                fresh = self.server.add_upload(client_id, moments)
                if self.server.complete:
                    self._done.set()
            note = "moments received" if fresh else "duplicate upload ignored"
            await self._reply(writer, MessageKind.ACK, AckPayload(message=note).model_dump(mode="json"), client_id)

        else:
            await wire.write_frame(writer, wire.error_message("kind", f"Unknown message kind {message.kind!r}.", client_id))

    async def handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            while True:
                message = await wire.read_frame(reader, self.io_timeout)
                if message is None:
                    break
                try:
                    wire.check_version(message)
                except exceptions.VersionMismatch as e:
                    await wire.write_frame(writer, wire.error_message(e.code, str(e), message.client_id))
                    break
                try:
                    await self._dispatch(message, writer)
                except exceptions.ProtocolException as e:
                    logging.warning(f"Rejected {message.kind} from {message.client_id or 'unknown client'}: {str(e)}")
                    await wire.write_frame(writer, wire.error_message(e.code, str(e), message.client_id))
                except (ValueError, exceptions.InputError) as e:
                    await wire.write_frame(writer, wire.error_message("protocol", str(e), message.client_id))
        except (exceptions.ProtocolError, asyncio.TimeoutError, ConnectionError) as e:
            logging.warning(f"Closing connection: {str(e) or type(e).__name__}")
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass

    async def run(self, host: str, port: int, on_listening: Optional[Callable[[int], None]] = None) -> GlobalSummary:
        """
        Listen until every roster client has uploaded, then return the aggregated summary.
        """
        listener = await asyncio.start_server(self.handle, host, port)
        bound_port = listener.sockets[0].getsockname()[1]
        logging.info(f"Aggregation server listening on {host}:{bound_port} for {self.server.K} clients")
        if on_listening is not None:
            on_listening(bound_port)

        try:
            await asyncio.wait_for(self._done.wait(), self.roster_timeout)
        except asyncio.TimeoutError:
            raise exceptions.PartialRosterError(self.server.missing())
        finally:
            listener.close()
        return self.server.summary()


async def serve(host: str, port: int, server: AggregationServer, roster_timeout: float = 60.0, io_timeout: float = 30.0,
                on_listening: Optional[Callable[[int], None]] = None) -> GlobalSummary:
    session = FederationSession(server, roster_timeout=roster_timeout, io_timeout=io_timeout)
    return await session.run(host, port, on_listening)
