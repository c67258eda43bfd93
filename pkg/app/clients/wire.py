import asyncio
import struct
from typing import Optional

import orjson
from pydantic import ValidationError

# Schemas
from app.schemas import ErrorPayload, MessageKind, ProtocolMessage, PROTOCOL_VERSION

# Import Exceptions
from app import exceptions


HEADER = struct.Struct(">I")
MAX_FRAME_SIZE = 256 * 1024 * 1024


def encode_frame(message: ProtocolMessage) -> bytes:
    body = orjson.dumps(message.model_dump(mode="json"))
    return HEADER.pack(len(body)) + body


def decode_body(body: bytes) -> ProtocolMessage:
    try:
        return ProtocolMessage.model_validate(orjson.loads(body))
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise exceptions.ProtocolError(f"Malformed frame: {str(e)}")


async def read_frame(reader: asyncio.StreamReader, timeout: Optional[float] = None) -> Optional[ProtocolMessage]:
    """
    Next message, or None when the peer closed the stream cleanly between frames.
    """
    try:
        header = await asyncio.wait_for(reader.readexactly(HEADER.size), timeout)
    except asyncio.IncompleteReadError as e:
        if not e.partial:
            return None
        raise exceptions.ProtocolError("Connection closed inside a frame header.")

    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME_SIZE:
        raise exceptions.ProtocolError(f"Frame of {length} bytes exceeds the {MAX_FRAME_SIZE} byte limit.")
    try:
        body = await asyncio.wait_for(reader.readexactly(length), timeout)
    except asyncio.IncompleteReadError:
        raise exceptions.ProtocolError("Connection closed inside a frame body.")
    return decode_body(body)


async def write_frame(writer: asyncio.StreamWriter, message: ProtocolMessage) -> None:
    writer.write(encode_frame(message))
    await writer.drain()


def error_message(code: str, reason: str, client_id: str = "") -> ProtocolMessage:
    return ProtocolMessage(kind=MessageKind.ERROR.value, client_id=client_id,
                           payload=ErrorPayload(code=code, reason=reason).model_dump())


def check_version(message: ProtocolMessage) -> None:
    if message.version != PROTOCOL_VERSION:
        raise exceptions.VersionMismatch(f"Protocol version {message.version} is not supported (expected {PROTOCOL_VERSION}).")
