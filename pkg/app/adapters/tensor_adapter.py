import base64
from typing import Any, Dict, Optional, Tuple

import numpy as np
import orjson

# Model Imports
from app.models import LocalMoments

# Import Exceptions
from app import exceptions


TENSOR_VERSION = 1
LITTLE_ENDIAN_F8 = np.dtype('<f8')


def upload_size_bytes(d_prime: int, h: int) -> int:
    """
    Exact body size of one client's moment upload.
    """
    return 8 * (d_prime * h + d_prime ** 2 * h ** 2)


class TensorAdapter:
    """
    Codecs for LocalMoments: binary (JSON header line then raw body), base64 for the wire, and a JSON-array debug form.
    """

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Raw Body

    @staticmethod
    def encode(moments: LocalMoments) -> Tuple[Dict[str, int], bytes]:
        d_prime, h = moments.n_variables, moments.h
        header = {"version": TENSOR_VERSION, "d_prime": d_prime, "h": h, "n_k": moments.n_k}
        body = (np.ascontiguousarray(moments.s1, dtype=LITTLE_ENDIAN_F8).tobytes()
                + np.ascontiguousarray(moments.s2, dtype=LITTLE_ENDIAN_F8).tobytes())
        return header, body

    @staticmethod
    def decode(header: Dict[str, Any], body: bytes, client_id: str = "", domain_index: int = 1) -> LocalMoments:
        try:
            version, d_prime, h, n_k = (int(header[key]) for key in ("version", "d_prime", "h", "n_k"))
        except (KeyError, TypeError, ValueError) as e:
            raise exceptions.ProtocolError(f"Malformed tensor header {header}: {str(e)}", client_id=client_id)
        if version != TENSOR_VERSION:
            raise exceptions.VersionMismatch(f"Tensor version {version} is not supported (expected {TENSOR_VERSION}).")
        if d_prime < 1 or h < 1 or n_k < 1:
            raise exceptions.ProtocolError(f"Invalid tensor header {header}.", client_id=client_id)

        expected = upload_size_bytes(d_prime, h)
        if len(body) != expected:
            raise exceptions.ProtocolError(f"Tensor body has {len(body)} bytes, header implies {expected}.", client_id=client_id)

        values = np.frombuffer(body, dtype=LITTLE_ENDIAN_F8).astype(np.float64)
        s1 = values[:d_prime * h].reshape(d_prime, h)
        s2 = values[d_prime * h:].reshape(d_prime, d_prime, h, h)
        return LocalMoments(client_id=client_id, domain_index=domain_index, n_k=n_k, s1=s1, s2=s2)

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Wire Form

    @classmethod
    def to_base64(cls, moments: LocalMoments) -> Tuple[Dict[str, int], str]:
        header, body = cls.encode(moments)
        return header, base64.b64encode(body).decode("ascii")

    @classmethod
    def from_base64(cls, header: Dict[str, Any], text: str, client_id: str = "", domain_index: int = 1) -> LocalMoments:
        try:
            body = base64.b64decode(text, validate=True)
        except (ValueError, TypeError) as e:
            raise exceptions.ProtocolError(f"Tensor body is not valid base64: {str(e)}", client_id=client_id)
        return cls.decode(header, body, client_id, domain_index)

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Files

    @classmethod
    def write_binary(cls, path: str, moments: LocalMoments) -> None:
        header, body = cls.encode(moments)
        with open(path, "wb") as handle:
            handle.write(orjson.dumps(header) + b"\n" + body)

    @classmethod
    def read_binary(cls, path: str, client_id: str = "", domain_index: int = 1) -> LocalMoments:
        with open(path, "rb") as handle:
            raw = handle.read()
        line, _, body = raw.partition(b"\n")
        try:
            header = orjson.loads(line)
        except orjson.JSONDecodeError as e:
            raise exceptions.InputError(f"{path}: malformed tensor header: {str(e)}")
        return cls.decode(header, body, client_id, domain_index)

    @classmethod
    def to_json_arrays(cls, moments: LocalMoments) -> Dict[str, Any]:
        header, _ = cls.encode(moments)
        return {"header": header, "s1": moments.s1.tolist(), "s2": moments.s2.tolist()}

    @staticmethod
    def from_json_arrays(document: Dict[str, Any], client_id: str = "", domain_index: Optional[int] = None) -> LocalMoments:
        header = document["header"]
        s1 = np.asarray(document["s1"], dtype=np.float64)
        s2 = np.asarray(document["s2"], dtype=np.float64)
        d_prime, h = int(header["d_prime"]), int(header["h"])
        if s1.shape != (d_prime, h) or s2.shape != (d_prime, d_prime, h, h):
            raise exceptions.ProtocolError(f"Array shapes {s1.shape}/{s2.shape} do not match header {header}.", client_id=client_id)
        return LocalMoments(client_id=client_id, domain_index=domain_index or 1, n_k=int(header["n_k"]), s1=s1, s2=s2)
