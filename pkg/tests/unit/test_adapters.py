import hashlib
import os
from datetime import datetime

import numpy as np
import orjson
import pytest

# Import models
from app.models import Dag, LocalMoments, PatternGraph

# Import Adapters
from app.adapters import BundleAdapter, CsvAdapter, GraphAdapter, TensorAdapter
from app.adapters.tensor_adapter import upload_size_bytes

# Import Exceptions
from app import exceptions


@pytest.fixture
def moments(rng) -> LocalMoments:
    return LocalMoments(client_id="client-001", domain_index=1, n_k=7, s1=rng.standard_normal((3, 2)),
                        s2=rng.standard_normal((3, 3, 2, 2)))


# Tensors
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def test_upload_size_formula():
    assert upload_size_bytes(3, 5) == 8 * (3 * 5 + 9 * 25)


def test_tensor_encoding_is_exact(moments):
    header, body = TensorAdapter.encode(moments)
    assert header == {"version": 1, "d_prime": 3, "h": 2, "n_k": 7}
    assert len(body) == upload_size_bytes(3, 2)
    decoded = TensorAdapter.decode(header, body)
    assert np.array_equal(decoded.s1, moments.s1)
    assert np.array_equal(decoded.s2, moments.s2)
    assert decoded.n_k == 7


def test_tensor_body_size_is_checked(moments):
    header, body = TensorAdapter.encode(moments)
    with pytest.raises(exceptions.ProtocolError):
        TensorAdapter.decode(header, body[:-8])


def test_tensor_version_is_checked(moments):
    header, body = TensorAdapter.encode(moments)
    with pytest.raises(exceptions.VersionMismatch):
        TensorAdapter.decode(dict(header, version=2), body)


def test_tensor_binary_file(tmp_path, moments):
    path = str(tmp_path / "moments.bin")
    TensorAdapter.write_binary(path, moments)
    assert np.array_equal(TensorAdapter.read_binary(path).s2, moments.s2)


def test_tensor_json_arrays(moments):
    document = orjson.loads(orjson.dumps(TensorAdapter.to_json_arrays(moments)))
    assert np.array_equal(TensorAdapter.from_json_arrays(document).s1, moments.s1)


# Graphs
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def test_graph_text_and_json_files(tmp_path):
    matrix = np.array([[0, 1, 0], [0, 0, 2], [0, 2, 0]], dtype=np.int8)
    pattern = GraphAdapter.pattern_from_matrix(matrix)
    for name in ("pattern.txt", "pattern.json"):
        path = str(tmp_path / name)
        GraphAdapter.write(pattern, path)
        loaded = GraphAdapter.read_graph(path)
        assert isinstance(loaded, PatternGraph)
        assert np.array_equal(loaded.adjacency, matrix)


def test_text_format():
    assert GraphAdapter.to_text(Dag(d=2, edges=[(1, 0)])) == "0 0\n1 0\n"


def test_dag_document_records_forced_flag():
    document = GraphAdapter.to_document(Dag(d=2, edges=[(0, 1)], forced=True))
    assert document == {"d": 2, "edges": [{"from": 0, "to": 1, "mark": "directed"}], "forced": True}


@pytest.mark.parametrize("matrix", [
    [[0, 2], [0, 0]],
    [[0, 1], [1, 0]],
    [[1, 0], [0, 0]],
    [[0, 3], [0, 0]],
])
def test_invalid_matrices(matrix):
    with pytest.raises(exceptions.InputError):
        GraphAdapter.pattern_from_matrix(np.array(matrix))


def test_read_dag_rejects_undirected(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text("0 2\n2 0\n")
    with pytest.raises(exceptions.InputError):
        GraphAdapter.read_dag(str(path))


def test_read_missing_graph(tmp_path):
    with pytest.raises(FileNotFoundError):
        GraphAdapter.read_graph(str(tmp_path / "missing.txt"))


# CSV
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def test_csv_values_survive_exactly(tmp_path, rng):
    data = rng.standard_normal((5, 3)) * 1e3
    path = str(tmp_path / "client.csv")
    CsvAdapter.write(path, data, ["a", "b", "c"])
    loaded, columns = CsvAdapter.read(path)
    assert columns == ["a", "b", "c"]
    assert np.array_equal(loaded, data)


def test_csv_bad_cell_names_file_and_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(exceptions.InputError, match=r"bad\.csv: row 2, column 'y'"):
        CsvAdapter.read(str(path))


def test_csv_reports_every_bad_cell(tmp_path):
    path = tmp_path / "gaps.csv"
    path.write_text("x,y\n1.0,\nfoo,2.0\n4.0,inf\n")
    with pytest.raises(exceptions.InputError, match=r"gaps\.csv: row 1, column 'y': cannot parse '' .*\(3 bad cells in total\)"):
        CsvAdapter.read(str(path))


def test_csv_header_only_has_no_rows(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x,y\n")
    data, columns = CsvAdapter.read(str(path))
    assert data.shape == (0, 2)
    assert columns == ["x", "y"]


def test_load_directory_sorts_and_checks_headers(tmp_path, rng):
    CsvAdapter.write_directory(str(tmp_path), [rng.standard_normal((4, 2)) for _ in range(3)], ["x", "y"])
    clients = CsvAdapter.load_directory(str(tmp_path))
    assert [client_id for client_id, _, _ in clients] == ["client-001", "client-002", "client-003"]

    CsvAdapter.write(str(tmp_path / "client-004.csv"), rng.standard_normal((4, 2)), ["x", "z"])
    with pytest.raises(exceptions.InputError, match="header"):
        CsvAdapter.load_directory(str(tmp_path))


# Bundles
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def test_run_directory_name():
    path = BundleAdapter.run_directory("runs", 7, now=datetime(2024, 5, 1, 13, 4, 5))
    assert path == os.path.join("runs", "20240501-130405-seed7")


def test_bundle_writes_manifest_listing_outputs(tmp_path):
    bundle = BundleAdapter(str(tmp_path / "run"))
    bundle.write_json("report.json", {"b": 1, "a": [1, 2]})
    bundle.write_manifest("discover", {"ALPHA": 0.05}, 3, ["data"], {"total_s": 0.1})

    manifest = orjson.loads((tmp_path / "run" / "manifest.json").read_bytes())
    assert manifest["command"] == "discover"
    assert manifest["outputs"] == ["report.json"]
    assert manifest["seed"] == 3
    assert not [name for name in os.listdir(tmp_path / "run") if name.endswith(".tmp")]


def test_manifest_hashes_inputs_and_keeps_invocation(tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    (data / "client-001.csv").write_bytes(b"x\n1\n")
    bundle = BundleAdapter(str(tmp_path / "run"))
    bundle.write_manifest("serve", {}, 0, [str(data), "127.0.0.1:7845"], {}, {"mode": "single_round", "workers": 3})

    manifest = orjson.loads((tmp_path / "run" / "manifest.json").read_bytes())
    assert manifest["input_digests"] == {str(data / "client-001.csv"): hashlib.sha256(b"x\n1\n").hexdigest()}
    assert manifest["invocation"] == {"mode": "single_round", "workers": 3}
