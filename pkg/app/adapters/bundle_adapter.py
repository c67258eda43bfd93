import hashlib
import os
import subprocess
import tempfile
from datetime import datetime
from typing import Dict, List, Optional

import orjson

# Model Imports
from app.models import Benchmark, DiscoveryResult
from app.schemas import RunManifest, RunReport

# Adapters
from app.adapters.graph_adapter import GraphAdapter


FALLBACK_VERSION = "0.1.0"
JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def package_version() -> str:
    """
    git describe of the working tree, or the package version outside a checkout.
    """
    try:
        completed = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                                   timeout=5, cwd=os.path.dirname(os.path.abspath(__file__)))
    except (OSError, subprocess.SubprocessError):
        return FALLBACK_VERSION
    described = completed.stdout.strip()
    return described if completed.returncode == 0 and described else FALLBACK_VERSION


class BundleAdapter:
    """
    Writes result bundles, ground truth and manifests under one run directory. Every file is replaced atomically.
    """

    def __init__(self, directory: str):
        self.directory = directory
        self.written: List[str] = []
        os.makedirs(directory, exist_ok=True)

    @staticmethod
    def run_directory(root: str, seed: int, now: Optional[datetime] = None) -> str:
        stamp = (now or datetime.now()).strftime("%Y%m%d-%H%M%S")
        return os.path.join(root, f"{stamp}-seed{seed}")

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Writes

    def write_bytes(self, name: str, content: bytes) -> str:
        path = os.path.join(self.directory, name)
        handle, temporary = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(handle, "wb") as stream:
                stream.write(content)
            os.replace(temporary, path)
        except BaseException:
            if os.path.exists(temporary):
                os.remove(temporary)
            raise
        self.written.append(path)
        return path

    def write_json(self, name: str, payload) -> str:
        if hasattr(payload, "model_dump"):
            payload = payload.model_dump(mode="json")
        return self.write_bytes(name, orjson.dumps(payload, option=JSON_OPTIONS) + b"\n")

    def write_text(self, name: str, text: str) -> str:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_result(self, result: DiscoveryResult, report: RunReport) -> List[str]:
        """
        Graphs in both forms, the run report and the trace log.
        """
        paths = []
        for stem, graph in (("augmented", result.augmented), ("pattern", result.pattern), ("dag", result.dag)):
            paths.append(self.write_text(f"{stem}.txt", GraphAdapter.to_text(graph)))
            paths.append(self.write_bytes(f"{stem}.json", GraphAdapter.to_json(graph) + b"\n"))
        paths.append(self.write_json("report.json", report))
        paths.append(self.write_text("trace.log", "".join(line + "\n" for line in result.trace)))
        return paths

    def write_truth(self, benchmark: Benchmark) -> List[str]:
        return [
            self.write_bytes("truth_dag.json", GraphAdapter.to_json(benchmark.dag) + b"\n"),
            self.write_text("truth_dag.txt", GraphAdapter.to_text(benchmark.dag)),
            self.write_json("changing.json", {"changing_modules": benchmark.changing, "columns": benchmark.columns}),
        ]

    @staticmethod
    def input_digests(inputs: List[str]) -> Dict[str, str]:
        """
        sha256 of every input file. Directories contribute each regular file beneath them; non-paths such as a
        bind address are skipped.
        """
        files: List[str] = []
        for path in inputs:
            if os.path.isdir(path):
                for root, _, names in os.walk(path):
                    files.extend(os.path.join(root, name) for name in names)
            elif os.path.isfile(path):
                files.append(path)

        digests = {}
        for path in sorted(files):
            with open(path, "rb") as stream:
                digests[path] = hashlib.sha256(stream.read()).hexdigest()
        return digests

    def write_manifest(self, command: str, config: Dict, seed: int, inputs: List[str],
                       timings: Dict[str, float], invocation: Optional[Dict] = None) -> str:
        manifest = RunManifest(command=command, config=config, seed=seed, inputs=inputs,
                               input_digests=self.input_digests(inputs), invocation=invocation or {},
                               outputs=[os.path.basename(path) for path in self.written],
                               version=package_version(), timings=timings)
        return self.write_json("manifest.json", manifest)
