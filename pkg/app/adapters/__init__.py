from app.adapters.bundle_adapter import BundleAdapter
from app.adapters.csv_adapter import CsvAdapter
from app.adapters.graph_adapter import GraphAdapter
from app.adapters.tensor_adapter import TensorAdapter

__all__ = [
    "BundleAdapter",
    "CsvAdapter",
    "GraphAdapter",
    "TensorAdapter",
]
