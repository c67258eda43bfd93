import glob
import os
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

# Import Exceptions
from app import exceptions


FLOAT_FORMAT = "%.17g"


class CsvAdapter:
    """
    One CSV per client: a header row of variable names and one row per sample.
    """

    @staticmethod
    def write(path: str, data: np.ndarray, columns: Sequence[str]) -> None:
        frame = pd.DataFrame(np.asarray(data, dtype=float), columns=list(columns))
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)

    @staticmethod
    def read(path: str) -> Tuple[np.ndarray, List[str]]:
        if not os.path.exists(path):
            raise FileNotFoundError(f"Client file not found: {path}")
        try:
            frame = pd.read_csv(path, keep_default_na=False, float_precision="round_trip")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise exceptions.InputError(f"{path}: {str(e)}")

        columns = [str(column) for column in frame.columns]
        if not columns:
            raise exceptions.InputError(f"{path}: missing header row.")
        if frame.empty:
            return np.empty((0, len(columns))), columns

        numeric = frame.apply(pd.to_numeric, errors="coerce").astype(float)
        values = numeric.to_numpy()
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            row, j = (int(index) for index in bad[0])
            raise exceptions.InputError(
                f"{path}: row {row + 1}, column {columns[j]!r}: cannot parse {frame.iat[row, j]!r} as a finite number "
                f"({len(bad)} bad cells in total).")
        return values, columns

    @classmethod
    def load_directory(cls, directory: str) -> List[Tuple[str, np.ndarray, List[str]]]:
        """
        (client_id, data, columns) for every CSV in the directory, sorted by file name.
        All files must share one header.
        """
        if not os.path.isdir(directory):
            raise FileNotFoundError(f"Data directory not found: {directory}")
        paths = sorted(glob.glob(os.path.join(directory, "*.csv")))
        if not paths:
            raise exceptions.InputError(f"No client CSV files in {directory}.")

        clients = []
        for path in paths:
            data, columns = cls.read(path)
            if data.shape[0] == 0:
                raise exceptions.InputError(f"{path}: no samples.")
            if clients and columns != clients[0][2]:
                raise exceptions.InputError(f"{path}: header {columns} differs from {clients[0][2]}.")
            clients.append((os.path.splitext(os.path.basename(path))[0], data, columns))
        return clients

    @classmethod
    def write_directory(cls, directory: str, datasets: Sequence[np.ndarray], columns: Sequence[str]) -> List[str]:
        os.makedirs(directory, exist_ok=True)
        paths = []
        for k, data in enumerate(datasets, start=1):
            path = os.path.join(directory, f"client-{k:03d}.csv")
            cls.write(path, data, columns)
            paths.append(path)
        return paths

