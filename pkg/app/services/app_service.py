import asyncio
import logging
import os
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import orjson
import typer
from rich.console import Console

# Import models and schemas
from app.config import FedCDHConfig
from app.models import DiscoveryConfig, DiscoveryResult, EvalReport, GenConfig, GlobalSummary
from app.schemas import Mode, RunReport

# Import services
from app.services import datagen_service, federation_service, metrics_service
from app.services.bench_service import BenchService, plot_table
from app.services.discovery_service import DiscoveryService

# Adapters and Clients
from app.adapters import BundleAdapter, CsvAdapter, GraphAdapter
from app.clients import run_client

# Import Exceptions
from app import exceptions


T = TypeVar("T")

EXIT_CONFIGURATION = 2
EXIT_FAILURE = 1


def split_address(address: str) -> Tuple[str, int]:
    host, _, port = address.rpartition(":")
    if not host or not port.isdigit():
        raise exceptions.InvalidConfiguration(f"Address must look like host:port, got {address!r}.")
    return host, int(port)


def guarded(fn: Callable[[], T], console: Optional[Console] = None) -> T:
    """
    Run a command body, turning package exceptions into a red message and an exit code.
    """
    console = console or Console(stderr=True)
    try:
        return fn()
    except exceptions.InvalidConfiguration as e:
        console.print(f"[red]Configuration error:[/red] {str(e)}")
        raise typer.Exit(code=EXIT_CONFIGURATION)
    except exceptions.FedCDHException as e:
        console.print(f"[red]{type(e).__name__}:[/red] {str(e)}")
        raise typer.Exit(code=EXIT_FAILURE)
    except (FileNotFoundError, PermissionError, IsADirectoryError, NotADirectoryError) as e:
        console.print(f"[red]I/O error:[/red] {str(e)}")
        raise typer.Exit(code=EXIT_FAILURE)


class AppService:
    """
    Command-level facade over generation, federation, discovery, evaluation and benchmarks.
    """

    def __init__(self, settings: FedCDHConfig, console: Optional[Console] = None):
        self.settings = settings
        self.console = console or Console()

    def discovery_config(self, workers: int = 1) -> DiscoveryConfig:
        return DiscoveryConfig(alpha=self.settings.ALPHA, gamma=self.settings.GAMMA, max_cond_size=self.settings.MAX_COND,
                               tie_tol=self.settings.TIE_TOL, seed=self.settings.SEED, workers=workers)

    def report_config(self, single_round: bool) -> Dict:
        config = self.discovery_config().model_dump(mode="json", exclude={"workers"})
        config.update({"h": self.settings.H, "single_round": single_round,
                       "fixed_bandwidth": self.settings.FIXED_BANDWIDTH,
                       "one_hot_discrete": self.settings.ONE_HOT_DISCRETE})
        return config

    @staticmethod
    def invocation(single_round: bool, workers: int, **extra) -> Dict:
        mode = Mode.SINGLE_ROUND if single_round else Mode.TWO_ROUND
        return dict(extra, mode=mode.value, single_round=single_round, workers=workers)

    def output_bundle(self, out: Optional[str]) -> BundleAdapter:
        directory = out or BundleAdapter.run_directory(self.settings.OUTPUT_ROOT, self.settings.SEED)
        return BundleAdapter(directory)

    # ------------------------------------------------------------------------------------------------------------------------- #
    # gen

    def generate(self, cfg: GenConfig, out: Optional[str]) -> str:
        started = time.perf_counter()
        benchmark = datagen_service.generate(cfg)
        bundle = self.output_bundle(out)
        paths = CsvAdapter.write_directory(os.path.join(bundle.directory, "data"), benchmark.datasets, benchmark.columns)
        bundle.written.extend(paths)
        bundle.write_truth(benchmark)
        bundle.write_manifest("gen", cfg.model_dump(mode="json"), cfg.seed, [],
                              {"total_s": time.perf_counter() - started}, {"out": bundle.directory})
        logging.info(f"Wrote {len(paths)} client files to {bundle.directory}")
        return bundle.directory

    # ------------------------------------------------------------------------------------------------------------------------- #
    # discover

    def run_discovery(self, summary: GlobalSummary, server: federation_service.AggregationServer, columns: List[str],
                      single_round: bool, workers: int) -> Tuple[DiscoveryResult, RunReport, Dict[str, float]]:
        started = time.perf_counter()
        result = DiscoveryService(summary, self.discovery_config(workers)).run()
        report = RunReport(config=self.report_config(single_round), n=summary.n, K=server.K, d=summary.d, h=summary.h,
                           mode=Mode.SINGLE_ROUND if single_round else Mode.TWO_ROUND, columns=columns,
                           test_counts=result.test_counts, changing_modules=sorted(result.augmented.changing_modules),
                           conflicts=[list(pair) for pair in sorted(result.augmented.conflicts)],
                           upload_bytes=dict(sorted(server.upload_bytes.items())), forced_extension=result.dag.forced)
        return result, report, {"discovery_s": time.perf_counter() - started}

    def discover_local(self, data_dir: str, out: Optional[str], single_round: bool = False, workers: int = 1) -> str:
        started = time.perf_counter()
        clients = CsvAdapter.load_directory(data_dir)
        columns = clients[0][2]
        summary, server = federation_service.simulate([data for _, data, _ in clients], h=self.settings.H,
                                                      seed=self.settings.SEED, columns=columns,
                                                      single_round=single_round,
                                                      fixed_bandwidth=self.settings.FIXED_BANDWIDTH,
                                                      one_hot_discrete=self.settings.ONE_HOT_DISCRETE)
        federation_s = time.perf_counter() - started
        result, report, timings = self.run_discovery(summary, server, columns, single_round, workers)
        return self._write_bundle(out, "discover", [data_dir], result, report, dict(timings, federation_s=federation_s),
                                  self.invocation(single_round, workers, data=data_dir))

    def serve(self, out: Optional[str], single_round: bool = False, workers: int = 1,
              on_listening: Optional[Callable[[int], None]] = None) -> str:
        host, port = split_address(self.settings.BIND)
        server = federation_service.AggregationServer(self.settings.ROSTER, h=self.settings.H, seed=self.settings.SEED,
                                                      mode=Mode.SINGLE_ROUND if single_round else Mode.TWO_ROUND,
                                                      fixed_bandwidth=self.settings.FIXED_BANDWIDTH,
                                                      one_hot_discrete=self.settings.ONE_HOT_DISCRETE)
        started = time.perf_counter()
        summary = asyncio.run(federation_service.serve(host, port, server, roster_timeout=self.settings.ROSTER_TIMEOUT,
                                                       io_timeout=self.settings.IO_TIMEOUT, on_listening=on_listening))
        federation_s = time.perf_counter() - started
        result, report, timings = self.run_discovery(summary, server, server.columns, single_round, workers)
        return self._write_bundle(out, "serve", [self.settings.BIND], result, report, dict(timings, federation_s=federation_s),
                                  self.invocation(single_round, workers, address=self.settings.BIND,
                                                  roster=list(self.settings.ROSTER)))

    def join(self, address: str, data_file: str, client_id: Optional[str] = None) -> str:
        host, port = split_address(address)
        data, columns = CsvAdapter.read(data_file)
        client_id = client_id or os.path.splitext(os.path.basename(data_file))[0]
        ack = asyncio.run(run_client(host, port, client_id, data, columns, io_timeout=self.settings.IO_TIMEOUT,
                                     spec_timeout=self.settings.ROSTER_TIMEOUT))
        return ack.message

    def _write_bundle(self, out: Optional[str], command: str, inputs: List[str], result: DiscoveryResult,
                      report: RunReport, timings: Dict[str, float], invocation: Dict) -> str:
        bundle = self.output_bundle(out)
        bundle.write_result(result, report)
        bundle.write_manifest(command, self.settings.model_dump(mode="json"), self.settings.SEED, inputs, timings,
                              dict(invocation, out=bundle.directory))
        self.console.print(f"Pattern: {len(result.pattern.directed_edges())} directed, "
                           f"{len(result.pattern.undirected_edges())} undirected edges; "
                           f"changing modules {sorted(result.augmented.changing_modules)}")
        return bundle.directory

    # ------------------------------------------------------------------------------------------------------------------------- #
    # eval

    def evaluate(self, pred: Sequence[str], truth: Sequence[str], out: Optional[str], reversal_cost: int = 1) -> List[EvalReport]:
        """
        Pairwise evaluation; several pairs are also summarized as mean and standard deviation.
        """
        if len(pred) != len(truth) or not pred:
            raise exceptions.InvalidConfiguration("Give one --truth per --pred.")

        reports = [metrics_service.evaluate(GraphAdapter.read_graph(p), GraphAdapter.read_dag(t), reversal_cost)
                   for p, t in zip(pred, truth)]
        rows = [dict(report.flat(), pred=p) for report, p in zip(reports, pred)]
        output: Dict = {"reports": [report.model_dump() for report in reports]}
        text = metrics_service.render_table(metrics_service.report_rows(reports[0]), title="Evaluation") if len(reports) == 1 \
            else metrics_service.render_table(rows, title="Evaluation")
        if len(reports) > 1:
            summary = metrics_service.summarize(reports)
            output["summary"] = {metric: {"mean": mean, "std": std} for metric, (mean, std) in summary.items()}
            text += metrics_service.render_table(metrics_service.summary_rows(summary), title="Mean ± std")

        self.console.print(text, markup=False, highlight=False)
        if out:
            bundle = BundleAdapter(out)
            bundle.write_bytes("eval.json", metrics_service.render_json(output) + b"\n")
            bundle.write_text("eval.txt", text)
        return reports

    # ------------------------------------------------------------------------------------------------------------------------- #
    # bench

    def bench(self, suite: str, out: Optional[str], replications: int, workers: int, vary: Optional[str],
              values: Optional[List[int]], plot: bool, base: GenConfig) -> str:
        started = time.perf_counter()
        service = BenchService(self.discovery_config(), h=self.settings.H, replications=replications, workers=workers,
                               base=base)
        table, p_values = service.run(suite, vary, values)

        bundle = self.output_bundle(out)
        stem = f"bench_{suite.replace('-', '_')}"
        bundle.write_text(f"{stem}.csv", table.to_csv(index=False))
        if p_values:
            bundle.write_json(f"{stem}_wilcoxon.json", p_values)
        if plot:
            path = os.path.join(bundle.directory, f"{stem}.png")
            plot_table(table, path)
            bundle.written.append(path)

        self.console.print(metrics_service.render_table(_display_rows(table), title=f"Suite {suite}"),
                           markup=False, highlight=False)
        if p_values:
            self.console.print(orjson.dumps(p_values, option=orjson.OPT_INDENT_2).decode(), markup=False)
        bundle.write_manifest("bench", dict(base.model_dump(mode="json"), suite=suite, replications=replications,
                                            vary=vary, values=values, h=self.settings.H),
                              base.seed, [], {"total_s": time.perf_counter() - started},
                              {"workers": workers, "plot": plot, "out": bundle.directory})
        return bundle.directory


def _display_rows(table) -> List[Dict]:
    rows = []
    for record in table.to_dict(orient="records"):
        row = {key: record[key] for key in ("vary", "value")}
        for key, value in record.items():
            if key.endswith("_mean"):
                metric = key[:-len("_mean")]
                row[metric] = f"{value:.3f} ± {record[metric + '_std']:.3f}"
            elif key in ("power", "type_i", "power_central", "type_i_central", "runtime_s"):
                row[key] = value
        rows.append(row)
    return rows
