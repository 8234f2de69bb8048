"""
Experiment orchestration.

Each public method implements one command: it resolves parameters, runs the
numerical services, writes artifacts into a fresh run directory and
finishes with a run manifest.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from app.core.config import Config
from app.core.exceptions import SuiteFailure, ValidationError
from app.core.file_handler import FileHandler
from app.core.logging import StructuredLogger, generate_run_id
from app.core.metrics import RunMetrics
from app.models.analysis_models import ExitCurve, ModelKind, ScanReport
from app.models.channel_models import LlrModel, SideInfoChannel
from app.models.graph_models import SampledGraph, SingleCommunityParams, SymmetricSbmParams
from app.models.requests import RunConfig
from app.models.responses import (
    BpReport,
    CurveEntry,
    DeReport,
    ExitReport,
    RunManifest,
    ValidationReport,
)
from app.services import formats
from app.services.bp import (
    community_error,
    estimate_single_map,
    estimate_single_topk,
    estimate_symmetric,
    misclassification_rate,
    run_bp_single,
    run_bp_symmetric,
)
from app.services.channels import node_llrs
from app.services.devo import (
    de_iterate_single,
    de_iterate_symmetric,
    residual_error_symmetric,
    single_error_rates,
)
from app.services.exit_chart import (
    TransferMap,
    build_exit_curve,
    j_inverse,
    single_transfer_map,
    symmetric_transfer_map,
    threshold_scan,
)
from app.services.graphgen import coupling_proxy_ok, sample_single_community, sample_symmetric_sbm
from app.services.validation import ValidationSuite
from app.validators.run_validator import RunValidator

GRAPH_FILE = "graph.txt"
LABELS_FILE = "labels.csv"
SIDE_INFO_FILE = "side_info.csv"
CHANNEL_FILE = "channel.json"
MANIFEST_FILE = "manifest.json"


@dataclass
class _Run:
    command: str
    run_id: str
    run_dir: Path
    seed: int
    started: float
    metrics: RunMetrics
    files: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.run_dir / name


class ExperimentService:
    """Runs the generate, bp, de, exit, scan and validate commands"""

    def __init__(self, config: Config, logger: StructuredLogger):
        """Initialize the service.

        Args:
            config: Numerical settings and resource caps
            logger: Structured logger instance
        """
        self.config = config
        self.logger = logger

    def _threads(self, cfg: RunConfig) -> int:
        return cfg.threads or self.config.threads

    def _open(self, command: str, cfg: RunConfig) -> _Run:
        root = cfg.out if cfg.out is not None else self.config.output_root
        run_id = generate_run_id(command, cfg.seed)
        run_dir = FileHandler.create_run_dir(root, run_id)
        self.logger.set_context(run_id=run_id, command=command)
        self.logger.info("Run started", run_dir=str(run_dir), model=cfg.model.value)
        return _Run(command=command, run_id=run_id, run_dir=run_dir, seed=cfg.seed,
                    started=time.perf_counter(), metrics=RunMetrics())

    def _warn(self, run: _Run, message: str, **fields: Any) -> None:
        run.warnings.append(message)
        self.logger.warning(message, **fields)

    def _close(self, run: _Run, cfg: RunConfig, params: Dict[str, Any]) -> RunManifest:
        duration = time.perf_counter() - run.started
        manifest = RunManifest(
            run_id=run.run_id,
            run_dir=str(run.run_dir),
            command=run.command,
            seed=run.seed,
            params=params,
            run_config=cfg.model_dump(mode="json", by_alias=True),
            settings=self.config.model_dump(mode="json"),
            files=run.files + [MANIFEST_FILE],
            warnings=run.warnings,
            metrics=run.metrics.get_metrics(),
            duration_s=duration,
        )
        FileHandler.write_json(run.run_dir / MANIFEST_FILE, manifest.model_dump(mode="json"))
        self.logger.log_run(run.run_id, run.command, duration, files=len(manifest.files),
                            warnings=len(run.warnings))
        self.logger.clear_context()
        return manifest

    @staticmethod
    def _symmetric_summary(params: SymmetricSbmParams, cfg: RunConfig) -> Dict[str, Any]:
        return {"model": "symmetric", "n": params.n, "a": params.a, "b": params.b, "mu": params.mu,
                "beta": params.beta, "alpha": cfg.alpha, "epsilon": cfg.epsilon}

    @staticmethod
    def _single_summary(params: SingleCommunityParams, cfg: RunConfig) -> Dict[str, Any]:
        return {"model": "single", "n": params.n, "k": params.k, "p": params.p, "q": params.q,
                "lambda": params.lam, "threshold_nu": params.threshold_nu,
                "alpha": cfg.alpha, "epsilon": cfg.epsilon}

    def _resolve(self, cfg: RunConfig):
        channel = RunValidator.channel(cfg)
        if cfg.model == ModelKind.SYMMETRIC:
            params = RunValidator.symmetric_params(cfg)
            return params, channel, self._symmetric_summary(params, cfg)
        params = RunValidator.single_params(cfg)
        return params, channel, self._single_summary(params, cfg)

    @staticmethod
    def _sample(cfg: RunConfig, params, channel: SideInfoChannel) -> SampledGraph:
        if cfg.model == ModelKind.SYMMETRIC:
            return sample_symmetric_sbm(params, channel, cfg.seed)
        return sample_single_community(params, channel, cfg.seed)

    @staticmethod
    def _load(cfg: RunConfig, params) -> Tuple[SampledGraph, SideInfoChannel]:
        source = cfg.input_dir
        graph = formats.read_graph(source / GRAPH_FILE)
        labels = formats.read_labels(source / LABELS_FILE)
        symbols = formats.read_side_info(source / SIDE_INFO_FILE)
        channel = formats.read_channel(source / CHANNEL_FILE)
        if labels.size != graph.n or symbols.size != graph.n or graph.n != params.n:
            raise ValidationError(
                "input files disagree on the number of nodes",
                details={"graph": graph.n, "labels": int(labels.size), "side_info": int(symbols.size),
                         "n": params.n}
            )
        community = None
        if cfg.model == ModelKind.SINGLE:
            community = np.flatnonzero(labels == 1)
            if community.size != params.k:
                raise ValidationError(
                    "labels file holds a community of a different size",
                    details={"community_size": int(community.size), "k": params.k}
                )
        return SampledGraph(graph=graph, labels=labels, symbols=symbols, community=community), channel

    def _write_inputs(self, run: _Run, sample: SampledGraph, channel: SideInfoChannel) -> None:
        formats.write_graph(run.path(GRAPH_FILE), sample.graph)
        formats.write_labels(run.path(LABELS_FILE), sample.labels)
        formats.write_side_info(run.path(SIDE_INFO_FILE), sample.symbols)
        formats.write_channel(run.path(CHANNEL_FILE), channel)

    def generate(self, cfg: RunConfig) -> RunManifest:
        """Sample a graph, labels and side information and write them."""
        params, channel, summary = self._resolve(cfg)
        run = self._open("generate", cfg)
        with run.metrics.stage("sample"):
            sample = self._sample(cfg, params, channel)
        with run.metrics.stage("write"):
            self._write_inputs(run, sample, channel)
        summary.update(num_edges=sample.graph.num_edges, average_degree=sample.graph.average_degree())
        return self._close(run, cfg, summary)

    def bp(self, cfg: RunConfig) -> Tuple[RunManifest, BpReport]:
        """Run BP on a sampled or loaded graph and compare with the DE prediction."""
        params, channel, summary = self._resolve(cfg)
        t = cfg.iters
        if t < 1:
            raise ValidationError("BP needs at least one iteration", details={"t": t})
        run = self._open("bp", cfg)

        with run.metrics.stage("inputs"):
            if cfg.input_dir is not None:
                sample, channel = self._load(cfg, params)
            else:
                sample = self._sample(cfg, params, channel)
                self._write_inputs(run, sample, channel)
        graph = sample.graph
        coupling_ok = coupling_proxy_ok(graph.average_degree(), t, graph.n, self.config.coupling_margin)
        if not coupling_ok:
            self._warn(run, "graph neighborhoods are unlikely to be tree-like at this depth",
                       average_degree=graph.average_degree(), t=t, n=graph.n)

        report_fields: Dict[str, Any] = {}
        with run.metrics.stage("bp"):
            if cfg.model == ModelKind.SYMMETRIC:
                h = node_llrs(channel, sample.symbols, LlrModel.SYMMETRIC_HALF_LOG)
                state = run_bp_symmetric(graph, h, params.beta, t, self.config.belief_clamp, self.config.bp_max_iters)
                estimate = estimate_symmetric(state.beliefs)
                report_fields.update(
                    misclassification_rate=misclassification_rate(estimate, sample.labels),
                    misclassification_rate_flip_min=misclassification_rate(estimate, sample.labels, minimize_flip=True),
                )
                map_estimate = None
            else:
                h = node_llrs(channel, sample.symbols, LlrModel.SINGLE_FULL_LOG)
                state = run_bp_single(graph, h, params, t, self.config.belief_clamp, self.config.bp_max_iters)
                chosen = estimate_single_topk(state.beliefs, params.k)
                map_set = estimate_single_map(state.beliefs, params.threshold_nu)
                estimate = np.zeros(graph.n, dtype=np.int8)
                estimate[chosen] = 1
                map_estimate = np.zeros(graph.n, dtype=np.int8)
                map_estimate[map_set] = 1
                report_fields.update(
                    community_error=community_error(chosen, sample.community, params.k, params.n),
                    map_community_error=community_error(map_set, sample.community, params.k, params.n),
                    map_size=int(map_set.size),
                )
        run.metrics.increment("bp.clamp_count", state.clamp_count)
        if state.clamp_count:
            self._warn(run, "messages or beliefs were clamped", clamp_count=state.clamp_count)

        with run.metrics.stage("de"):
            if cfg.model == ModelKind.SYMMETRIC:
                trace = de_iterate_symmetric(params.mu, channel, t_max=t, tol=self._de_tol(cfg),
                                             n_nodes=self.config.quadrature_nodes)
                de_state = trace.state_at(t)
                report_fields.update(predicted_error=residual_error_symmetric(de_state, channel))
            else:
                trace = de_iterate_single(params.lam, params.threshold_nu, channel, t_max=t,
                                          tol=self._de_tol(cfg), n_nodes=self.config.quadrature_nodes)
                de_state = trace.state_at(t)
                type_i, type_ii = single_error_rates(de_state, params.threshold_nu, channel)
                report_fields.update(
                    predicted_error=float(np.exp(params.threshold_nu)) * type_i + type_ii,
                    predicted_type_i=type_i,
                    predicted_type_ii=type_ii,
                )

        report = BpReport(
            model=cfg.model,
            t=t,
            n=graph.n,
            num_edges=graph.num_edges,
            average_degree=graph.average_degree(),
            clamp_count=state.clamp_count,
            coupling_ok=coupling_ok,
            de_state=de_state,
            **report_fields,
        )
        with run.metrics.stage("write"):
            formats.write_beliefs(run.path("beliefs.csv"), state.beliefs)
            formats.write_estimates(run.path("estimates.csv"), estimate)
            if map_estimate is not None:
                formats.write_estimates(run.path("estimates_map.csv"), map_estimate)
            FileHandler.write_json(run.path("report.json"), report.model_dump(mode="json"))
        summary["t"] = t
        return self._close(run, cfg, summary), report

    def _de_tol(self, cfg: RunConfig) -> float:
        return cfg.tol if cfg.tol is not None else self.config.de_tol

    def de(self, cfg: RunConfig) -> Tuple[RunManifest, DeReport]:
        """Iterate density evolution to its fixed point and write the trace."""
        channel = RunValidator.channel(cfg)
        run = self._open("de", cfg)
        with run.metrics.stage("de"):
            if cfg.model == ModelKind.SYMMETRIC:
                mu = RunValidator.symmetric_mu(cfg)
                trace = de_iterate_symmetric(mu, channel, self.config.de_t_max, self._de_tol(cfg),
                                             self.config.quadrature_nodes)
                states, fixed_point, params = trace.nu_seq, trace.nu_bar, {"mu": mu}
            else:
                lam, k_frac = RunValidator.single_lambda(cfg)
                threshold_nu = float(np.log((1 - k_frac) / k_frac))
                trace = de_iterate_single(lam, threshold_nu, channel, self.config.de_t_max, self._de_tol(cfg),
                                          self.config.quadrature_nodes)
                states, fixed_point = trace.v_seq, trace.v_bar
                params = {"lambda": lam, "k_frac": k_frac, "threshold_nu": threshold_nu}
        run.metrics.increment("de.iterations", trace.iterations)
        if not trace.converged:
            self._warn(run, "density evolution did not converge", iterations=trace.iterations)

        report = DeReport(
            model=cfg.model,
            params=params,
            fixed_point=fixed_point,
            converged=trace.converged,
            iterations=trace.iterations,
            final_predicted_error=trace.predicted_errors[-1],
        )
        formats.write_de_trace(run.path("de_trace.csv"), states, trace.predicted_errors)
        FileHandler.write_json(run.path("report.json"), report.model_dump(mode="json"))
        return self._close(run, cfg, {**params, "alpha": cfg.alpha, "epsilon": cfg.epsilon}), report

    def _curve(self, cfg: RunConfig) -> Tuple[ExitCurve, TransferMap]:
        channel = RunValidator.channel(cfg)
        n_nodes = self.config.quadrature_nodes
        if cfg.model == ModelKind.SYMMETRIC:
            tmap = symmetric_transfer_map(RunValidator.symmetric_mu(cfg), channel,
                                          self.config.j_grid_size, n_nodes, fit=cfg.fit_j)
        else:
            lam, k_frac = RunValidator.single_lambda(cfg)
            tmap = single_transfer_map(lam, k_frac, channel, self.config.j_grid_size, n_nodes, fit=cfg.fit_j)
        curve = build_exit_curve(
            tmap,
            grid_size=cfg.grid or self.config.curve_grid_size,
            crossing_tol=self.config.crossing_tol,
            extra_params={"alpha": cfg.alpha, "epsilon": cfg.epsilon},
        )
        return curve, tmap

    @staticmethod
    def _curve_name(curve: ExitCurve) -> str:
        keys = ("mu",) if curve.model == ModelKind.SYMMETRIC else ("lambda", "k_frac")
        parts = [f"{k}={curve.params[k]:g}" for k in keys + ("alpha", "epsilon")
                 if curve.params.get(k) is not None]
        return FileHandler.sanitize_component("curve_" + "_".join(parts))

    def exit_curves(self, cfg: RunConfig) -> Tuple[RunManifest, ExitReport]:
        """Compute one EXIT curve per parameter combination."""
        combos = RunValidator.expand_vary(cfg)
        for combo in combos:
            RunValidator.channel(combo)
        run = self._open("exit", cfg)
        with run.metrics.stage("curves"):
            with ThreadPoolExecutor(max_workers=self._threads(cfg)) as pool:
                results = list(pool.map(self._curve, combos))
        run.metrics.increment("exit.curves", len(results))

        entries = []
        for curve, tmap in results:
            name = self._curve_name(curve)
            formats.write_curve(run.path(f"{name}.csv"), curve)
            run.files.append(f"{name}.json")
            op = curve.operating_point
            if curve.staircase is not None and not curve.staircase.converged:
                self._warn(run, "staircase stopped before settling", curve=name)
            if curve.staircase is not None:
                clamped = sum(j_inverse(tmap.table, i).clamped for i in curve.staircase.values)
                if clamped:
                    self._warn(run, "J inversions clamped to the table range", curve=name, clamped=clamped)
            fit = tmap.table.fit
            if fit is not None and fit.rank_deficient:
                self._warn(run, "J fit is rank deficient", curve=name, max_abs_residual=fit.max_abs_residual)
            entries.append(CurveEntry(
                params=curve.params,
                csv=f"{name}.csv",
                summary=f"{name}.json",
                operating_point=op.i if op else None,
                operating_point_stable=op.stable if op else None,
                crossings=len(curve.crossings),
                staircase_steps=curve.staircase.steps if curve.staircase else None,
                j_fit_max_residual=fit.max_abs_residual if fit else None,
                j_fit_rank_deficient=fit.rank_deficient if fit else None,
            ))
        report = ExitReport(model=cfg.model, curves=entries)
        FileHandler.write_json(run.path("report.json"), report.model_dump(mode="json"))
        return self._close(run, cfg, {"curves": len(entries), "vary": cfg.vary}), report

    def scan(self, cfg: RunConfig) -> Tuple[RunManifest, ScanReport]:
        """Bisect one parameter for the escape transition."""
        if cfg.scan_param is None or cfg.scan_range is None:
            raise ValidationError("scan needs --scan-param and --range")
        fixed = RunValidator.fixed_scan_values(cfg)
        run = self._open("scan", cfg)
        with run.metrics.stage("scan"):
            report = threshold_scan(
                cfg.model,
                cfg.scan_param,
                cfg.scan_range[0],
                cfg.scan_range[1],
                fixed,
                bisect_tol=cfg.bisect_tol,
                escape_fraction=self.config.escape_fraction,
                min_jump_fraction=self.config.min_jump_fraction,
                t_max=self.config.scan_t_max,
                de_tol=self._de_tol(cfg),
                n_nodes=self.config.quadrature_nodes,
            )
        run.metrics.increment("scan.evaluations", len(report.evaluations))
        if any(not point.de_converged for point in report.evaluations):
            self._warn(run, "density evolution hit the iteration cap during the scan")

        FileHandler.write_json(run.path("scan.json"), report.model_dump(mode="json"))
        formats.write_records(
            run.path("scan_points.csv"),
            ("value", "i_operating", "nu_operating", "escaped", "de_iterations"),
            [{**p.model_dump(), "escaped": float(p.escaped)} for p in report.evaluations],
        )
        params = {"scan_parameter": cfg.scan_param, "range": list(cfg.scan_range), **fixed,
                  "critical_value": report.critical_value}
        return self._close(run, cfg, params), report

    def validate(self, cfg: RunConfig) -> Tuple[RunManifest, ValidationReport]:
        """
        Run the validation suite.

        Raises:
            SuiteFailure: After the report is written, if any check failed
        """
        run = self._open("validate", cfg)
        suite = ValidationSuite(self.config, self.logger, threads=self._threads(cfg))
        with run.metrics.stage("suite"):
            report = suite.run(quick=cfg.quick, seed=cfg.seed, inject_fault=cfg.inject_fault)
        FileHandler.write_json(run.path("validation.json"), report.model_dump(mode="json"))
        manifest = self._close(run, cfg, {"quick": cfg.quick, "checks": len(report.checks),
                                          "failed": report.failed})
        if not report.passed:
            raise SuiteFailure(f"{len(report.failed)} validation checks failed", report.failed)
        return manifest, report
