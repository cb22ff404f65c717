"""Experiment runner: config file -> pipeline -> PCG -> CSV/JSON reports.

A config may sweep over mesh sizes, random seeds and both scalings; every
combination is one case and one CSV row.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib.resources import files
from pathlib import Path

import jsonschema
import numpy as np

from .adaptivity import adapt_all, edge_report_rows
from .bddc import BddcOperator, preconditioned_spectrum
from .coefficients import field_from_descriptor
from .discretization import discretize
from .geometry import build_conforming_partition, load_partition
from .krylov import pcg
from .schur import SchurSystem

ORACLE_MAX_DIM = 2000
LOG_NOTE = "natural log"
PRNG_NOTE = "numpy PCG64 seeded by SeedSequence([seed, subdomain_id]); element e takes draw e"
CSV_COLUMNS = ["name", "n", "beta", "seed", "scaling", "n_multipliers", "Iter", "lambda_min",
               "lambda_max", "kappa", "pnum", "ppnum", "Theta", "C", "converged"]
ORACLE_COLUMNS = ["oracle_lambda_min", "oracle_lambda_max", "oracle_kappa", "kappa_rel_diff", "bound"]
SCALINGS = {"m1": "multiplicity", "m2": "deluxe"}


class StageError(RuntimeError):
    """Failure in one pipeline stage; ``str()`` starts with ``[stage]``."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def theta_rule(n, beta):
    """``1 + min(ln n, ln(beta n))``."""
    if n < 2:
        raise ValueError(f"theta rule needs n >= 2, got {n}")
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 1.0 + min(math.log(n), math.log(beta * n))


def _schema():
    return json.loads((files(__package__) / "data" / "config.schema.json").read_text())


def data_path(name):
    """Path of a file shipped in the package data directory."""
    return Path(str(files(__package__) / "data" / name))


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass
class Case:
    n: int
    beta: float
    mesh_scale: int
    seed: int | None


@dataclass
class ExperimentConfig:
    partition: dict
    name: str = "experiment"
    degree: int = 2
    coefficient: dict = field(default_factory=lambda: {"type": "constant", "value": 1.0})
    eps: float = 1.0
    scaling: str = "both"
    theta: object = "auto"
    f: dict = field(default_factory=lambda: {"type": "constant", "value": 1.0})
    tol: float = 1e-10
    maxit: int | None = None
    seeds: list | None = None
    oracle: bool = False
    out: str | None = None
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d, base_dir="."):
        try:
            jsonschema.validate(d, _schema())
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise StageError("config", f"{path}: {exc.message}") from None
        pcg_opts = d.get("pcg", {})
        cfg = cls(
            partition=dict(d["partition"]), name=d.get("name", "experiment"),
            degree=d.get("degree", 2),
            coefficient=dict(d.get("coefficient", {"type": "constant", "value": 1.0})),
            eps=float(d.get("eps", 1.0)), scaling=d.get("scaling", "both"),
            theta=d.get("theta", "auto"),
            f=dict(d.get("f", {"type": "constant", "value": 1.0})),
            tol=float(pcg_opts.get("tol", 1e-10)), maxit=pcg_opts.get("maxit"),
            seeds=d.get("seeds"), oracle=bool(d.get("oracle", False)), out=d.get("out"),
            base_dir=str(base_dir),
        )
        cfg.check()
        return cfg

    def check(self):
        p = self.partition
        if p["type"] == "file" and not self.partition_file().exists():
            raise StageError("config", f"partition file {p['path']} not found")
        if p["type"] == "conforming":
            for n in _as_list(p["n"]):
                bn = p["beta"] * n
                if abs(bn - round(bn)) > 1e-9:
                    raise StageError("config", f"beta*n = {bn} is not an integer")
        if self.theta == "auto":
            for c in self.cases():
                if c.n < 2:
                    raise StageError("config", "theta rule needs n >= 2; give an explicit theta")
        elif self.theta < 1:
            raise StageError("config", "theta must be >= 1")
        return self

    def partition_file(self):
        path = Path(self.partition["path"])
        if not path.is_absolute():
            local = Path(self.base_dir) / path
            path = local if local.exists() else data_path(path.name)
        return path

    def cases(self):
        p = self.partition
        seeds = self.seeds if self.seeds else [self.coefficient.get("seed")]
        if p["type"] == "conforming":
            sizes = [(int(n), 1) for n in _as_list(p["n"])]
        else:
            raw = json.loads(self.partition_file().read_text())
            base_n = int(raw.get("base_n", 1)) if isinstance(raw, dict) else 1
            sizes = [(base_n * int(s), int(s)) for s in _as_list(p.get("mesh_scale", 1))]
        return [Case(n, float(p["beta"]), scale, seed) for n, scale in sizes for seed in seeds]

    def scalings(self):
        return ["m1", "m2"] if self.scaling == "both" else [self.scaling]

    def theta_for(self, case):
        return theta_rule(case.n, case.beta) if self.theta == "auto" else float(self.theta)


def load_config(path):
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise StageError("config", f"cannot read {path}: {exc}") from None
    return ExperimentConfig.from_dict(d, base_dir=path.parent)


def _load_function(desc):
    if desc["type"] == "constant":
        value = float(desc.get("value", 1.0))
        return None if value == 1.0 else (lambda x, y: np.full_like(x, value))
    return lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - relabel and propagate
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc


@dataclass
class Pipeline:
    case: Case
    disc: object
    system: object


def build_pipeline(config, case):
    """Partition, discretization and Schur system for one case."""

    def _partition():
        p = config.partition
        if p["type"] == "conforming":
            return build_conforming_partition(p["k"], case.n, case.beta)
        return load_partition(config.partition_file(), case.mesh_scale)

    part = _stage("partition", _partition)
    coef = dict(config.coefficient)
    if coef["type"] == "random" and case.seed is not None:
        coef["seed"] = case.seed
    rho = _stage("coefficients", field_from_descriptor, coef)
    disc = _stage("discretize", discretize, part, config.degree, rho, config.eps, _load_function(config.f))
    system = _stage("schur", SchurSystem, disc)
    return Pipeline(case, disc, system)


def solve_case(config, pipe, scaling, theta=None, force_primal=False):
    """Adaptivity, BDDC and PCG for one scaling. Returns (row, edges, report, operator)."""
    case = pipe.case
    theta = config.theta_for(case) if theta is None else theta
    adapt = _stage("adaptivity", adapt_all, pipe.system, SCALINGS[scaling], theta, force_primal)
    op = _stage("bddc", BddcOperator, pipe.system, adapt)
    _, rep = _stage("pcg", pcg, pipe.system.apply, op.apply, pipe.system.g, config.tol, config.maxit)
    rep.pnum, rep.ppnum = op.pnum, op.ppnum
    row = {
        "name": config.name, "n": case.n, "beta": case.beta, "seed": case.seed, "scaling": scaling.upper(),
        "n_multipliers": pipe.disc.n_multipliers, "Iter": rep.iterations,
        "lambda_min": rep.lam_min, "lambda_max": rep.lam_max, "kappa": rep.cond,
        "pnum": op.pnum, "ppnum": op.ppnum, "Theta": theta, "C": rep.cond / theta,
        "converged": rep.converged,
    }
    return row, edge_report_rows(adapt), rep, op


def oracle_row(pipe, op, row):
    """Dense spectrum of ``M^{-1} S`` and its comparison with the CG estimate."""
    n = pipe.disc.n_multipliers
    if n > ORACLE_MAX_DIM:
        raise StageError("oracle", f"dim {n} exceeds the oracle limit {ORACLE_MAX_DIM}")
    w = _stage("oracle", preconditioned_spectrum, op, pipe.system)
    kappa = float(w[-1] / w[0])
    return {
        "oracle_lambda_min": float(w[0]), "oracle_lambda_max": float(w[-1]), "oracle_kappa": kappa,
        "kappa_rel_diff": abs(row["kappa"] - kappa) / kappa,
        "bound": 2 * pipe.disc.C_F() ** 2 * row["Theta"],
    }, w


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    edges: list
    histories: list
    spectra: list = field(default_factory=list)

    def header(self):
        return {"log": LOG_NOTE, "f": self.config.f, "prng": PRNG_NOTE,
                "stopping": f"||z_k||/||z_0|| <= {self.config.tol:g} (preconditioned residual)"}

    def csv_text(self):
        cols = CSV_COLUMNS + (ORACLE_COLUMNS if any("oracle_kappa" in r for r in self.rows) else [])
        buf = io.StringIO()
        for k, v in self.header().items():
            buf.write(f"# {k}: {json.dumps(v) if isinstance(v, dict) else v}\n")
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()

    def edges_csv_text(self):
        buf = io.StringIO()
        cols = ["case", "k", "n_k", "n_delta", "n_primal", "lam_min", "lam_max", "n_deflated"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for c, edges in enumerate(self.edges):
            for e in edges:
                w.writerow({"case": c, **e})
        return buf.getvalue()

    def json_obj(self):
        cfg = asdict(self.config)
        cfg.pop("base_dir")
        runs = []
        for c, (r, e, h) in enumerate(zip(self.rows, self.edges, self.histories)):
            runs.append({"case": c, **r, "edges": e, "residual_history": h})
        return {"header": self.header(), "config": cfg, "runs": runs}

    def write(self, out_dir):
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.csv").write_text(self.csv_text())
            (out / "edges.csv").write_text(self.edges_csv_text())
            (out / "report.json").write_text(json.dumps(self.json_obj(), indent=1, default=_jsonable))
        except OSError as exc:
            raise StageError("report", f"cannot write to {out}: {exc}") from None
        return out


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(type(v))


def run_experiment(config, oracle=None, scaling=None, theta=None):
    """Every case x scaling of ``config``; optionally with dense-oracle columns."""
    oracle = config.oracle if oracle is None else oracle
    scalings = [scaling] if scaling else config.scalings()
    res = ExperimentResult(config, [], [], [])
    for case in config.cases():
        pipe = build_pipeline(config, case)
        for sc in scalings:
            row, edges, rep, op = solve_case(config, pipe, sc, theta)
            if oracle:
                extra, w = oracle_row(pipe, op, row)
                row.update(extra)
                res.spectra.append(w)
            res.rows.append(row)
            res.edges.append(edges)
            res.histories.append([float(x) for x in rep.history])
    return res


def run_oracle(config, scaling=None, theta=None):
    """Same cases as :func:`run_experiment`, always with the dense spectrum."""
    return run_experiment(config, oracle=True, scaling=scaling, theta=theta)
