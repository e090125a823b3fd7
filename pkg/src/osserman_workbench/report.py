"""Verification campaigns over (n, s) grids and deterministic reports."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import __version__
from .core import DEFAULT_TOL, TolerancePolicy, check_curvature_like
from .errors import InapplicableHypotheses, RecoveryFailure, StructuralError
from .gff import GffStructure, build_canonical_gff, random_hermitian_J
from .jacobi import (
    classify_eigenstructure,
    osserman_scan,
    recover_hermitian_J,
    reproduce_prop31,
    sample_phi_celestial,
    verify_charpoly_relations,
)
from .models import (
    ModelParams,
    build_theorem_curvature,
    check_characterization_lemma,
    check_degenerate_lemma,
    check_s_identities,
)

ALL_CHECKS = (
    "symmetries",
    "s_identities",
    "degenerate_lemma",
    "characterization",
    "charpoly",
    "osserman",
    "prop31",
    "recover_j",
    "classify",
)

JOBS_ENV = "WORKBENCH_JOBS"

PASS, FAIL, INAPPLICABLE = "pass", "fail", "inapplicable"


class ConfigError(StructuralError):
    """Malformed run configuration."""


@dataclass(frozen=True)
class RunConfig:
    grid: tuple[tuple[int, int], ...] = ((2, 2),)
    params: tuple[tuple[float, float], ...] = ((2.0, -1.0),)
    seeds: tuple[int, ...] = (0,)
    samples: int = 20
    tolerances: TolerancePolicy = DEFAULT_TOL
    checks: tuple[str, ...] = ALL_CHECKS

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("grid must not be empty")
        for n, s in self.grid:
            if n < 1 or s < 1:
                raise ConfigError(f"grid entries need n >= 1 and s >= 1, got ({n}, {s})")
        if not self.params:
            raise ConfigError("params must not be empty")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        if not self.checks:
            raise ConfigError("checks must not be empty")
        unknown = sorted(set(self.checks) - set(ALL_CHECKS))
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(unknown)}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("configuration must be a mapping")
        extra = sorted(set(data) - {"grid", "params", "seeds", "samples", "tolerances", "checks"})
        if extra:
            raise ConfigError(f"unknown configuration keys: {', '.join(extra)}")
        kwargs: dict[str, Any] = {}
        try:
            if "grid" in data:
                kwargs["grid"] = tuple((int(n), int(s)) for n, s in data["grid"])
            if "params" in data:
                kwargs["params"] = tuple((float(a), float(b)) for a, b in data["params"])
            if "seeds" in data:
                kwargs["seeds"] = tuple(int(v) for v in data["seeds"])
            if "samples" in data:
                kwargs["samples"] = int(data["samples"])
            if "tolerances" in data:
                tol = data["tolerances"] or {}
                kwargs["tolerances"] = TolerancePolicy(**{k: float(v) for k, v in tol.items()})
            if "checks" in data:
                checks = data["checks"]
                if isinstance(checks, str):
                    checks = [c for c in checks.split(",") if c]
                kwargs["checks"] = tuple(str(c) for c in checks)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc
        return cls(**kwargs)

    def as_dict(self) -> dict[str, Any]:
        t = self.tolerances
        return {
            "grid": [list(g) for g in self.grid],
            "params": [list(p) for p in self.params],
            "seeds": list(self.seeds),
            "samples": self.samples,
            "tolerances": {"abs_tol": t.abs_tol, "cluster_gap": t.cluster_gap, "fit_tol": t.fit_tol},
            "checks": list(self.checks),
        }


@dataclass
class CaseResult:
    status: str
    max_violation: float = 0.0
    spectra: list[dict] = field(default_factory=list)
    witnesses: dict[str, Any] = field(default_factory=dict)
    anomaly: str | None = None


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# --- individual checks ----------------------------------------------------
# Each takes (S, F, params, seed, config) and returns a CaseResult.


def _check_symmetries(S, F, p, seed, cfg):
    rep = check_curvature_like(F, cfg.tolerances)
    return CaseResult(_status(rep.passed), rep.max_violation, witnesses=rep.as_dict())


def _check_s_identities(S, F, p, seed, cfg):
    rep = check_s_identities(F, S, cfg.tolerances)
    return CaseResult(_status(rep.passed), rep.max_violation, witnesses=dict(rep.violations))


def _check_degenerate(S, F, p, seed, cfg):
    rep = check_degenerate_lemma(F, cfg.samples, seed, cfg.tolerances, structure=S)
    both = rep.constant_form and rep.degenerate_vanishes
    return CaseResult(
        _status(rep.equivalent),
        _equivalence_violation(both, rep.equivalent, rep.max_degenerate_value, rep.fit_residual),
        witnesses={
            "constant_form": rep.constant_form,
            "degenerate_vanishes": rep.degenerate_vanishes,
            "max_degenerate_value": rep.max_degenerate_value,
            "fitted_k": rep.fitted_k,
            "fit_residual": rep.fit_residual,
        },
    )


def _check_characterization(S, F, p, seed, cfg):
    try:
        rep = check_characterization_lemma(F, S, cfg.samples, seed, cfg.tolerances)
    except InapplicableHypotheses as exc:
        return CaseResult(INAPPLICABLE, witnesses={"reason": str(exc)})
    both = rep.a_holds and rep.b_holds
    return CaseResult(
        _status(rep.agree),
        _equivalence_violation(both, rep.agree, rep.max_a, rep.max_h),
        witnesses={"a_holds": rep.a_holds, "b_holds": rep.b_holds, "max_a": rep.max_a, "max_h": rep.max_h},
    )


def _check_charpoly(S, F, p, seed, cfg):
    worst = 0.0
    branch = ""
    for x in sample_phi_celestial(S, cfg.samples, seed):
        rep = verify_charpoly_relations(F, S, x, cfg.tolerances)
        worst = max(worst, rep.max_deviation)
        branch = rep.branch
    return CaseResult(_status(worst < cfg.tolerances.fit_tol), worst, witnesses={"branch": branch})


def _expected_blocks(S: GffStructure, p: ModelParams):
    u_exp = [(0.0, S.s - 2), (float(S.s - 1), 1)] if S.s >= 2 else []
    return [(p.c1, 1), (p.c2, 2 * S.n - 2)], u_exp


def _equivalence_violation(both_hold: bool, agree: bool, *values: float) -> float:
    # When both sides fail together the equivalence holds and nothing is violated.
    if agree and not both_hold:
        return 0.0
    return max(values)


def _check_osserman(S, F, p, seed, cfg):
    tol = cfg.tolerances
    verdict = osserman_scan(F, S, "phi_null", cfg.samples, seed, tol)
    if not verdict.is_osserman:
        return CaseResult(
            FAIL,
            verdict.max_deviation,
            spectra=[sp.as_dict() for sp in verdict.witness_spectra],
            witnesses={"pair": [list(w) for w in verdict.witness]},
        )
    v_exp, u_exp = _expected_blocks(S, p)
    V, U = verdict.block_spectra
    ok = V.matches(v_exp) and U.matches(u_exp)
    return CaseResult(
        _status(ok),
        max(verdict.max_deviation, verdict.block_deviation),
        spectra=[verdict.common_spectrum.as_dict(), V.as_dict(), U.as_dict()],
        witnesses={"samples_used": verdict.samples_used},
    )


def _check_prop31(S, F, p, seed, cfg):
    tol = cfg.tolerances
    if S.s < 2:
        return CaseResult(INAPPLICABLE, witnesses={"reason": "needs s >= 2"})
    rec = reproduce_prop31(F, S, tol, sample_phi_celestial(S, cfg.samples, seed))
    ok = (
        rec.max_null_norm < tol.abs_tol
        and rec.image_deviation < tol.fit_tol
        and rec.coupling < tol.abs_tol
        and rec.spectra_differ
    )
    return CaseResult(
        _status(ok),
        max(rec.max_null_norm, rec.image_deviation, rec.coupling),
        witnesses={
            "null_norms": {str(b): v for b, v in rec.null_norms.items()},
            "image_of_xi2": list(rec.images[0][:, 0]),
            "spectra_differ": rec.spectra_differ,
        },
    )


def _check_recover_j(S, F, p, seed, cfg):
    tol = cfg.tolerances
    if abs(p.c1 - p.c2) <= tol.cluster_gap:
        return CaseResult(INAPPLICABLE, witnesses={"reason": "c1 == c2"})
    try:
        J = recover_hermitian_J(F, S, p.c1, p.c2, tol)
    except RecoveryFailure as exc:
        return CaseResult(FAIL, math.inf, witnesses={"reason": str(exc)})
    rebuilt = build_theorem_curvature(S, ModelParams(p.c1, p.c2, J), tol)
    diff = float(np.max(np.abs(rebuilt.values - F.values)))
    sq, orth = J.violations()
    ok = diff < tol.fit_tol and sq < 1e-6 and orth < 1e-6
    return CaseResult(_status(ok), diff, witnesses={"j_squared": sq, "j_orthogonality": orth})


def _check_classify(S, F, p, seed, cfg):
    verdict = osserman_scan(F, S, "phi_null", cfg.samples, seed, cfg.tolerances)
    if not verdict.is_osserman:
        return CaseResult(INAPPLICABLE, witnesses={"reason": "not phi-null Osserman"})
    V = verdict.block_spectra[0]
    case = classify_eigenstructure(V, 2 * S.n)
    anomaly = None
    if case.anomaly:
        anomaly = f"eigenstructure 'other' on phi-null Osserman input (n={S.n}, s={S.s})"
    return CaseResult(
        _status(case.tag != "other"),
        0.0,
        spectra=[V.as_dict()],
        witnesses={"case": case.tag},
        anomaly=anomaly,
    )


CHECKS: dict[str, Callable[..., CaseResult]] = {
    "symmetries": _check_symmetries,
    "s_identities": _check_s_identities,
    "degenerate_lemma": _check_degenerate,
    "characterization": _check_characterization,
    "charpoly": _check_charpoly,
    "osserman": _check_osserman,
    "prop31": _check_prop31,
    "recover_j": _check_recover_j,
    "classify": _check_classify,
}


@dataclass
class Report:
    config: RunConfig
    records: list[dict]
    anomalies: list[str]
    version: str = __version__
    timings: dict[str, float] | None = None

    @property
    def failed(self) -> bool:
        return any(r["status"] == FAIL for r in self.records)

    @property
    def exit_code(self) -> int:
        if self.anomalies:
            return 3
        return 1 if self.failed else 0

    def as_dict(self) -> dict[str, Any]:
        out = {
            "tool": "osserman-workbench",
            "version": self.version,
            "config": self.config.as_dict(),
            "seeds": list(self.config.seeds),
            "records": self.records,
            "anomalies": self.anomalies,
            "summary": {
                "total": len(self.records),
                "failed": sum(r["status"] == FAIL for r in self.records),
                "inapplicable": sum(r["status"] == INAPPLICABLE for r in self.records),
            },
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return out


def _aggregate(name: str, n: int, s: int, cases: list[dict]) -> dict:
    statuses = [c["status"] for c in cases]
    if FAIL in statuses:
        status = FAIL
    elif PASS in statuses:
        status = PASS
    else:
        status = INAPPLICABLE
    applicable = [c["max_violation"] for c in cases if c["status"] != INAPPLICABLE]
    return {
        "name": name,
        "grid_point": [n, s],
        "status": status,
        "max_violation": max(applicable) if applicable else 0.0,
        "cases": cases,
    }


def _run_grid_point(config: RunConfig, n: int, s: int):
    S = build_canonical_gff(n, s)
    tol = config.tolerances
    results: dict[str, list[dict]] = {name: [] for name in config.checks}
    anomalies: list[str] = []
    timings: dict[str, float] = {}
    for c1, c2 in config.params:
        for seed in config.seeds:
            p = ModelParams(c1, c2, random_hermitian_J(n, seed))
            F = build_theorem_curvature(S, p, tol)
            for name in config.checks:
                start = time.perf_counter()
                res = CHECKS[name](S, F, p, seed, config)
                key = f"{name}/{n},{s}"
                timings[key] = timings.get(key, 0.0) + time.perf_counter() - start
                if res.anomaly:
                    anomalies.append(res.anomaly)
                results[name].append(
                    {
                        "c1": c1,
                        "c2": c2,
                        "seed": seed,
                        "status": res.status,
                        "max_violation": res.max_violation,
                        "spectra": res.spectra,
                        "witnesses": res.witnesses,
                    }
                )
    records = [_aggregate(name, n, s, cases) for name, cases in results.items()]
    return records, anomalies, timings


def jobs_from_env(default: int = 1) -> int:
    raw = os.environ.get(JOBS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"{JOBS_ENV} must be an integer, got {raw!r}") from exc


def run(config: RunConfig, jobs: int | None = None, timings: bool = False) -> Report:
    """Execute every requested check at every grid point.

    Grid points run independently (``jobs`` threads, default from
    ``WORKBENCH_JOBS``); records are sorted afterwards so the report does not
    depend on scheduling.
    """
    jobs = jobs_from_env() if jobs is None else max(1, jobs)
    points = list(dict.fromkeys(config.grid))
    if jobs == 1:
        outputs = [_run_grid_point(config, n, s) for n, s in points]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(lambda g: _run_grid_point(config, *g), points))
    order = {name: i for i, name in enumerate(ALL_CHECKS)}
    records = sorted(
        (r for recs, _, _ in outputs for r in recs),
        key=lambda r: (order[r["name"]], r["grid_point"]),
    )
    anomalies = sorted(a for _, anom, _ in outputs for a in anom)
    timing = None
    if timings:
        timing = {k: v for _, _, t in outputs for k, v in sorted(t.items())}
    return Report(config, records, anomalies, timings=timing)


# --- serialization ----------------------------------------------------------


def _canonical(obj: Any) -> Any:
    """JSON-ready copy with floats rounded to 12 significant digits."""
    if isinstance(obj, Mapping):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        x = float(f"{x:.12g}")
        return 0.0 if x == 0 else x
    return obj


def to_structured(report: Report | Mapping[str, Any]) -> str:
    data = report.as_dict() if isinstance(report, Report) else report
    return json.dumps(_canonical(data), sort_keys=True, indent=2) + "\n"


def _fmt(x: Any) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.3e}"


def to_text(report: Report | Mapping[str, Any]) -> str:
    data = _canonical(report.as_dict() if isinstance(report, Report) else report)
    lines = [f"osserman-workbench {data['version']}  seeds={data['seeds']}", ""]
    lines.append(f"{'check':<18}{'n':>3}{'s':>3}  {'status':<13}{'max_violation':>14}")
    lines.append("-" * 53)
    for r in data["records"]:
        n, s = r["grid_point"]
        status = r["status"].upper()
        lines.append(f"{r['name']:<18}{n:>3}{s:>3}  {status:<13}{_fmt(r['max_violation']):>14}")
    summary = data["summary"]
    lines.append("")
    lines.append(
        f"{summary['total']} records, {summary['failed']} failed, "
        f"{summary['inapplicable']} inapplicable"
    )
    for a in data["anomalies"]:
        lines.append(f"ANOMALY: {a}")
    return "\n".join(lines) + "\n"


def emit(report: Report | Mapping[str, Any], fmt: str, path) -> None:
    """Write ``report`` in 'structured' (JSON) or 'text' form; OSError propagates."""
    if fmt == "structured":
        text = to_structured(report)
    elif fmt == "text":
        text = to_text(report)
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
