"""``hillspec`` command line: spectra, triangle tables, audits, Riesz
criteria, smoothness fits and sample ingestion.

Every report embeds the full run configuration and the SHA-256 of the
potential.  Output bytes depend only on the configuration.

Exit codes: 1 configuration, 2 counting failure, 3 I/O or parse error,
4 eigensolver failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import click
import numpy as np

from . import __version__
from .diagnostics import (
    bound_audit,
    decay_fit,
    identity_audit,
    kvk_far_field,
    lemma_audit,
    projection_verdict,
    riesz_criteria,
    sizes,
    triangle_sequence,
    weighted_membership,
)
from .opmatrix import ALL_BCS, BC, ConfigurationError, build_operator
from .potential import PotentialError, PotentialSpec, WeightSpec, fourier_tables
from .projections import projection_diff_audit, riesz_projection
from .reduction import ReductionError
from .spectra import EigenError, StructureError, choose_N, counting_law_holds, eigenvalues, localize

EXIT_CONFIG, EXIT_COUNTING, EXIT_IO, EXIT_EIGEN = 1, 2, 3, 4
FORMATS = ("json", "csv", "text")


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# --- configuration --------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    potential: str
    K: int
    n_range: tuple[int, int] = (3, 32)
    bc: tuple[str, ...] = tuple(b.value for b in ALL_BCS)
    M: int = 64
    tol_eigen: float = 1e-10
    tol_identity: float = 1e-7
    resolution: float = 100.0
    wall_factor: int = 2
    refine: bool = True
    lemma_p: tuple[float, ...] = (4 / 3, 2.0)
    projections: bool = True
    weight: dict = field(default_factory=lambda: {"kind": "sobolev", "a": 1.0})
    out: str = "out"
    format: str = "json"
    base_dir: str = field(default=".", compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.K, int) or isinstance(self.K, bool) or self.K < 8:
            raise ConfigurationError(f"K must be an integer >= 8, got {self.K!r}")
        lo, hi = self.n_range
        if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 1 or hi < lo:
            raise ConfigurationError(f"n_range must be [n_min, n_max] with 1 <= n_min <= n_max, got {list(self.n_range)}")
        if self.K < 4 * hi:
            raise ConfigurationError(f"K={self.K} is below 4 * n_max = {4 * hi}")
        for b in self.bc:
            try:
                BC(b)
            except ValueError:
                raise ConfigurationError(f"unknown boundary condition {b!r}; choose from {[x.value for x in ALL_BCS]}") from None
        if self.M < 32:
            raise ConfigurationError(f"M must be at least 32, got {self.M}")
        for name in ("tol_eigen", "tol_identity", "resolution"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.wall_factor < 1:
            raise ConfigurationError("wall_factor must be >= 1")
        if any(not 1 < p <= 2 for p in self.lemma_p):
            raise ConfigurationError("lemma_p values must lie in (1, 2]")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format!r}")
        try:
            WeightSpec.from_dict(self.weight)
        except PotentialError as exc:
            raise ConfigurationError(f"weight: {exc}") from None

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".") -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        known = {f.name for f in fields(cls)} - {"base_dir"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys {unknown}")
        for key in ("potential", "K"):
            if key not in data:
                raise ConfigurationError(f"config is missing {key!r}")
        kw = dict(data)
        for key in ("n_range", "bc", "lemma_p"):
            if key in kw:
                if not isinstance(kw[key], list):
                    raise ConfigurationError(f"{key} must be a list")
                kw[key] = tuple(kw[key])
        if len(kw.get("n_range", (0, 0))) != 2:
            raise ConfigurationError("n_range must have two entries")
        try:
            return cls(base_dir=base_dir, **kw)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise CommandError(EXIT_IO, f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise CommandError(EXIT_IO, f"{path}: invalid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from None
        return cls.from_dict(data, base_dir=str(path.parent))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        for key in ("n_range", "bc", "lemma_p"):
            d[key] = list(d[key])
        return d

    @property
    def ns(self) -> range:
        return range(self.n_range[0], self.n_range[1] + 1)

    @property
    def bcs(self) -> tuple[BC, ...]:
        return tuple(BC(b) for b in self.bc)

    @property
    def parity(self) -> str:
        per = [b for b in self.bcs if b.is_periodic]
        if len(per) == 1:
            return per[0].value
        return "both"

    def potential_path(self) -> Path:
        p = Path(self.potential)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def load_potential(self) -> PotentialSpec:
        path = self.potential_path()
        try:
            return PotentialSpec.load(path)
        except OSError as exc:
            raise CommandError(EXIT_IO, f"cannot read potential {path}: {exc.strerror}") from None
        except PotentialError as exc:
            msg = str(exc)
            raise CommandError(EXIT_IO, msg if msg.startswith(str(path)) else f"{path}: {msg}") from None


def threads() -> int:
    raw = os.environ.get("HILLSPEC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"HILLSPEC_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError(f"HILLSPEC_THREADS must be a positive integer, got {raw!r}")
    return n


# --- serialisation --------------------------------------------------------


def clean(obj):
    """JSON-safe copy: complex as ``[re, im]``, non-finite floats as null."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(float(obj.real)), clean(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, BC):
        return obj.value
    return obj


def envelope(command: str, cfg: RunConfig, spec: PotentialSpec, result: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": cfg.to_dict(),
        "potential": {"label": spec.label, "sha256": spec.content_hash(), "terms": spec.to_dict()["terms"]},
        "result": result,
    }


def dump_json(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def dump_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def text_table(header, rows) -> str:
    cells = [[str(h) for h in header]] + [[_fmt(x) for x in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (float, np.floating)):
        return f"{x:.6e}"
    return str(x)


def text_header(command: str, cfg: RunConfig, spec: PotentialSpec) -> str:
    return (
        f"# hillspec {__version__} {command}\n"
        f"# potential {spec.label or '(unlabelled)'} sha256 {spec.content_hash()}\n"
        f"# config {json.dumps(clean(cfg.to_dict()), sort_keys=True)}\n"
    )


def write(out_dir: Path, name: str, text: str) -> Path:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / name
        path.write_text(text)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write {out_dir / name}: {exc.strerror}") from None
    return path


# --- commands -------------------------------------------------------------


def run_spectrum(cfg: RunConfig) -> tuple[dict, bool]:
    """Spectra of all four boundary conditions localised with a common ``N``."""
    spec = cfg.load_potential()
    n_max = cfg.n_range[1]
    tables = fourier_tables(spec, 4 * cfg.wall_factor * cfg.K + 2)
    spectra = {}
    for bc in ALL_BCS:
        K = cfg.K if bc.is_periodic else cfg.wall_factor * cfg.K
        spectra[bc] = eigenvalues(build_operator(spec, bc, K, tables), cfg.tol_eigen).values
    try:
        N = choose_N(spectra, n_max)
        ok = True
    except StructureError:
        N, ok = 2, False
    result = {"N": N, "n_max": n_max, "counting_ok": ok, "bc": {}}
    for bc, vals in spectra.items():
        loc = localize(vals, bc, N)
        result["bc"][bc.value] = {
            "eigenvalues": vals,
            "in_rectangle": len(loc.in_rectangle),
            "expected_in_rectangle": bc.free_count_in_rectangle(N),
            "disk_counts": {str(n): len(loc.disk(n)) for n in range(N + 1, n_max + 1) if bc.contains(n)},
            "counting_failures": loc.counting_failures(n_max),
            "counting_ok": counting_law_holds(loc, n_max),
        }
    return envelope("spectrum", cfg, spec, result), ok


def _disk_label(lam: complex, bc: BC, N: int, n_max: int) -> str:
    from .spectra import disk_index, in_rectangle

    if in_rectangle(lam, N):
        return "R"
    n = disk_index(lam, bc, N)
    return str(n) if n is not None and n <= n_max else ""


def emit_spectrum(report: dict, cfg: RunConfig, out: Path, fmt: str) -> list[Path]:
    res = report["result"]
    if fmt == "json":
        return [write(out, "spectrum.json", dump_json(report))]
    spec = cfg.load_potential()
    paths = []
    if fmt == "csv":
        for bc in ALL_BCS:
            vals = res["bc"][bc.value]["eigenvalues"]
            rows = [(i, v.real, v.imag, _disk_label(complex(v), bc, res["N"], res["n_max"])) for i, v in enumerate(vals)]
            paths.append(write(out, f"spectrum_{bc.value}.csv", dump_csv(["index", "re", "im", "region"], rows)))
        return paths
    rows = [
        (b, d["in_rectangle"], d["expected_in_rectangle"], len(d["counting_failures"]), "yes" if d["counting_ok"] else "no")
        for b, d in res["bc"].items()
    ]
    body = text_header("spectrum", cfg, spec) + f"N = {res['N']}, window n <= {res['n_max']}\n"
    body += text_table(["bc", "in R_N", "expected", "bad disks", "counting ok"], rows)
    return [write(out, "spectrum.txt", body)]


def run_triangles(cfg: RunConfig, spec: PotentialSpec | None = None):
    spec = spec or cfg.load_potential()
    seq = triangle_sequence(
        spec,
        cfg.parity,
        cfg.ns,
        cfg.K,
        refine=cfg.refine,
        wall_factor=cfg.wall_factor,
        workers=threads(),
        resolution=cfg.resolution,
        tol_eigen=cfg.tol_eigen,
    )
    if not seq.counting_ok:
        raise CommandError(EXIT_COUNTING, f"counting law fails for every N <= {cfg.n_range[1] // 2}; raise K or lower n_max")
    return spec, seq


TRIANGLE_COLUMNS = [
    "n", "bc", "lambda_plus_re", "lambda_plus_im", "lambda_minus_re", "lambda_minus_im", "nu_re", "nu_im",
    "mu_re", "mu_im", "abs_gamma", "abs_delta_dir", "abs_delta_neu", "size", "resolved", "error",
]  # fmt: skip


def _triangle_rows(seq):
    for r in seq.records:
        if not r.ok:
            yield [r.n, r.bc.value] + [None] * 13 + [r.error]
            continue
        yield [
            r.n, r.bc.value, r.lambda_plus.real, r.lambda_plus.imag, r.lambda_minus.real, r.lambda_minus.imag,
            r.nu.real, r.nu.imag, r.mu.real, r.mu.imag, abs(r.gamma), abs(r.delta_dir), abs(r.delta_neu),
            r.value("size"), int(r.resolved("size", seq.resolution)), "",
        ]  # fmt: skip


def emit_triangles(cfg, spec, seq, out, fmt) -> list[Path]:
    if fmt == "json":
        result = {"N": seq.N, "K_refined": seq.K_refined, "records": [r.as_dict() for r in seq.records]}
        return [write(out, "triangles.json", dump_json(envelope("triangles", cfg, spec, result)))]
    rows = list(_triangle_rows(seq))
    if fmt == "csv":
        return [write(out, "triangles.csv", dump_csv(TRIANGLE_COLUMNS, rows))]
    short = [[row[0], row[1], row[10], row[11], row[12], row[13], row[14], row[15]] for row in rows]
    body = text_header("triangles", cfg, spec) + f"N = {seq.N}\n"
    body += text_table(["n", "bc", "|gamma|", "|delta_dir|", "|delta_neu|", "size", "resolved", "error"], short)
    return [write(out, "triangles.txt", body)]


def run_audit(cfg: RunConfig) -> tuple[PotentialSpec, dict]:
    spec, seq = run_triangles(cfg)
    bounds = bound_audit(seq)
    ident = identity_audit(seq, rel=cfg.tol_identity)
    lemmas = []
    for bc in cfg.bcs:
        for p in cfg.lemma_p:
            lemmas.append(lemma_audit(spec, bc, cfg.ns, p, K=cfg.K).as_dict())
    far = [kvk_far_field(spec, bc, range(2, cfg.n_range[1] + 1, 2), cfg.K) for bc in cfg.bcs]
    proj = {}
    if cfg.projections:
        for bc in cfg.bcs:
            if not bc.is_periodic:
                continue
            ns = [n for n in cfg.ns if n >= max(8, (seq.N or 0) + 1) and bc.contains(n)]
            if not ns:
                continue
            op = build_operator(spec, bc, cfg.K)
            rows = projection_diff_audit(spec, bc, ns, cfg.K, op=op)
            contour = riesz_projection(op, ns[0], cfg.M, route="contour").P_matrix
            spectral = riesz_projection(op, ns[0], route="spectral").P_matrix
            proj[bc.value] = {
                "rows": [asdict(r) | {"scaled": r.scaled} for r in rows],
                "trend": projection_verdict(rows),
                "quadrature_check": {"n": ns[0], "M": cfg.M, "frobenius_diff": float(np.linalg.norm(contour - spectral))},
            }
    flags = {
        "bounds": bounds.verdict == "pass",
        "identity": ident.verdict == "pass",
        "lemma_tp": all(x["tp_ok"] for x in lemmas),
        "lemma_columns": all(x["column_ok"] for x in lemmas),
        "lemma_kvk": all(x["kvk_ok"] for x in lemmas),
        "lemma_kvk_far": all(x["bounded"] for x in far),
        "projections": all(t["trend"][k]["bounded"] for t in proj.values() for k in t["trend"]),
    }
    result = {
        "N": seq.N,
        "flags": flags,
        "all_pass": all(flags.values()),
        "bounds": bounds.as_dict(),
        "identity": ident.as_dict(),
        "lemmas": lemmas,
        "kvk_far_field": far,
        "projections": proj,
        "records": [r.as_dict() for r in seq.records],
    }
    return spec, result


def emit_audit(cfg, spec, result, out, fmt) -> list[Path]:
    if fmt == "json":
        return [write(out, "audit.json", dump_json(envelope("audit", cfg, spec, result)))]
    ident = {r["n"]: r for r in result["identity"]["rows"]}
    rows = []
    for rec in result["records"]:
        n = rec["n"]
        if rec["error"] or n not in ident:
            continue
        checks = [c for c in result["bounds"]["checks"] if c["n"] == n]
        r = ident[n]
        rows.append(
            [n, rec["case"], *[next((c["ratio"] for c in checks if c["name"] == k), None) for k in ("neumann", "dirichlet", "xi")],
             r["pairing"], r["dere"], r["dere_bound"], int(r["dere_testable"])]
        )  # fmt: skip
    header = ["n", "case", "neumann_ratio", "dirichlet_ratio", "xi_ratio", "pairing", "dere", "dere_bound", "dere_testable"]
    if fmt == "csv":
        return [write(out, "audit.csv", dump_csv(header, rows))]
    body = text_header("audit", cfg, spec)
    body += f"N0 bounds = {result['bounds']['N0']}, N0 pairing = {result['identity']['N0']}\n"
    body += "flags: " + ", ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in result["flags"].items()) + "\n"
    body += text_table(header, rows)
    return [write(out, "audit.txt", body)]


def run_riesz(cfg: RunConfig):
    spec, seq = run_triangles(cfg)
    return spec, riesz_criteria(seq).as_dict()


def emit_riesz(cfg, spec, result, out, fmt) -> list[Path]:
    if fmt == "json":
        return [write(out, "riesz.json", dump_json(envelope("riesz", cfg, spec, result)))]
    rows = []
    for bc, d in result["per_parity"].items():
        for name, s in d.items():
            for n, r in zip(s["n"], s["ratios"]):
                rows.append([bc, name, n, r])
    if fmt == "csv":
        return [write(out, "riesz.csv", dump_csv(["bc", "criterion", "n", "ratio"], rows))]
    body = text_header("riesz", cfg, spec) + f"verdict: {result['summary']}\n"
    vrows = [[k, v] for k, v in result["verdicts"].items()]
    body += text_table(["criterion", "verdict"], vrows)
    return [write(out, "riesz.txt", body)]


def run_smoothness(cfg: RunConfig):
    spec, seq = run_triangles(cfg)
    ns, ts, ok = sizes(seq)
    fit = decay_fit(ns, ts, ok)
    weight = WeightSpec.from_dict(cfg.weight)
    member = weighted_membership(ns, ts, weight, resolved=ok)
    result = {
        "fit": fit.as_dict(),
        "membership": member.as_dict(),
        "n": ns,
        "size": ts,
        "resolved": ok,
    }
    return spec, result


def emit_smoothness(cfg, spec, result, out, fmt) -> list[Path]:
    if fmt == "json":
        return [write(out, "smoothness.json", dump_json(envelope("smoothness", cfg, spec, result)))]
    rows = [
        [int(n), float(t), math.log(t) if t > 0 else None, int(r)] for n, t, r in zip(result["n"], result["size"], result["resolved"])
    ]
    if fmt == "csv":
        return [write(out, "smoothness.csv", dump_csv(["n", "size", "log_size", "resolved"], rows))]
    fit = result["fit"]
    body = text_header("smoothness", cfg, spec)
    body += f"model: {fit['model']} exponent {fit['exponent']} r2 {fit['r_squared']}\n"
    body += f"weighted membership: {result['membership']['verdict']}\n"
    body += text_table(["n", "size", "log size", "resolved"], rows)
    return [write(out, "smoothness.txt", body)]


# --- ingestion ------------------------------------------------------------


@dataclass
class Ingested:
    spec: PotentialSpec
    roundtrip_error: float
    samples: int


def read_samples(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Grid and values from JSON ``{"x": [...], "v": [...]}`` (values real or
    ``[re, im]``) or from whitespace/comma columns ``x re [im]``."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot read samples {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            data = json.loads(text)
            x = np.asarray(data["x"], dtype=float)
            v = np.asarray(data["v"], dtype=float)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise CommandError(EXIT_IO, f"{path}: expected {{'x': [...], 'v': [...]}} ({exc})") from None
        v = v[:, 0] + 1j * v[:, 1] if v.ndim == 2 else v.astype(complex)
    else:
        try:
            cols = np.loadtxt(io.StringIO(text.replace(",", " ")), ndmin=2)
        except ValueError as exc:
            raise CommandError(EXIT_IO, f"{path}: {exc}") from None
        if cols.shape[1] not in (2, 3):
            raise CommandError(EXIT_IO, f"{path}: expected 2 or 3 columns, found {cols.shape[1]}")
        x = cols[:, 0]
        v = cols[:, 1] + (1j * cols[:, 2] if cols.shape[1] == 3 else 0)
    if x.shape != v.shape[:1] or x.ndim != 1:
        raise CommandError(EXIT_IO, f"{path}: grid and values differ in length")
    return x, np.asarray(v, dtype=complex)


def ingest(x: np.ndarray, v: np.ndarray, cutoff: int, label: str = "", threshold: float = 0.0) -> Ingested:
    """``c_k = (1/N) sum_j v(x_j) e^{-2ikx_j}`` for ``|k| <= cutoff`` on the
    uniform grid ``x_j = j pi / N``."""
    N = len(x)
    if cutoff < 0:
        raise ConfigurationError("cutoff must be non-negative")
    if N < max(4 * cutoff, 1):
        raise ConfigurationError(f"{N} samples cannot resolve cutoff {cutoff}; need at least {4 * cutoff}")
    grid = np.arange(N) * math.pi / N
    if not np.allclose(x, grid, rtol=0, atol=1e-9 * math.pi):
        raise ConfigurationError("samples must lie on the uniform grid x_j = j*pi/N, j = 0..N-1")
    fft = np.fft.fft(v) / N
    coeffs = {k: complex(fft[k % N]) for k in range(-cutoff, cutoff + 1)}
    coeffs = {k: c for k, c in coeffs.items() if abs(c) > threshold}
    spec = PotentialSpec.from_coefficients(coeffs, label=label)
    err = float(np.max(np.abs(spec(grid) - v))) if N else 0.0
    return Ingested(spec, err, N)


# --- click plumbing -------------------------------------------------------


def _fail(code: int, message: str):
    click.echo(f"hillspec: error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    try:
        return fn()
    except CommandError as exc:
        _fail(exc.code, str(exc))
    except ConfigurationError as exc:
        _fail(EXIT_CONFIG, f"configuration: {exc}")
    except StructureError as exc:
        _fail(EXIT_COUNTING, f"counting: {exc}")
    except (EigenError, ReductionError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_EIGEN, f"eigensolve: {exc}")
    except PotentialError as exc:
        _fail(EXIT_IO, str(exc))


def _setup(config, out, fmt) -> tuple[RunConfig, Path, str]:
    cfg = RunConfig.load(config)
    fmt = fmt or cfg.format
    out_dir = Path(out) if out else Path(cfg.base_dir) / cfg.out
    return cfg, out_dir, fmt


def _report(paths):
    for p in paths:
        click.echo(str(p))


config_option = click.option("--config", "config", required=True, type=click.Path(dir_okay=False), help="Run configuration JSON.")
out_option = click.option("--out", "out", default=None, type=click.Path(file_okay=False), help="Output directory.")
format_option = click.option("--format", "fmt", default=None, type=click.Choice(FORMATS), help="Report format.")


@click.group()
@click.version_option(__version__, prog_name="hillspec")
def main():
    """Spectral triangles and Riesz-basis diagnostics for Hill operators."""


@main.command()
@config_option
@out_option
@format_option
def spectrum(config, out, fmt):
    """Localised spectra of all four boundary conditions."""

    def go():
        cfg, out_dir, f = _setup(config, out, fmt)
        report, ok = run_spectrum(cfg)
        _report(emit_spectrum(report, cfg, out_dir, f))
        if not ok:
            raise CommandError(EXIT_COUNTING, f"counting law fails for every N <= {cfg.n_range[1] // 2}")

    _guard(go)


@main.command()
@config_option
@out_option
@format_option
def triangles(config, out, fmt):
    """Spectral triangle table over the configured n range."""

    def go():
        cfg, out_dir, f = _setup(config, out, fmt)
        spec, seq = run_triangles(cfg)
        _report(emit_triangles(cfg, spec, seq, out_dir, f))

    _guard(go)


@main.command()
@config_option
@out_option
@format_option
def audit(config, out, fmt):
    """Two-sided bounds, identities, lemma and projection audits."""

    def go():
        cfg, out_dir, f = _setup(config, out, fmt)
        spec, result = run_audit(cfg)
        _report(emit_audit(cfg, spec, result, out_dir, f))

    _guard(go)


@main.command()
@config_option
@out_option
@format_option
def riesz(config, out, fmt):
    """Finite-window verdicts of the three Riesz-basis criteria."""

    def go():
        cfg, out_dir, f = _setup(config, out, fmt)
        spec, result = run_riesz(cfg)
        _report(emit_riesz(cfg, spec, result, out_dir, f))

    _guard(go)


@main.command()
@config_option
@out_option
@format_option
def smoothness(config, out, fmt):
    """Decay model of triangle sizes and weighted-space membership."""

    def go():
        cfg, out_dir, f = _setup(config, out, fmt)
        spec, result = run_smoothness(cfg)
        _report(emit_smoothness(cfg, spec, result, out_dir, f))

    _guard(go)


@main.command(name="ingest")
@click.argument("samples", type=click.Path(dir_okay=False))
@click.option("--cutoff", required=True, type=int, help="Keep frequencies |k| <= cutoff.")
@click.option("--out", "out", default=None, type=click.Path(dir_okay=False), help="Potential JSON to write (default stdout).")
@click.option("--label", default="", help="Label stored in the potential file.")
@click.option("--threshold", default=0.0, type=float, show_default=True, help="Drop coefficients with modulus at most this.")
def ingest_cmd(samples, cutoff, out, label, threshold):
    """Fourier coefficients of samples of v on a uniform grid of [0, pi)."""

    def go():
        x, v = read_samples(Path(samples))
        res = ingest(x, v, cutoff, label=label, threshold=threshold)
        text = res.spec.to_json() + "\n"
        if out:
            try:
                Path(out).write_text(text)
            except OSError as exc:
                raise CommandError(EXIT_IO, f"cannot write {out}: {exc.strerror}") from None
        else:
            click.echo(text, nl=False)
        click.echo(f"round-trip max error {res.roundtrip_error:.3e} over {res.samples} samples", err=True)

    _guard(go)


if __name__ == "__main__":
    main()
