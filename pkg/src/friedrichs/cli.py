"""Command line interface: ``friedrichs <command> --config <path> [options]``.

Records go to stdout, or to files in ``--out``: JSON lines for structured
records and CSV for sweeps. Floats are written in their shortest round-trip
form and every record carries a hash of the configuration file.

Exit codes: 0 ok, 2 parse error, 3 model validation failure, 4 numerical
failure, 5 identity violation.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from friedrichs.errors import FriedrichsError, IdentityViolation, ParseError, ValidationFailure
from friedrichs.model import ModelSpec, RationalMatrixFunction, RationalTerm, validate_model

LOGGER = logging.getLogger("friedrichs")

COMMANDS = ("validate", "resonances", "trajectory", "smatrix", "gamov", "laurent", "verify",
            "project")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_IDENTITY = 5


@dataclass
class RunConfig:
    """A parsed configuration: the model plus optional run parameters."""

    spec: ModelSpec
    config_hash: str
    search: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    project: dict = field(default_factory=dict)


# ------------------------------------------------------------------ parsing


def _line_of(text: str, key: str):
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _complex(value, where: str, text: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ParseError(f"{where}: expected a [re, im] pair, got {value!r}", field=where,
                         line=_line_of(text, where.split(".")[-1].split("[")[0]))
    return complex(float(value[0]), float(value[1]))


def _real_list(value, where: str, text: str):
    if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ParseError(f"{where}: expected an array of reals", field=where, line=_line_of(text, where))
    return [float(v) for v in value]


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse a configuration document (see :func:`parse_config`)."""
    config_hash = hashlib.sha256(text.encode()).hexdigest()[:16]
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    for key in ("n", "a", "M"):
        if key not in doc:
            raise ParseError(f"{source}: missing field '{key}'", field=key)
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("n must be a positive integer", field="n", line=_line_of(text, "n"))
    a = _real_list(doc["a"], "a", text)
    if len(a) != n:
        raise ParseError(f"a has {len(a)} entries, expected n={n}", field="a", line=_line_of(text, "a"))
    if "epsilon" in doc:
        eps = doc["epsilon"]
        if not isinstance(eps, (int, float)) or isinstance(eps, bool):
            raise ParseError("epsilon must be a real number", field="epsilon",
                             line=_line_of(text, "epsilon"))
        eps = float(eps)
    else:
        LOGGER.warning("%s: no epsilon given, using 1.0", source)
        eps = 1.0
    M = doc["M"]
    if not isinstance(M, dict) or not isinstance(M.get("terms"), list):
        raise ParseError("M.terms must be an array", field="M.terms", line=_line_of(text, "terms"))
    terms = []
    for i, term in enumerate(M["terms"]):
        where = f"M.terms[{i}]"
        if not isinstance(term, dict):
            raise ParseError(f"{where} must be an object", field=where)
        for key in ("pole", "order", "coeff"):
            if key not in term:
                raise ParseError(f"{where}: missing '{key}'", field=f"{where}.{key}")
        pole = _complex(term["pole"], f"{where}.pole", text)
        order = term["order"]
        if not isinstance(order, int) or isinstance(order, bool) or order < 1:
            raise ParseError(f"{where}.order must be a positive integer", field=f"{where}.order",
                             line=_line_of(text, "order"))
        coeff = term["coeff"]
        if not isinstance(coeff, list) or len(coeff) != n * n:
            raise ParseError(f"{where}.coeff must hold n*n = {n * n} [re, im] pairs",
                             field=f"{where}.coeff", line=_line_of(text, "coeff"))
        entries = [_complex(c, f"{where}.coeff", text) for c in coeff]
        terms.append(RationalTerm(pole, order, np.array(entries).reshape(n, n)))
    spec = ModelSpec(tuple(a), RationalMatrixFunction(n, n, terms), eps)
    blocks = {}
    for key in ("search", "grid", "tolerances", "project"):
        block = doc.get(key, {})
        if not isinstance(block, dict):
            raise ParseError(f"{key} must be an object", field=key, line=_line_of(text, key))
        blocks[key] = block
    return RunConfig(spec, config_hash, **blocks)


def parse_config(path) -> RunConfig:
    """Read a model file, build the model and validate it.

    The file is a JSON document with fields ``n``, ``a``, ``epsilon`` and
    ``M.terms``, each term ``{"pole": [re, im], "order": k, "coeff": [[re,
    im], ...]}`` with the coefficient matrix in row-major order. Optional
    blocks ``search``, ``grid``, ``tolerances`` and ``project`` hold run
    parameters.

    Raises
    ------
    ParseError
        For unreadable or malformed files.
    ValidationFailure
        If a hard model assumption fails.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    cfg = parse_config_text(text, str(path))
    report = validate_model(cfg.spec)
    if not report.ok:
        raise ValidationFailure(
            "model assumptions violated: " + "; ".join(f"{i.name} ({i.detail})" for i in report.failures()),
            report=report)
    return cfg


# ------------------------------------------------------------------ output


def _clean(obj):
    """Make records JSON-serializable; complex numbers become [re, im]."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Output:
    """Writes JSON-lines and CSV either to files in a directory or to stdout."""

    def __init__(self, out_dir, config_hash: str, stream=None):
        self.dir = Path(out_dir) if out_dir else None
        self.hash = config_hash
        self.stream = stream or sys.stdout
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def _sink(self, name):
        if self.dir:
            return open(self.dir / name, "w", newline="")
        return _Borrowed(self.stream)

    def jsonl(self, name: str, records):
        with self._sink(name) as fh:
            for rec in records:
                fh.write(json.dumps(_clean({"config_hash": self.hash, **rec}), allow_nan=True) + "\n")

    def csv(self, name: str, header, rows):
        with self._sink(name) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["config_hash", *header])
            for row in rows:
                writer.writerow([self.hash, *[_fmt(v) for v in row]])


class _Borrowed(io.TextIOBase):
    def __init__(self, stream):
        self.stream = stream

    def write(self, s):
        return self.stream.write(s)

    def close(self):
        self.stream.flush()


# ------------------------------------------------------------------ commands


def _parse_region(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"--region needs four numbers: {text!r}") from exc
    if len(vals) != 4:
        raise ParseError(f"--region needs four numbers: {text!r}")
    return vals


def _parse_lambda(text):
    parts = text.split(":")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"--lambda needs start:stop:count, got {text!r}") from exc
    if len(parts) != 3 or count < 1 or start <= 0 or stop < start:
        raise ParseError(f"--lambda needs 0 < start <= stop and count >= 1, got {text!r}")
    return np.linspace(start, stop, count)


def _parse_eps_grid(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"--eps-grid needs comma-separated reals: {text!r}") from exc


def _region(args, cfg):
    from friedrichs.resonances import SearchRegion, default_search_box
    search = cfg.search
    if args.region:
        box = _parse_region(args.region)
    elif "region" in search:
        box = [float(v) for v in search["region"]]
    else:
        b = default_search_box(cfg.spec, float(search.get("delta", 1e-6)))
        box = b.as_list()
    kwargs = {}
    if "max_depth" in search:
        kwargs["max_depth"] = int(search["max_depth"])
    if args.tol is not None:
        kwargs["newton_tol"] = args.tol
    elif "newton_tol" in search:
        kwargs["newton_tol"] = float(search["newton_tol"])
    if "boundary_samples_per_edge" in search:
        kwargs["boundary_samples_per_edge"] = int(search["boundary_samples_per_edge"])
    try:
        return SearchRegion(*box, **kwargs)
    except ValueError as exc:
        raise ParseError(str(exc), field="region") from exc


def _find(args, cfg):
    from friedrichs.resonances import find_resonances, global_search
    if args.region or "region" in cfg.search:
        return find_resonances(cfg.spec, _region(args, cfg))
    return global_search(cfg.spec, float(cfg.search.get("delta", 1e-6)))


def cmd_validate(args, cfg, out):
    out.jsonl("validate.jsonl", validate_model(cfg.spec).as_records())
    return EXIT_OK


def cmd_resonances(args, cfg, out):
    res = _find(args, cfg)
    out.jsonl("resonances.jsonl", [r.record() for r in res])
    return EXIT_OK


def cmd_trajectory(args, cfg, out):
    from friedrichs.resonances import trace_trajectory
    if args.eps_grid:
        grid = _parse_eps_grid(args.eps_grid)
    else:
        grid = [float(v) for v in cfg.grid.get("eps_grid", [cfg.spec.epsilon])]
    points = trace_trajectory(cfg.spec, grid, _region(args, cfg))
    rows = []
    for p in points:
        for i, r in enumerate(p.resonances):
            rows.append([p.epsilon, i, r.zeta.real, r.zeta.imag])
    out.csv("trajectory.csv", ["epsilon", "index", "re", "im"], rows)
    return EXIT_OK


def cmd_smatrix(args, cfg, out):
    from friedrichs.scattering import S_K, unitarity_defect
    spec = cfg.spec
    if args.__dict__.get("lam"):
        lam = _parse_lambda(args.lam)
    else:
        lam = _parse_lambda(cfg.grid.get("lambda", "0.05:50:200"))
    S = S_K(spec, lam)
    defect = unitarity_defect(spec, lam)
    n = spec.n
    header = ["lambda"]
    for i in range(n):
        for j in range(n):
            header += [f"S{i}{j}_re", f"S{i}{j}_im"]
    header.append("unitarity_defect")
    rows = []
    for m, x in enumerate(lam):
        row = [float(x)]
        for i in range(n):
            for j in range(n):
                row += [float(S[m, i, j].real), float(S[m, i, j].imag)]
        rows.append(row + [float(defect[m])])
    out.csv("smatrix.csv", header, rows)
    tol = args.tol if args.tol is not None else float(cfg.tolerances.get("unitarity", 1e-9))
    worst = float(np.max(defect))
    if worst > tol:
        raise IdentityViolation(f"unitarity defect {worst:.3e} exceeds {tol:.1e}")
    return EXIT_OK


def cmd_gamov(args, cfg, out):
    from friedrichs.hardy import gamov, gamov_grid_function, semigroup_apply
    spec = cfg.spec
    res = _find(args, cfg)
    times = [float(t) for t in cfg.grid.get("times", [0.5, 1.0, 2.0, 5.0])]
    records, rows = [], []
    for idx, r in enumerate(res):
        for col in range(r.geometric_multiplicity):
            g = gamov(spec, r, col)
            records.append({"index": idx, "column": col, **g.record()})
            f = gamov_grid_function(g)
            pos = f.positive
            norm2 = f.norm() ** 2
            for t in times:
                Tf = semigroup_apply(f, t)
                pairing = np.sum(f.weights[pos, None] * Tf.values[pos] * np.conj(f.values[pos]))
                rows.append([idx, col, t, float(abs(pairing) / norm2), float(np.exp(g.zeta.imag * t))])
    out.jsonl("gamov.jsonl", records)
    out.csv("gamov_decay.csv", ["index", "column", "t", "pairing_ratio", "exp_im_zeta_t"], rows)
    return EXIT_OK


def cmd_laurent(args, cfg, out):
    from friedrichs.contour import circle
    from friedrichs.scattering import collect_residues, laurent_split
    spec = cfg.spec
    res = _find(args, cfg)
    residues = collect_residues(spec, res)
    out.jsonl("laurent.jsonl", [{**r.record(), "S_minus1": r.S_minus1} for r in residues])
    rows = []
    for idx, r in enumerate(residues):
        cut = abs(r.zeta) if r.zeta.real >= 0 else abs(r.zeta.imag)
        others = [abs(r.zeta - s.zeta) for s in residues if s is not r]
        radius = min([0.05, 0.5 * cut, *[0.5 * d for d in others]])
        nodes, _ = circle(r.zeta, radius, 8)
        for z in nodes:
            _, holo = laurent_split(spec, residues, z)
            rows.append([idx, z.real, z.imag, float(np.linalg.norm(holo, 2))])
    out.csv("laurent_holo.csv", ["pole_index", "re", "im", "holo_norm"], rows)
    return EXIT_OK


def cmd_verify(args, cfg, out):
    from friedrichs.verify import run_suite
    slack = args.tol if args.tol is not None else 1.0
    tols = {k: float(v) for k, v in cfg.tolerances.items()}
    results = run_suite(cfg.spec, tols, slack=slack)
    out.jsonl("verify.jsonl", [r.record() for r in results])
    failed = [r.name for r in results if not r.passed]
    for r in results:
        LOGGER.info("%-20s %s value=%.3e tol=%.1e", r.name, "PASS" if r.passed else "FAIL",
                    r.value, r.tol)
    if failed:
        raise IdentityViolation(f"checks failed: {', '.join(failed)}")
    return EXIT_OK


def cmd_project(args, cfg, out):
    from friedrichs.hardy import GridFunction, project_plus, uniform_grid
    spec = cfg.spec
    block = cfg.project
    n = spec.n
    raw_terms = block.get("terms", [{"pole": [1.0, -1.0], "order": 1, "coeff": [[1.0, 0.0]] * n}])
    terms = []
    for i, t in enumerate(raw_terms):
        pole = _complex(t.get("pole"), f"project.terms[{i}].pole", "")
        order = int(t.get("order", 1))
        coeff = np.array([_complex(c, f"project.terms[{i}].coeff", "") for c in t.get("coeff", [])])
        if coeff.size != n or abs(pole.imag) == 0:
            raise ParseError(f"project.terms[{i}] needs n [re, im] coefficients and a non-real pole")
        terms.append((pole, order, coeff))
    points = [_complex(p, "project.points", "") for p in block.get("points", [[0.5, 1.0], [2.0, 0.5]])]
    cutoff = float(block.get("cutoff", 200.0))
    count = int(block.get("grid_points", 200000))
    grid = uniform_grid(cutoff, count)
    vals = np.zeros((grid.size, n), dtype=complex)
    for pole, order, coeff in terms:
        vals += coeff[None, :] / ((grid - pole) ** order)[:, None]
    decay = float(min(order for _, order, _ in terms))
    f = GridFunction(grid, vals, decay)
    rows = []
    for z in points:
        got = project_plus(f, z)
        # closed form: only terms analytic in the upper half plane survive
        exact = sum((c / (z - p) ** k for p, k, c in terms if p.imag < 0), np.zeros(n, complex))
        for i in range(n):
            rows.append([z.real, z.imag, i, got[i].real, got[i].imag, exact[i].real, exact[i].imag,
                         float(abs(got[i] - exact[i]))])
    out.csv("project.csv", ["re", "im", "component", "q_re", "q_im", "exact_re", "exact_im", "abs_err"],
            rows)
    return EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "resonances": cmd_resonances,
    "trajectory": cmd_trajectory,
    "smatrix": cmd_smatrix,
    "gamov": cmd_gamov,
    "laurent": cmd_laurent,
    "verify": cmd_verify,
    "project": cmd_project,
}


def exit_code_for(exc: BaseException) -> int:
    return int(getattr(exc, "exit_code", 1))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="friedrichs", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="model file (JSON)")
    p.add_argument("--out", help="directory for output files; stdout if omitted")
    p.add_argument("--region", help="re_min,re_max,im_min,im_max of the search rectangle")
    p.add_argument("--eps-grid", dest="eps_grid", help="descending couplings, comma separated")
    p.add_argument("--lambda", dest="lam", help="start:stop:count of the energy grid")
    p.add_argument("--tol", type=float, help="principal tolerance of the command")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run_command(cmd: str, cfg: RunConfig, args, stream=None) -> int:
    """Dispatch `cmd`; library errors become exit codes and an error record."""
    out = Output(args.out, cfg.config_hash, stream)
    try:
        return HANDLERS[cmd](args, cfg, out)
    except FriedrichsError as exc:
        code = exit_code_for(exc)
        _error_record(exc, code, cfg.config_hash)
        return code


def _error_record(exc, code, config_hash=None):
    rec = {**exc.record(), "exit_code": code}
    if config_hash:
        rec["config_hash"] = config_hash
    sys.stderr.write(json.dumps(_clean(rec)) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    threads = os.environ.get("FRIEDRICHS_THREADS")
    if threads not in (None, "", "0"):
        LOGGER.info("worker threads capped at %s", threads)
    try:
        cfg = parse_config(args.config)
    except FriedrichsError as exc:
        code = exit_code_for(exc)
        if isinstance(exc, ValidationFailure) and exc.report is not None:
            for rec in exc.report.as_records():
                sys.stderr.write(json.dumps(_clean(rec)) + "\n")
        _error_record(exc, code)
        return code
    for item in validate_model(cfg.spec).items:
        LOGGER.info("check %-28s %s  %s", item.name, "ok" if item.passed else "FAILED", item.detail)
    return run_command(args.command, cfg, args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
