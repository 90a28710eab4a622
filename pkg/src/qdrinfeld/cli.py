"""Command line front end: configuration, subcommand dispatch and JSON/CSV emission."""
from __future__ import annotations

import configparser
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import click

from .certificates import certify, default_modulus, exponent_lemma_csv, exponent_lemma_scan, sample_b, sample_mu
from .exponentials import qt_exp_resolved
from .field_core import FieldError, make_field
from .hayes_quantum import phi_i, phi_Nl, quantum_torsion_trace, torsion_report, wider_context
from .lattice import EpsilonIndex, lambda_basis, zeta_eps, zeta_ideal
from .periods import xi
from .quadratic import OKElement, QuadraticContext, ctx_new, ok_parse
from .series import PrecisionExhausted, ser_parse, val_text

SCHEMA = 1
EXIT_OK, EXIT_VALIDATION, EXIT_PRECISION, EXIT_CERT_FAILED = 0, 2, 3, 4

SECTIONS = {
    "field": {"p", "n", "modulus"},
    "context": {"a", "b"},
    "precision": {"prec", "cutoff", "window"},
    "job": None,     # subcommand parameters, checked by the subcommand
    "output": {"path", "format"},
}


class ConfigError(click.ClickException):
    exit_code = EXIT_VALIDATION


@dataclass
class RunConfig:
    p: int = 3
    n: int = 1
    modulus: list | None = None
    a: list = field(default_factory=lambda: [0, 0, 1])
    b: int = 1
    prec: Fraction | None = None
    cutoff: int | None = None
    job: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "json"
    source: str = "<defaults>"

    def context(self) -> QuadraticContext:
        try:
            spec = make_field(self.p, self.n, self.modulus)
        except (FieldError, ValueError) as exc:
            raise ConfigError(f"{self.source}: field: {exc}") from exc
        try:
            return ctx_new(spec, self.a, self.b, self.prec)
        except ValueError as exc:
            raise ConfigError(f"{self.source}: context: {exc}") from exc


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.strip().strip("[]").split(",") if x.strip()]


def load_config(path: str) -> RunConfig:
    """Parse an INI config; every error names the offending line."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str    # job keys such as N and M are case-sensitive
    try:
        parser.read_string("\n".join(lines), source=path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    def where(section: str, key: str | None = None) -> str:
        cur = None
        for no, raw in enumerate(lines, start=1):
            s = raw.strip()
            m = re.fullmatch(r"\[(.+)\]", s)
            if m:
                cur = m.group(1).strip()
                if key is None and cur == section:
                    return f"{path}:{no}"
            elif cur == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s):
                return f"{path}:{no}"
        return path

    cfg = RunConfig(source=path)
    for sec in parser.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"{where(sec)}: unknown section [{sec}]")
        allowed = SECTIONS[sec]
        for key in parser[sec]:
            if allowed is not None and key not in allowed:
                raise ConfigError(f"{where(sec, key)}: unknown key {key!r} in [{sec}]")

    def get(sec: str, key: str, conv):
        if not parser.has_option(sec, key):
            return None
        raw = parser.get(sec, key)
        try:
            return conv(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where(sec, key)}: bad value for {key}: {raw!r} ({exc})") from exc

    for key, conv in (("p", int), ("n", int), ("modulus", _int_list)):
        v = get("field", key, conv)
        if v is not None:
            setattr(cfg, key, v)
    a = get("context", "a", _int_list)
    if a is not None:
        cfg.a = a
    b = get("context", "b", int)
    if b is not None:
        cfg.b = b
    if b is not None and b % cfg.p == 0:
        raise ConfigError(f"{where('context', 'b')}: b must be a nonzero constant")
    if cfg.a and len(cfg.a) < 2:
        raise ConfigError(f"{where('context', 'a')}: a needs degree d >= 1")
    for key in ("prec", "window"):
        v = get("precision", key, Fraction)
        if v is not None:
            if v <= 0:
                raise ConfigError(f"{where('precision', key)}: {key} must be positive")
            cfg.prec = v
    cutoff = get("precision", "cutoff", int)
    if cutoff is not None:
        if cutoff < 0:
            raise ConfigError(f"{where('precision', 'cutoff')}: cutoff must be non-negative")
        cfg.cutoff = cutoff
    if parser.has_section("job"):
        cfg.job = {k: (v, where("job", k)) for k, v in parser["job"].items()}
    cfg.out = get("output", "path", str)
    fmt = get("output", "format", str)
    if fmt is not None:
        if fmt not in ("json", "csv"):
            raise ConfigError(f"{where('output', 'format')}: format must be json or csv")
        cfg.fmt = fmt
    return cfg


def threads() -> int:
    raw = os.environ.get("QDRINFELD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"QDRINFELD_THREADS must be an integer, got {raw!r}")


# -- output -------------------------------------------------------------------------

def _emit(cfg: RunConfig, payload, rows: list[dict] | None = None, text: str | None = None) -> None:
    if cfg.fmt == "csv":
        if text is not None:
            out = text
        else:
            rows = rows if rows is not None else [payload]
            buf = io.StringIO()
            keys = list(rows[0].keys()) if rows else []
            writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
            out = buf.getvalue()
    else:
        out = json.dumps({"schema": SCHEMA, **payload} if isinstance(payload, dict) else
                         {"schema": SCHEMA, "items": payload}, indent=2, sort_keys=False) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        click.echo(out, nl=False)


def _job(cfg: RunConfig, key: str, given, conv, default):
    """Flag value, else the [job] entry, else the default."""
    if given is not None:
        return given
    if key in cfg.job:
        raw, loc = cfg.job[key]
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{loc}: bad value for {key}: {raw!r} ({exc})") from exc
    return default


def _ok(ctx: QuadraticContext, text: str, loc: str = "beta"):
    try:
        x = ok_parse(ctx, text)
    except ValueError as exc:
        raise ConfigError(f"{loc}: {exc}") from exc
    if x.is_zero():
        raise ConfigError(f"{loc}: must be nonzero")
    return x


# -- commands -------------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="INI run configuration.")
@click.option("--q", "q", type=int, default=None, help="Field size (prime power); overrides [field].")
@click.option("--a", "a", default=None, help="Coefficients of a, low to high, e.g. 0,0,1 for T^2.")
@click.option("--b", "b", type=int, default=None, help="Constant b in X^2 - aX - b.")
@click.option("--prec", type=str, default=None, help="Working precision window R.")
@click.option("--cutoff", type=int, default=None, help="Lattice degree cutoff D for exponentials.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write output here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.pass_context
def cli(cctx: click.Context, config_path, q, a, b, prec, cutoff, out, fmt) -> None:
    """Exact computations for real quadratic function fields."""
    cfg = load_config(config_path) if config_path else RunConfig()
    if q is not None:
        from .field_core import field_for_q
        try:
            spec = field_for_q(q)
        except (FieldError, ValueError) as exc:
            raise ConfigError(f"--q: {exc}") from exc
        cfg.p, cfg.n, cfg.modulus = spec.p, spec.n, list(spec.modulus)
    if a is not None:
        try:
            cfg.a = _int_list(a)
        except ValueError as exc:
            raise ConfigError(f"--a: {exc}") from exc
    if b is not None:
        if b % cfg.p == 0:
            raise ConfigError("--b: b must be a nonzero constant")
        cfg.b = b
    if prec is not None:
        try:
            cfg.prec = Fraction(prec)
        except ValueError as exc:
            raise ConfigError(f"--prec: {exc}") from exc
    if cutoff is not None:
        cfg.cutoff = cutoff
    if out is not None:
        cfg.out = out
    if fmt is not None:
        cfg.fmt = fmt
    cctx.obj = cfg


def _eps_or_ideal(cfg, ctx, N, l, ideal):
    N = _job(cfg, "N", N, int, None)
    l = _job(cfg, "l", l, int, None)
    ideal = _job(cfg, "ideal", ideal, int, None)
    if ideal is not None:
        if not 0 <= ideal <= ctx.d - 1:
            raise ConfigError(f"ideal index must lie in [0, {ctx.d - 1}]")
        return ideal
    eps = EpsilonIndex(N if N is not None else 1, l if l is not None else 0)
    try:
        eps.check(ctx.d)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return eps


@cli.command()
@click.option("--N", "N", type=int, default=None)
@click.option("--l", "l", type=int, default=None)
@click.option("--kind", type=click.Choice(["raw", "hat", "breve"]), default=None)
@click.pass_obj
def lattice(cfg: RunConfig, N, l, kind) -> None:
    """Closed-form basis of Lambda_eps(f)."""
    ctx = cfg.context()
    eps = _eps_or_ideal(cfg, ctx, N, l, None)
    basis = lambda_basis(ctx, eps, _job(cfg, "kind", kind, str, "raw"))
    data = basis.to_json()
    _emit(cfg, data, rows=[{"N": eps.N, "l": eps.l, **v} for v in data["vectors"]])


@cli.command()
@click.option("--N", "N", type=int, default=None)
@click.option("--l", "l", type=int, default=None)
@click.option("--ideal", type=int, default=None, help="Ideal index i of a_i instead of an eps target.")
@click.pass_obj
def zeta(cfg: RunConfig, N, l, ideal) -> None:
    """Z(u) in closed form with Z(1), Z'(1) and t."""
    ctx = cfg.context()
    target = _eps_or_ideal(cfg, ctx, N, l, ideal)
    z = zeta_ideal(ctx, target) if isinstance(target, int) else zeta_eps(ctx, target)
    data = {"target": target if isinstance(target, int) else {"N": target.N, "l": target.l},
            "Z": str(z["Z"]), "Z1": val_text(Fraction(z["Z1"])), "dZ1": val_text(z["dZ1"]), "t": z["t"]}
    _emit(cfg, data)


@cli.command()
@click.option("--N", "N", type=int, default=None)
@click.option("--l", "l", type=int, default=None)
@click.option("--ideal", type=int, default=None)
@click.option("--branch", type=int, default=None)
@click.option("--M", "M", type=int, default=None, help="Degree bound of the period product.")
@click.pass_obj
def period(cfg: RunConfig, N, l, ideal, branch, M) -> None:
    """Sign-normalizing period xi of Lambda_eps or a_i."""
    ctx = cfg.context()
    target = _eps_or_ideal(cfg, ctx, N, l, ideal)
    rec = xi(ctx, target, _job(cfg, "M", M, int, None), _job(cfg, "branch", branch, int, 0))
    _emit(cfg, rec.to_json())


@cli.command()
@click.option("--z", "z", default=None, help="Series text, e.g. 'T^-1 + 2*T^-3'.")
@click.option("--l", "l", type=int, default=None)
@click.option("--nmax", type=int, default=None)
@click.pass_obj
def qexp(cfg: RunConfig, z, l, nmax) -> None:
    """Quantum exponential convergence e_{eps_N,l}(z) -> e_{d-1-l}(z)."""
    ctx = cfg.context()
    ztext = _job(cfg, "z", z, str, "T^-1")
    try:
        zs = ser_parse(ztext, ctx.spec)
    except ValueError as exc:
        raise ConfigError(f"z: {exc}") from exc
    l = _job(cfg, "l", l, int, 0)
    if not 0 <= l <= ctx.d - 1:
        raise ConfigError(f"l must lie in [0, {ctx.d - 1}]")
    nmax = _job(cfg, "nmax", nmax, int, 4)
    rep = qt_exp_resolved(ctx, zs, l, range(1, nmax + 1))
    _emit(cfg, rep.to_json())
    if not all(rep.resolved):
        sys.exit(EXIT_PRECISION)


@cli.command()
@click.option("--i", "i", type=int, default=None)
@click.option("--N", "N", type=int, default=None)
@click.option("--l", "l", type=int, default=None)
@click.pass_obj
def phi(cfg: RunConfig, i, N, l) -> None:
    """Coefficients of Phi_i, or of Phi_{N,l} when --N is given."""
    ctx = cfg.context()
    N = _job(cfg, "N", N, int, None)
    if N is not None:
        l = _job(cfg, "l", l, int, 0)
        if N < 1 or not 0 <= l <= ctx.d - 2:
            raise ConfigError(f"need N >= 1 and 0 <= l <= {ctx.d - 2}")
        poly = phi_Nl(ctx, N, l, cfg.cutoff)
        head = {"N": N, "l": l}
    else:
        i = _job(cfg, "i", i, int, 1)
        if not 1 <= i <= ctx.d - 1:
            raise ConfigError(f"i must lie in [1, {ctx.d - 1}]")
        poly = phi_i(ctx, i, cfg.cutoff)
        head = {"i": i}
    coeffs = poly.to_json()
    _emit(cfg, {**head, "coeffs": coeffs}, rows=[{**head, **c} for c in coeffs])


@cli.command()
@click.option("--beta", default=None, help="Element of A_inf1, e.g. 'f+1' or 'fT'.")
@click.option("--allow-noncoprime", is_flag=True, default=None)
@click.pass_obj
def torsion(cfg: RunConfig, beta, allow_noncoprime) -> None:
    """rho_i[(beta)] counts and checks, plus the quantum torsion traces."""
    ctx = cfg.context()
    b = _ok(ctx, _job(cfg, "beta", beta, str, "f+1"))
    allow = bool(_job(cfg, "allow_noncoprime", allow_noncoprime, lambda s: s.lower() in ("1", "true", "yes"), False))
    try:
        rep = torsion_report(ctx, b, allow_noncoprime=allow)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cur = wider_context(ctx, rep.window) if rep.window != ctx.window else ctx
    traces = quantum_torsion_trace(cur, OKElement(cur, b.g, b.h), allow_noncoprime=allow)
    data = {**rep.to_json(), "count": rep.counts[0], "traces": [t.to_json() for t in traces]}
    _emit(cfg, data)
    if not rep.ok:
        sys.exit(EXIT_PRECISION)


@cli.command("trace-cert")
@click.option("--beta", default=None)
@click.option("--nb", type=int, default=None, help="Number of sampled b.")
@click.option("--nmu", type=int, default=None, help="Number of sampled mu per b.")
@click.option("--seed", type=int, default=None)
@click.pass_obj
def trace_cert(cfg: RunConfig, beta, nb, nmu, seed) -> None:
    """Trace certificates over sampled (b, mu)."""
    ctx = cfg.context()
    btext = _job(cfg, "beta", beta, str, None)
    bt = default_modulus(ctx) if btext is None else _ok(ctx, btext)
    nb = _job(cfg, "nb", nb, int, 5)
    nmu = _job(cfg, "nmu", nmu, int, 5)
    seed = _job(cfg, "seed", seed, int, 0)
    try:
        jobs = [(b, mu) for b in sample_b(ctx, bt, nb, seed) for mu in sample_mu(ctx, bt, nmu, seed)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        certs = list(pool.map(lambda job: certify(ctx, job[0], job[1], bt, cutoff=cfg.cutoff), jobs))
    data = [c.to_json() for c in certs]
    rows = [{k: v for k, v in c.items() if k not in ("inner", "predictions")} for c in data]
    _emit(cfg, data, rows=rows)
    if any(c.verdict == "failed" for c in certs):
        sys.exit(EXIT_CERT_FAILED)


@cli.command("exponent-lemma")
@click.option("--dmax", type=int, default=None)
@click.option("--qmax", type=int, default=None)
@click.pass_obj
def exponent_lemma(cfg: RunConfig, dmax, qmax) -> None:
    """Integer scan of 2d < (d-1-j) q (q^j - q^(j-1) + 1)."""
    dmax = _job(cfg, "dmax", dmax, int, 64)
    qmax = _job(cfg, "qmax", qmax, int, 64)
    dr, qr = range(4, dmax + 1), range(2, qmax + 1)
    scan = exponent_lemma_scan(dr, qr)
    if cfg.fmt == "csv":
        _emit(cfg, None, text=exponent_lemma_csv(dr, qr))
    else:
        _emit(cfg, {"dmax": dmax, "qmax": qmax, "rows": scan["rows"], "all_true": scan["all_true"],
                    "failures": [list(r) for r in scan["failures"]]})
    if not scan["all_true"]:
        sys.exit(EXIT_CERT_FAILED)


@cli.command()
@click.option("--quick", is_flag=True, help="Smaller grids for a fast smoke run.")
@click.pass_obj
def acceptance(cfg: RunConfig, quick) -> None:
    """Run the acceptance criteria and report pass/fail per criterion."""
    from .acceptance import run_all
    results = run_all(quick=quick, threads=threads())
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    _emit(cfg, {"results": rows, "all_passed": all(r.passed for r in results)}, rows=rows)
    if not all(r.passed for r in results):
        sys.exit(EXIT_CERT_FAILED)


def run(argv: list[str] | None = None) -> int:
    """Entry point returning the exit status instead of exiting."""
    try:
        cli.main(args=argv, prog_name="qdrinfeld", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code if isinstance(exc, ConfigError) else EXIT_VALIDATION
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except PrecisionExhausted as exc:
        click.echo(f"precision exhausted: {exc}", err=True)
        return EXIT_PRECISION
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))
