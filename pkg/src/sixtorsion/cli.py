"""Command-line harness: caches, scans, constants and oracle checks.

Every command writes its CSV/JSON outputs plus ``manifest.json`` (resolved
config, versions, wall time, output checksums) into ``--out``.  CSV outputs
depend only on the inputs, so repeated runs are byte-identical.

A config file holds ``key = value`` lines; keys are option names (``X``,
``sign``, ``dmax``, ...) and apply to whichever command is run.
"""

from __future__ import annotations

import json
import logging
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import click
import numpy as np

from . import __version__

log = logging.getLogger("sixtorsion")


# ---------------------------------------------------------------------------
# Config and manifests
# ---------------------------------------------------------------------------


def read_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def write_config(path: Path, cfg: dict) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in sorted(cfg.items())))


def _versions() -> dict[str, str]:
    out = {"sixtorsion": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "numba", "mpmath", "click"):
        out[pkg] = metadata.version(pkg)
    return out


def write_manifest(out: Path, command: str, config: dict, outputs: list[Path], started: float, extra=None) -> None:
    from .cubic.cache import sha256_file

    man = {
        "command": command,
        "config": {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(config.items())},
        "versions": _versions(),
        "wall_time_s": round(time.time() - started, 3),
        "outputs": {p.name: sha256_file(p) for p in outputs},
    }
    if extra:
        man.update(extra)
    (out / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")
    return path


class _Ctx:
    def __init__(self, out: Path, cache_dir: Path | None, seed: int, threads: int | None, local_data: Path | None):
        self.out = out
        self.cache_dir = cache_dir
        self.seed = seed
        self.threads = threads
        self.local_data = local_data

    def config(self, **kw) -> dict:
        base = {"out": self.out, "cache_dir": self.cache_dir, "seed": self.seed, "threads": self.threads,
                "local_data": self.local_data}
        base.update(kw)
        return base


def _fields(ctx: _Ctx, X: int, no_cache: bool):
    from .cubic.cache import CacheMissingError, get_field_table

    try:
        return get_field_table(X, ctx.cache_dir, compute=no_cache)
    except CacheMissingError as exc:
        raise click.ClickException(str(exc)) from exc


def _guard(fn):
    """Turn library errors into clean CLI failures."""
    import functools

    from .errors import SixTorsionError

    @functools.wraps(fn)
    def wrapper(*a, **k):
        try:
            return fn(*a, **k)
        except SixTorsionError as exc:
            raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="key = value file supplying option defaults.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("."), show_default=True,
              help="Output directory.")
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Cubic-field cache root (default: $SIXTORSION_CACHE_DIR or ~/.cache/sixtorsion).")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized checks.")
@click.option("--threads", type=int, default=None, help="Numba thread count.")
@click.option("--local-data", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="Alternative local_etale.csv.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def main(ctx, config_path, out, cache_dir, seed, threads, local_data, verbose):
    """Counting engine for class-group torsion, cubic fields and D6 fields."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if config_path is not None:
        cfg = read_config(config_path)
        ctx.default_map = {name: cfg for name in main.commands}
    if threads:
        import numba

        numba.set_num_threads(threads)
    out.mkdir(parents=True, exist_ok=True)
    ctx.obj = _Ctx(out, cache_dir, seed, threads, local_data)


@main.command("enumerate-cubics")
@click.option("--X", "X", type=int, required=True, help="Bound on |disc|.")
@click.option("--chunks-per-sign", type=int, default=8, show_default=True)
@click.option("--max-chunks", type=int, default=None, help="Stop after this many new chunks (resume later).")
@click.pass_obj
@_guard
def enumerate_cubics(obj: _Ctx, X, chunks_per_sign, max_chunks):
    """Build (or resume) the cubic-field cache for |disc| <= X."""
    from .cubic.cache import build_cache, sha256_file

    t0 = time.time()
    d = build_cache(X, obj.cache_dir, chunks_per_sign, max_chunks)
    man = json.loads((d / "manifest.json").read_text())
    click.echo(f"cache {d}: status {man['status']}, {len(man['chunks'])}/{len(man['plan'])} chunks")
    outputs = []
    if man["status"] == "complete":
        click.echo(f"{man['rows']} fields; fields.csv sha256 {sha256_file(d / 'fields.csv')}")
    write_manifest(obj.out, "enumerate-cubics", obj.config(X=X, chunks_per_sign=chunks_per_sign,
                                                           max_chunks=max_chunks), outputs, t0,
                   {"cache": str(d), "cache_status": man["status"]})


@main.command("torsion-sum")
@click.option("--X", "X", type=int, required=True)
@click.option("--sign", type=click.Choice(["minus", "plus"]), default="minus", show_default=True)
@click.option("--variant", type=click.Choice(["h2", "h3", "h6", "h6_plus"]), default="h6", show_default=True)
@click.option("--no-cache", is_flag=True, help="Enumerate cubic fields in memory if no cache covers X.")
@click.pass_obj
@_guard
def torsion_sum(obj: _Ctx, X, sign, variant, no_cache):
    """Torsion rows and the sum of h_n over fundamental D with 0 < sign D < X."""
    from . import torsion

    t0 = time.time()
    fields = _fields(obj, X, no_cache)
    table = torsion.torsion_table(X, sign, fields)
    rows = obj.out / "torsion_rows.csv"
    torsion.write_torsion_rows(rows, table)
    s = torsion.torsion_sums(X, sign, variant, fields)
    summary = {"X": X, "sign": sign, "variant": variant, "sum": s.sum, "count": s.count,
               "main_term": s.main_term, "ratio": s.ratio, "wall_time_s": round(time.time() - t0, 3)}
    _write_json(obj.out / "summary.json", summary)
    click.echo(f"sum = {s.sum} over {s.count} discriminants; main term = {s.main_term}; ratio = {s.ratio}")
    write_manifest(obj.out, "torsion-sum", obj.config(X=X, sign=sign, variant=variant), [rows], t0)


@main.command("lod-scan")
@click.option("--X", "X", type=int, required=True)
@click.option("--dmax", type=int, default=30, show_default=True)
@click.option("--model", type=click.Choice(["N3", "N3*"]), default="N3*", show_default=True)
@click.option("--sign", type=click.Choice(["both", "plus", "minus"]), default="both", show_default=True)
@click.option("--no-cache", is_flag=True)
@click.pass_obj
@_guard
def lod_scan_cmd(obj: _Ctx, X, dmax, model, sign, no_cache):
    """Error terms |E(X, d)| for squarefree d <= dmax and their sum A(X, dmax)."""
    from . import torsion

    t0 = time.time()
    fields = _fields(obj, X, no_cache)
    scan = torsion.lod_scan(X, dmax, torsion.CountModel(model, sign), fields)
    path = obj.out / "lod_scan.csv"
    torsion.write_lod_scan(path, scan)
    _write_json(obj.out / "summary.json", {"X": X, "dmax": dmax, "model": model, "sign": sign,
                                           "A": scan.aggregate, "A_over_X": scan.normalized})
    click.echo(f"A(X, {dmax})/X = {scan.normalized:.6f}")
    write_manifest(obj.out, "lod-scan", obj.config(X=X, dmax=dmax, model=model, sign=sign), [path], t0)


@main.command("hooley")
@click.option("--x", "x", type=int, required=True, help="Compute Delta(n) for n <= x.")
@click.option("--window-T", "window_T", type=int, default=None, help="Also the windowed divisor sum at T.")
@click.option("--L", "L", type=float, default=1.0, show_default=True)
@click.option("--no-cache", is_flag=True)
@click.pass_obj
@_guard
def hooley_cmd(obj: _Ctx, x, window_T, L, no_cache):
    """Hooley Delta statistics."""
    from . import hooley

    t0 = time.time()
    path = obj.out / "delta_stats.csv"
    hooley.write_delta_stats(path, x)
    avg = hooley.delta_average(x)
    summary = {"x": x, "mean": avg.mean, "bound_ratio": avg.bound_ratio}
    if window_T:
        fields = _fields(obj, window_T, no_cache)
        for sgn, name in ((-1, "minus"), (1, "plus")):
            w = hooley.window_divisor_sum(window_T, L, sgn, fields)
            summary[f"window_{name}"] = {"T": window_T, "L": L, "sum": w.sum, "bound": w.bound, "ratio": w.ratio}
    _write_json(obj.out / "summary.json", summary)
    click.echo(f"mean Delta = {avg.mean:.6f}; bound_ratio = {avg.bound_ratio:.6f}")
    write_manifest(obj.out, "hooley", obj.config(x=x, window_T=window_T, L=L), [path], t0)


@main.command("constants")
@click.pass_obj
@_guard
def constants_cmd(obj: _Ctx):
    """Print C1, C2, C3, c(G), the closed-form constant and identity residuals."""
    from . import constants as K
    from . import etale

    t0 = time.time()
    table = etale.local_etale_table(obj.local_data) if obj.local_data else None
    c1, c2, c3 = K.c1(), K.c2(), K.c3()
    prod = K.c123()
    ls = K.ls_constant(table)
    th = K.closed_form_constant()
    res = {
        "main_constant": _enc(K.main_constant()),
        "C1": _enc(c1),
        "C2": _enc(c2),
        "C3": c3,
        "C3_exact": {"inf": str(K.c3_local("inf")), "2": str(K.c3_local(2)), "3": str(K.c3_local(3))},
        "C1C2C3": _enc(prod),
        "cG": _enc(ls),
        "closed_form_constant": _enc(th),
        "field_sum_2": str(K.field_sum(2, table)),
        "field_sum_3": str(K.field_sum(3, table)),
        "residual_cG_minus_C1C2C3": abs(ls.value - prod.value),
        "residual_C1C2C3_minus_closed_form": abs(prod.value - th.value),
    }
    for k in ("C1", "C2", "C1C2C3", "cG", "closed_form_constant"):
        click.echo(f"{k:18s} {res[k]['value']:.15g}  [{res[k]['lower']:.15g}, {res[k]['upper']:.15g}]")
    click.echo(f"{'C3':18s} {c3:.15g} = {res['C3_exact']['inf']} * ({res['C3_exact']['2']}) * ({res['C3_exact']['3']})")
    click.echo(f"field_sum(2) = {res['field_sum_2']}")
    click.echo(f"field_sum(3) = {res['field_sum_3']}")
    click.echo(f"|c(G) - C1C2C3| = {res['residual_cG_minus_C1C2C3']:.3e}")
    click.echo(f"|C1C2C3 - closed form| = {res['residual_C1C2C3_minus_closed_form']:.3e}")
    path = _write_json(obj.out / "constants.json", res)
    write_manifest(obj.out, "constants", obj.config(), [path], t0)


def _enc(r) -> dict:
    return {"value": r.value, "lower": r.lower, "upper": r.upper, "p_cutoff": r.p_cutoff}


@main.command("d6-count")
@click.option("--X", "X_grid", type=int, multiple=True, required=True, help="Grid point (repeatable).")
@click.option("--unramified-23", is_flag=True, help="Only local specifications with Delta(Sigma) = 1.")
@click.option("--subfield", type=int, default=-3, show_default=True, help="d for the fixed-subfield count.")
@click.option("--no-cache", is_flag=True)
@click.pass_obj
@_guard
def d6_count_cmd(obj: _Ctx, X_grid, unramified_23, subfield, no_cache):
    """Galois D6 fields with |Disc| <= X, and the Malle comparison."""
    from . import constants as K
    from . import d6

    t0 = time.time()
    grid = sorted(X_grid)
    fields = _fields(obj, d6.required_cubic_bound(grid[-1]), no_cache)
    recs = d6.enumerate_d6(grid[-1], fields, unramified_23)
    fpath = obj.out / "d6_fields.csv"
    d6.write_d6_fields(fpath, recs)
    C = K.closed_form_constant().value
    mpath = obj.out / "malle_compare.csv"
    with open(mpath, "w", newline="\n") as fh:
        fh.write("X,count,predicted,ratio,subfield_count\n")
        for X in grid:
            sub = [r for r in recs if r.abs_disc <= X]
            cnt = len(sub) // 2
            pred = C * X ** (1 / 6) * np.log(X) ** 2
            sc = d6.count_with_quadratic_subfield(X, subfield, records=sub)
            fh.write(f"{X},{cnt},{pred:.6f},{cnt / pred:.6f},{sc}\n")
            click.echo(f"X = {X}: {cnt} fields, predicted {pred:.3f}, ratio {cnt / pred:.4f}, "
                       f"containing Q(sqrt({subfield})): {sc}")
    write_manifest(obj.out, "d6-count", obj.config(X=list(grid), unramified_23=unramified_23, subfield=subfield),
                   [fpath, mpath], t0)


@main.command("oracle-check")
@click.option("--dmax", type=int, default=20000, show_default=True, help="Check all fundamental -dmax < D < 0.")
@click.option("--no-cache", is_flag=True, default=True, show_default=True)
@click.pass_obj
@_guard
def oracle_check(obj: _Ctx, dmax, no_cache):
    """Exit 0 iff h3(D) from cubic fields equals the class-group count for every D."""
    from . import bqf, torsion

    t0 = time.time()
    fields = _fields(obj, dmax, no_cache)
    table = torsion.torsion_table(dmax, -1, fields)
    bad = []
    for D, h3 in zip(table.D.tolist(), table.h3.tolist()):
        if bqf.torsion_count(D, 3) != h3:
            bad.append(D)
    path = obj.out / "oracle_mismatches.csv"
    path.write_text("D\n" + "".join(f"{D}\n" for D in bad))
    write_manifest(obj.out, "oracle-check", obj.config(dmax=dmax), [path], t0,
                   {"checked": len(table), "mismatches": len(bad)})
    click.echo(f"checked {len(table)} discriminants, {len(bad)} mismatches")
    if bad:
        sys.exit(1)


if __name__ == "__main__":
    main()
