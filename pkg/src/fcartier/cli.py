"""Command line front end: ``check``, ``sweep`` and ``verify``.

Reports are JSON with sorted keys and no timestamps, so identical jobs give
byte-identical output.  Wall-clock timings, when requested with
``--timings``, go to a separate file.

Exit codes: 0 pass, 1 principled negative verdict, 2 error or indeterminate.
"""

from __future__ import annotations

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import click

from . import __version__
from .arith import parse_poly
from .errors import CartierError

EXIT_PASS, EXIT_FALSE, EXIT_ERROR = 0, 1, 2
SUITES = ("cartier", "snc", "duality", "hara", "residue")


# ---------------------------------------------------------------------------
# jobs


def _split(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [str(x).strip() for x in text]
    return [t.strip() for t in str(text).split(",") if t.strip()]


def load_job(path, overrides):
    """Merge a JSON job file with command-line values (the latter win)."""
    job = {}
    if path:
        with open(path) as fh:
            job = json.load(fh)
        if not isinstance(job, dict):
            raise click.BadParameter("job file must hold a JSON object")
    for k, v in overrides.items():
        if v is not None:
            job[k] = v
    return job


def _primes(job):
    raw = job.get("primes", job.get("p"))
    if raw is None:
        return []
    if isinstance(raw, int):
        return [raw]
    return [int(x) for x in _split(raw)]


def _vars(job):
    v = _split(job.get("vars"))
    if not v:
        raise click.UsageError("--vars is required")
    return v


# ---------------------------------------------------------------------------
# per-prime work (top level so it pickles)


def _check_one(f_text, variables, p, k):
    from .fincheck import k_f_injective

    t0 = time.perf_counter()
    try:
        f = parse_poly(f_text, variables, p)
        V = k_f_injective(f, k)
        d = V.to_dict()
        out = {"p": p, "overall": d["overall"], "reflexive": d["reflexive"], "grid": d["grid"],
               "oracles": d["oracles"], "cartier_surjective": d["cartier_surjective"],
               "diagnostics": d["diagnostics"]}
    except CartierError as exc:
        out = {"p": p, "overall": None, "error": exc.to_dict()}
    except (ValueError, RuntimeError) as exc:
        out = {"p": p, "overall": None, "error": {"error": type(exc).__name__, "message": str(exc)}}
    return out, time.perf_counter() - t0


def _run_primes(f_text, variables, primes, k, jobs):
    if jobs <= 1 or len(primes) <= 1:
        results = [_check_one(f_text, variables, p, k) for p in primes]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(primes))) as ex:
            futs = [ex.submit(_check_one, f_text, variables, p, k) for p in primes]
            results = [fu.result() for fu in futs]
    verdicts = [r[0] for r in results]
    timings = {str(v["p"]): round(r[1], 3) for v, r in zip(verdicts, results)}
    return verdicts, timings


def _summary(verdicts):
    cells = {}
    for v in verdicts:
        for c in v.get("grid", []):
            key = f"{c['i']},{c['j']}"
            ok, tot = cells.get(key, (0, 0))
            cells[key] = (ok + (1 if c["injective"] else 0), tot + 1)
    frac = {k: str(Fraction(a, b)) for k, (a, b) in sorted(cells.items())}
    passing = [v["p"] for v in verdicts if v.get("overall") is True]
    return {"cells": frac, "passing_primes": passing,
            "failed_primes": [v["p"] for v in verdicts if v.get("overall") is False],
            "errored_primes": [v["p"] for v in verdicts if v.get("overall") is None]}


def _report(inp, verdicts=(), certificates=(), summary=None):
    rep = {"input": inp, "verdicts": list(verdicts), "certificates": list(certificates),
           "engine": {"version": __version__}}
    if summary is not None:
        rep["summary"] = summary
    return rep


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _emit(report, out, timings=None, timings_path=None):
    text = dumps(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if timings_path and timings is not None:
        with open(timings_path, "w") as fh:
            json.dump({"timings": timings}, fh, sort_keys=True, indent=2)


def _exit_for(verdicts):
    if not verdicts or any(v.get("overall") is None for v in verdicts):
        return EXIT_ERROR
    return EXIT_PASS if all(v["overall"] for v in verdicts) else EXIT_FALSE


# ---------------------------------------------------------------------------
# verification suites


def _E_indices(spec, n):
    names = "xyzw"[:n] if n <= 4 else ""
    if spec is None:
        return tuple(range(n))
    spec = str(spec).strip()
    if spec in ("", "none", "0", "-"):
        return ()
    if "," in spec or spec.isdigit():
        out = []
        for t in _split(spec):
            out.append(int(t) - 1 if t.isdigit() else _name_index(t, n, names))
        return tuple(sorted(set(out)))
    return tuple(sorted({_name_index(ch, n, names) for ch in spec}))


def _name_index(t, n, names):
    if t in names:
        return names.index(t)
    if t.startswith("x") and t[1:].isdigit() and 1 <= int(t[1:]) <= n:
        return int(t[1:]) - 1
    raise click.BadParameter(f"unknown coordinate {t!r}")


def run_suite(suite, n, p, D, E, nmax):
    from .derham import (LogDivisor, duality_check, hara_package, regular_cartier_certificate,
                         residue_suite)
    from .sncforms import SncContext, generic_torsion_agrees, snc_bzg_residue, verify_snc_exact

    certs = []
    if suite == "cartier":
        r = regular_cartier_certificate(n, p, D)
        certs.append({"suite": "cartier", "n": n, "p": p, "ok": r["ok"], "detail": r})
    elif suite == "snc":
        ctx = SncContext(n, p)
        for i in range(1, min(3, n) + 1):
            r = verify_snc_exact(ctx, i, D if D is not None else 6)
            certs.append({"suite": "snc", "n": n, "p": p, "i": i, "ok": r["ok"], "detail": r})
            if 2 <= n <= 3:
                for w in ("E", "E1c"):
                    ok = generic_torsion_agrees(ctx, w, i)
                    certs.append({"suite": "snc-torsion", "n": n, "p": p, "i": i, "which": w, "ok": ok})
            for w in (2, 3, 4):
                r = snc_bzg_residue(ctx, i, w, D if D is not None else 8)
                certs.append({"suite": "snc-residue", "n": n, "p": p, "i": i, "which": w,
                              "ok": r["ok"], "failures": r["failures"]})
    elif suite == "duality":
        for i in range(n + 1):
            r = duality_check(LogDivisor(n, E), i, p, D if D is not None else 10)
            certs.append({"suite": "duality", "n": n, "p": p, "E": list(E), "i": i, "ok": r["ok"],
                          "detail": {k: r[k] for k in ("1", "2", "3")}})
    elif suite == "hara":
        Dh = D if D is not None else 12
        for s in (0, 1, 2):
            base = LogDivisor.scaled(n, E, Fraction(-1, p ** s) if s else 0)
            for lev in range(1, nmax + 1):
                for i in range(n + 1):
                    h = hara_package(base, i, lev, p)
                    ok, fails, count = h.certify(Dh)
                    entry = {"suite": "hara", "n": n, "p": p, "E": list(E),
                             "delta": [str(x) for x in base.delta], "level": lev, "i": i,
                             "multidegrees": count, "ok": ok,
                             "failures": [[list(a), b] for a, b in fails[:5]]}
                    if s:
                        h0 = hara_package(LogDivisor(n, E), i, lev, p)
                        ff = h0.functoriality(h, Dh)
                        entry["functoriality"] = not ff
                        entry["ok"] = ok and not ff
                    certs.append(entry)
    elif suite == "residue":
        for c in E:
            for r in residue_suite(LogDivisor(n, E), c, p, D if D is not None else 8):
                certs.append({"suite": "residue", "n": n, "p": p, "E": list(E), "c": c,
                              "which": r["which"], "i": r["i"], "ok": r["ok"],
                              "failures": r["failures"]})
    else:
        raise click.BadParameter(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return certs


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__)
def main():
    """Cartier operators and (k-)F-injectivity of isolated hypersurface singularities."""


def _common(fn):
    opts = [
        click.option("--job", "job_file", type=click.Path(exists=True, dir_okay=False),
                     help="JSON job file; command-line flags override it."),
        click.option("--out", type=click.Path(dir_okay=False), help="Write the report here."),
        click.option("--timings", "timings_path", type=click.Path(dir_okay=False),
                     help="Write wall-clock timings to this separate file."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


@main.command()
@click.option("--f", "f_text", help="Polynomial, e.g. 'x*y - z*w'.")
@click.option("--vars", "variables", help="Comma-separated variables.")
@click.option("--p", "p", type=int, help="The prime.")
@click.option("--k", "k", type=int, help="Form degree bound (default 0).")
@_common
def check(f_text, variables, p, k, job_file, out, timings_path):
    """Decide k-F-injectivity at one prime."""
    try:
        job = load_job(job_file, {"f": f_text, "vars": variables, "p": p, "k": k})
        if job.get("f") is None:
            raise click.UsageError("--f is required")
        primes = _primes(job)
        if len(primes) != 1:
            raise click.UsageError("check needs exactly one prime")
        kk = int(job.get("k", 0))
        vs = _vars(job)
    except click.UsageError as exc:
        click.echo(json.dumps({"error": "UsageError", "message": exc.format_message()}), err=True)
        sys.exit(EXIT_ERROR)
    verdicts, timings = _run_primes(job["f"], vs, primes, kk, 1)
    inp = {"f": job["f"], "vars": vs, "p": primes[0], "k": kk}
    _emit(_report(inp, verdicts), out, timings, timings_path)
    sys.exit(_exit_for(verdicts))


@main.command()
@click.option("--f", "f_text", help="Polynomial.")
@click.option("--vars", "variables", help="Comma-separated variables.")
@click.option("--primes", "primes", help="Comma-separated primes.")
@click.option("--p", "p", type=int, help="A single prime (same as --primes).")
@click.option("--k", "k", type=int, help="Form degree bound (default 0).")
@click.option("--jobs", type=int, help="Worker processes (default: available CPUs).")
@_common
def sweep(f_text, variables, primes, p, k, jobs, job_file, out, timings_path):
    """Run check over a list of primes; results merged in prime order."""
    try:
        job = load_job(job_file, {"f": f_text, "vars": variables,
                                  "primes": primes if primes is not None else p,
                                  "k": k, "jobs": jobs})
        if job.get("f") is None:
            raise click.UsageError("--f is required")
        plist = sorted(set(_primes(job)))
        if not plist:
            raise click.UsageError("empty prime list")
        vs = _vars(job)
    except (click.UsageError, ValueError) as exc:
        msg = exc.format_message() if isinstance(exc, click.UsageError) else str(exc)
        click.echo(json.dumps({"error": "UsageError", "message": msg}), err=True)
        sys.exit(EXIT_ERROR)
    kk = int(job.get("k", 0))
    nj = int(job.get("jobs") or os.cpu_count() or 1)
    verdicts, timings = _run_primes(job["f"], vs, plist, kk, nj)
    inp = {"f": job["f"], "vars": vs, "primes": plist, "k": kk}
    _emit(_report(inp, verdicts, summary=_summary(verdicts)), out, timings, timings_path)
    sys.exit(_exit_for(verdicts))


@main.command()
@click.option("--suite", help=f"Comma-separated suites: {', '.join(SUITES)}.")
@click.option("--n", "n", type=int, help="Number of variables.")
@click.option("--p", "p", type=int, help="The prime.")
@click.option("--D", "D", type=int, help="Truncation degree.")
@click.option("--E", "E", help="Coordinate hyperplanes, e.g. 'xy', '1,2' or '' (default: all).")
@click.option("--nmax", type=int, help="Iteration levels for the hara suite (default 2).")
@_common
def verify(suite, n, p, D, E, nmax, job_file, out, timings_path):
    """Run certificate suites on affine space and SNC data."""
    try:
        job = load_job(job_file, {"suite": suite, "n": n, "p": p, "D": D, "E": E, "nmax": nmax})
        suites = _split(job.get("suite"))
        if not suites:
            raise click.UsageError("--suite is required")
        for s in suites:
            if s not in SUITES:
                raise click.UsageError(f"unknown suite {s!r}")
        if job.get("n") is None or job.get("p") is None:
            raise click.UsageError("--n and --p are required")
        nn, pp = int(job["n"]), int(job["p"])
        from .arith import check_prime
        check_prime(pp)
        EE = _E_indices(job.get("E"), nn)
        Dv = None if job.get("D") is None else int(job["D"])
        nm = int(job.get("nmax") or 2)
    except (click.UsageError, click.BadParameter, CartierError) as exc:
        if isinstance(exc, CartierError):
            payload = exc.to_dict()
        else:
            payload = {"error": "UsageError", "message": exc.format_message()}
        click.echo(json.dumps(payload), err=True)
        sys.exit(EXIT_ERROR)
    certs, timings = [], {}
    try:
        for s in suites:
            t0 = time.perf_counter()
            certs += run_suite(s, nn, pp, Dv, EE, nm)
            timings[s] = round(time.perf_counter() - t0, 3)
    except CartierError as exc:
        click.echo(json.dumps(exc.to_dict()), err=True)
        sys.exit(EXIT_ERROR)
    inp = {"suite": suites, "n": nn, "p": pp, "D": Dv, "E": [j + 1 for j in EE], "nmax": nm}
    _emit(_report(inp, certificates=certs), out, timings, timings_path)
    sys.exit(EXIT_PASS if all(c["ok"] for c in certs) else EXIT_FALSE)


if __name__ == "__main__":
    main()
