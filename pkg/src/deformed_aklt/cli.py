"""Command-line entry point: gap scans, threshold certificates and the check suite."""
import argparse
from concurrent.futures import ProcessPoolExecutor
import json
import logging
import sys

import numpy as np

from .certify import CertificationError, certify, find_delta_c, mu0
from .eigensolver import AUTO_DENSE_CAP
from .estimators import GapScanner, check_dims
from .hamiltonian import SPARSE_CAP
from .lattice import build_lattice, coarse_grain, injective_covering, three_colouring
from .verification import PreconditionError, SUITES, run_suite

logger = logging.getLogger("deformed_aklt")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def parse_dims(text):
    parts = [p for p in str(text).replace("x", ",").split(",") if p.strip()]
    try:
        return check_dims([int(p) for p in parts])
    except ValueError as exc:
        raise UsageError(f"bad --dims {text!r}: {exc}") from None


def parse_grid(text):
    """``start:stop:count[:linear|log]`` or a comma list of deltas."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                raise ValueError("expected start:stop:count[:spacing]")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            spacing = parts[3] if len(parts) == 4 else "linear"
            if count < 1:
                raise ValueError("count must be >= 1")
            if spacing == "linear":
                grid = np.linspace(start, stop, count)
            elif spacing == "log":
                if start <= 0 or stop <= 0:
                    raise ValueError("log spacing needs positive bounds")
                grid = np.geomspace(start, stop, count)
            else:
                raise ValueError(f"unknown spacing {spacing!r}")
        else:
            grid = np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise UsageError(f"bad --delta-grid {text!r}: {exc}") from None
    if grid.size == 0 or np.any(grid < 0) or np.any(grid > 1):
        raise UsageError(f"--delta-grid values must lie in [0, 1], got {text!r}")
    return [float(d) for d in grid]


def read_config(path):
    """Flat ``key = value`` file; keys use the long flag names without dashes."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


DEFAULTS = {"lattice": "ring", "dims": "6", "boundary": "periodic", "delta_grid": None,
            "tol": 1e-10, "seed": 0, "out": None, "cap_dense": AUTO_DENSE_CAP,
            "cap_sparse": SPARSE_CAP, "jobs": 1, "region": 0}
CASTS = {"tol": float, "seed": int, "cap_dense": int, "cap_sparse": int, "jobs": int, "region": int}


def resolve(args):
    """Defaults < config file < explicit flags."""
    conf = dict(DEFAULTS)
    if getattr(args, "config", None):
        file_conf = read_config(args.config)
        unknown = set(file_conf) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        conf.update(file_conf)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            conf[k] = v
    try:
        for k, cast in CASTS.items():
            conf[k] = cast(conf[k])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if conf["tol"] <= 0 or conf["cap_dense"] <= 0 or conf["cap_sparse"] <= 0 or conf["jobs"] < 1:
        raise UsageError("tol, caps and jobs must be positive")
    conf["dims"] = parse_dims(conf["dims"])
    return conf


def _graph(conf):
    try:
        return build_lattice(conf["lattice"], conf["dims"], conf["boundary"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _open_out(path):
    return open(path, "w") if path else sys.stdout


def _scan_one(params):
    conf, delta = params
    method = "dense" if _dim(conf) <= conf["cap_dense"] else "krylov"
    est = GapScanner(conf["lattice"], conf["dims"], conf["boundary"], conf["tol"], conf["seed"],
                     method, conf["cap_sparse"]).fit()
    return est.scan_point(delta)


def _dim(conf):
    g = build_lattice(conf["lattice"], conf["dims"], conf["boundary"])
    return int(np.prod(g.physical_dims()))


def cmd_gap_scan(conf):
    _graph(conf)
    grid = parse_grid(conf["delta_grid"] or "0.003:0.3:5:log")
    fh = _open_out(conf["out"])
    status = EXIT_OK
    try:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        fh.write("delta,E0,E1,gap,graph_fidelity,converged\n")
        tasks = [(conf, d) for d in grid]
        if conf["jobs"] > 1:
            with ProcessPoolExecutor(conf["jobs"]) as pool:
                futures = [pool.submit(_scan_one, t) for t in tasks]
                rows = _gather(futures)
        else:
            rows = _gather_serial(tasks)
        # rows come back in grid order; stop at the first failure, keep what precedes it
        for d, row in zip(grid, rows):
            if isinstance(row, Exception):
                logger.error("solver failed at delta=%s: %s", d, row)
                status = EXIT_FAIL
                break
            E0, E1, g, fid, conv = row
            fh.write(",".join([fmt(d), fmt(E0), fmt(E1), fmt(g), fmt(fid), str(int(conv))]) + "\n")
            if not conv:
                status = EXIT_FAIL
        fh.flush()
    finally:
        if fh is not sys.stdout:
            fh.close()
    return status


def _gather(futures):
    out = []
    for f in futures:
        try:
            out.append(f.result())
        except (ArithmeticError, MemoryError, RuntimeError, ValueError) as exc:
            out.append(exc)
    return out


def _gather_serial(tasks):
    out = []
    for t in tasks:
        try:
            out.append(_scan_one(t))
        except (ArithmeticError, MemoryError, RuntimeError, ValueError) as exc:
            out.append(exc)
            break
    return out


def _record(d):
    return json.dumps({"schema_version": SCHEMA_VERSION, **d}, sort_keys=True,
                      default=lambda x: x.tolist() if hasattr(x, "tolist") else str(x))


def cmd_delta_c(conf):
    graph = _graph(conf)
    covering = injective_covering(graph)
    if covering is None:
        logger.error("refusing: lattice %r admits no injective covering; some region always has a "
                     "vertex with two or more outgoing edges, so the block maps are never injective",
                     graph.kind)
        return EXIT_FAIL
    if not 0 <= conf["region"] < len(covering.regions):
        raise UsageError(f"--region must be in [0, {len(covering.regions)})")
    col = three_colouring(graph)
    region = covering.regions[conf["region"]]
    grid = parse_grid(conf["delta_grid"] or "0:1:11")
    fh = _open_out(conf["out"])
    try:
        for d in grid:
            fh.write(_record({"record": "certificate", **certify(graph, col, region, d).to_dict()}) + "\n")
        try:
            dc, (lo, hi) = find_delta_c(graph, col, region)
        except CertificationError as exc:
            logger.error("delta_c: %s", exc)
            return EXIT_FAIL
        cg = coarse_grain(graph, covering)
        fh.write(_record({"record": "delta_c", "lattice": graph.kind, "region": list(region.members),
                          "r": region.r, "coarse_degree": cg.degree(conf["region"]),
                          "delta_c": float(fmt(dc)), "bracket": [float(fmt(lo)), float(fmt(hi))],
                          "mu0": mu0(region.r) if region.r >= 2 else None}) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_verify(conf, suite, lattice_given):
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    graph = _graph(conf) if lattice_given else None
    try:
        reports = run_suite(suite, graph, conf["seed"])
    except PreconditionError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_USAGE
    fh = _open_out(conf["out"])
    try:
        for rep in reports:
            fh.write(_record({"record": "check", **rep.to_dict()}) + "\n")
            print(rep.summary(), file=sys.stderr)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_mu0(r):
    try:
        m = mu0(r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"r={r} mu0={m:.6f} inv_mu0={1 / m:.6f}")
    return EXIT_OK


def cmd_lattice_info(conf):
    g = _graph(conf)
    col = three_colouring(g)
    cov = injective_covering(g)
    info = {"lattice": g.kind, "dims": list(conf["dims"]), "boundary": g.boundary, "N": g.N,
            "edges": len(g.edges), "degrees": sorted(set(g.degree)),
            "hilbert_dim": int(np.prod(g.physical_dims())),
            "colouring": [col[v] for v in g.vertices] if col else None,
            "coverable": cov is not None}
    if cov is not None:
        cg = coarse_grain(g, cov)
        info.update({"regions": [list(r.members) for r in cov.regions], "r": [r.r for r in cov.regions],
                     "coarse_degrees": [cg.degree(a) for a in cg.nodes]})
    print(_record(info))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--lattice", choices=["ring", "honeycomb", "star", "square_octagon", "cross", "square"])
    common.add_argument("--dims", help="N for a ring, or NX,NY unit cells")
    common.add_argument("--boundary", choices=["periodic", "open"])
    common.add_argument("--delta-grid", dest="delta_grid", help="start:stop:count[:linear|log] or d1,d2,...")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--cap-dense", dest="cap_dense", type=int)
    common.add_argument("--cap-sparse", dest="cap_sparse", type=int)
    common.add_argument("--jobs", type=int, help="worker processes for grid points")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="deformed-aklt", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("gap-scan", parents=[common], help="gap of H(delta) along a grid (CSV)")
    dc = sub.add_parser("delta-c", parents=[common], help="certificates and the threshold delta_c (JSONL)")
    dc.add_argument("--region", type=int, help="index of the covering region")
    v = sub.add_parser("verify", parents=[common], help="run numerical checks (JSONL)")
    v.add_argument("suite", help=", ".join(sorted(SUITES)))
    m = sub.add_parser("mu0", help="threshold mu0(r)")
    m.add_argument("r", type=int)
    sub.add_parser("lattice-info", parents=[common], help="lattice, colouring and covering summary")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "mu0":
            return cmd_mu0(args.r)
        conf = resolve(args)
        if args.command == "gap-scan":
            return cmd_gap_scan(conf)
        if args.command == "delta-c":
            return cmd_delta_c(conf)
        if args.command == "verify":
            return cmd_verify(conf, args.suite, args.lattice is not None)
        if args.command == "lattice-info":
            return cmd_lattice_info(conf)
    except UsageError as exc:
        print(f"deformed-aklt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"deformed-aklt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
