"""Command-line entry points.

Artifacts live under ``$HERDFLOCK_ARTIFACTS/q{q}/`` (default ``./artifacts``);
a non-default reduction polynomial gets its own directory.  Every
long-running command writes a JSON manifest next to its outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .gf2e import CONWAY, GF2e, field as make_field
from .opoly import OPoly, oval_points

ENV_ROOT = "HERDFLOCK_ARTIFACTS"


class UsageError(Exception):
    pass


# -- artifacts ------------------------------------------------------------


def artifact_dir(F: GF2e, root: str | None = None) -> Path:
    base = Path(root or os.environ.get(ENV_ROOT, "artifacts"))
    name = f"q{F.q}" if F.poly == CONWAY[F.e] else f"q{F.q}-p{F.poly:x}"
    d = base / name
    d.mkdir(parents=True, exist_ok=True)
    return d


def digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 22), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    q: int
    poly: str
    kappa: int | None = None
    workers: int = 1
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    wall_seconds: float = 0.0
    cpu_seconds: float = 0.0
    version: str = __version__

    def consume(self, path: Path) -> None:
        self.inputs[str(path)] = digest(path)

    def produce(self, path: Path) -> None:
        self.outputs[str(path)] = digest(path)

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


class _Timer:
    def __enter__(self):
        self.wall = time.time()
        self.cpu = time.process_time()
        return self

    def __exit__(self, *exc):
        self.wall = time.time() - self.wall
        self.cpu = time.process_time() - self.cpu


# -- oval class files -----------------------------------------------------


def write_oval_classes(path: Path, F: GF2e, reps: list[OPoly], origin: list) -> None:
    lines = [f"# q={F.q} poly={F.poly:x} classes={len(reps)}", "# index hyperoval stabilizer orbit coefficients"]
    for i, (f, (h, _, orbit, order)) in enumerate(zip(reps, origin)):
        lines.append(f"{i} {h} {order} {orbit} {f.to_text()}")
    path.write_text("\n".join(lines) + "\n")


def read_oval_classes(path: Path, F: GF2e) -> list[OPoly]:
    if not path.exists():
        raise UsageError(f"{path} not found; run oval-classes first")
    reps = []
    for ln in path.read_text().splitlines():
        if ln.startswith("#") or not ln.strip():
            continue
        reps.append(OPoly.from_text(ln.split()[-1], F))
    return reps


def oval_classes(F: GF2e, source: str):
    """Inequivalent hyperovals, then one o-polynomial per oval class."""
    from .plane import equivalence, hyperoval_census, hyperoval_from_table, oval_class_reps

    if source == "census":
        hyps = hyperoval_census(F)
    else:
        from .herd import known_hyperovals

        hyps = []
        for table in known_hyperovals(F).values():
            H = hyperoval_from_table(F, table)
            if all(equivalence(H, K) is None for K in hyps):
                hyps.append(H)
    reps, origin = oval_class_reps(hyps, with_origin=True)
    return hyps, reps, origin


# -- commands -------------------------------------------------------------


def _field(args) -> GF2e:
    poly = int(args.field_poly, 16) if args.field_poly else None
    return make_field(args.q, poly)


def _kappa(args, F: GF2e) -> int:
    if args.kappa is None:
        return F.trace_one_smallest()
    k = F.from_hex(args.kappa)
    if F.abs_trace(k) != 1:
        raise UsageError("--kappa must have absolute trace 1")
    return k


def _read_clan(path: str, F: GF2e):
    from .qclan import QClan

    return QClan.from_text(Path(path).read_text(), F)


def cmd_field_info(args) -> int:
    F = _field(args)
    info = F.describe()
    info["trace_one_smallest"] = format(F.trace_one_smallest(), "x")
    print(json.dumps(info, sort_keys=True))
    return 0


def cmd_make_family(args) -> int:
    from .qclan import adelaide_qclan, classical_qclan, is_qclan, subiaco_qclan

    F = _field(args)
    if args.family == "classical":
        C = classical_qclan(F, _kappa(args, F))
    elif args.family == "subiaco":
        C = subiaco_qclan(F, None if args.auto or args.delta is None else F.from_hex(args.delta))
    else:
        beta = None
        if not args.auto and args.beta is not None:
            from .gf2e import QuadExt

            beta = QuadExt(F).decode(int(args.beta, 16))
        C = adelaide_qclan(F, beta, args.m)
    out = Path(args.out) if args.out else artifact_dir(F) / "families" / f"{args.family}.qclan"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(C.to_text())
    print(f"{out} params={json.dumps(C.params, sort_keys=True)} qclan={'PASS' if is_qclan(C) else 'FAIL'}")
    return 0


def cmd_verify_qclan(args) -> int:
    from .qclan import is_qclan

    F = _field(args)
    ok = is_qclan(_read_clan(args.file, F))
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_flock_check(args) -> int:
    from .qclan import flock_planes, has_common_line, is_flock

    F = _field(args)
    planes = flock_planes(_read_clan(args.file, F))
    ok = is_flock(planes, F)
    print(f"{'PASS' if ok else 'FAIL'} linear={int(has_common_line(planes, F))}")
    return 0 if ok else 1


def _opoly_arg(args, F: GF2e) -> OPoly:
    if args.opoly:
        return OPoly.from_text(args.opoly, F)
    if args.family:
        from .herd import named_herd

        return named_herd(F, args.family).f0
    raise UsageError("give --opoly or --family")


def cmd_stabilizer(args) -> int:
    from .plane import set_stabilizer

    F = _field(args)
    f = _opoly_arg(args, F)
    if not f.is_opermutation():
        print("FAIL not an o-permutation")
        return 1
    G = set_stabilizer(oval_points(f))
    sizes = sorted(len(o) for o in G.point_orbits)
    print(f"order={G.order} orbits={sizes}")
    return 0


def cmd_oval_classes(args) -> int:
    F = _field(args)
    d = artifact_dir(F)
    man = RunManifest("oval-classes", F.q, format(F.poly, "x"))
    with _Timer() as t:
        hyps, reps, origin = oval_classes(F, args.hyperovals)
    out = d / "oval_classes.txt"
    write_oval_classes(out, F, reps, origin)
    man.produce(out)
    man.counters = {"hyperovals": len(hyps), "classes": len(reps), "store_size_predicted": _predicted(F, origin)}
    man.wall_seconds, man.cpu_seconds = round(t.wall, 2), round(t.cpu, 2)
    man.write(d / "manifest-oval-classes.json")
    print(f"{len(reps)} classes from {len(hyps)} hyperovals -> {out}")
    return 0


def _predicted(F: GF2e, origin) -> int:
    group = F.q * (F.q * F.q - 1) * F.e
    return sum(group * orbit // order for _, _, orbit, order in origin)


def cmd_build_store(args) -> int:
    import resource

    from .magic import magic_orbit_union

    F = _field(args)
    d = artifact_dir(F)
    reps_path = d / "oval_classes.txt"
    reps = read_oval_classes(reps_path, F)
    man = RunManifest("build-store", F.q, format(F.poly, "x"), workers=args.workers)
    man.consume(reps_path)
    out = d / "store.bin"
    chunks = Path(args.checkpoint_dir) if args.checkpoint_dir else d / "store.chunks"

    def progress(i, n):
        print(f"rep {i}: {n} classes", file=sys.stderr, flush=True)

    with _Timer() as t:
        S = magic_orbit_union(reps, F, out, workdir=chunks, workers=args.workers, resume=args.resume, progress=progress)
    man.produce(out)
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss // 1024
    man.counters = {"representatives": len(reps), "store_size": len(S), "peak_rss_mb": rss}
    man.wall_seconds, man.cpu_seconds = round(t.wall, 2), round(t.cpu, 2)
    man.write(d / "manifest-build-store.json")
    print(f"{len(S)} classes -> {out}")
    return 0


def cmd_store_query(args) -> int:
    from .store import ClassStore

    F = _field(args)
    S = ClassStore(artifact_dir(F) / "store.bin")
    if args.opoly is None:
        print(len(S))
        return 0
    f = OPoly.from_text(args.opoly, F)
    hit = f in S
    print("present" if hit else "absent")
    return 0 if hit else 1


def cmd_herd_search(args) -> int:
    from .herd import OvalClassifier, herd_fingerprint, herd_search
    from .store import ClassStore

    F = _field(args)
    d = artifact_dir(F)
    kappa = _kappa(args, F)
    reps_path, store_path = d / "oval_classes.txt", d / "store.bin"
    reps = read_oval_classes(reps_path, F)
    if not store_path.exists():
        raise UsageError(f"{store_path} not found; run build-store first")
    S = ClassStore(store_path)
    man = RunManifest("herd-search", F.q, format(F.poly, "x"), kappa=kappa, workers=args.workers)
    man.consume(reps_path)
    man.consume(store_path)
    ck = Path(args.checkpoint_dir) if args.checkpoint_dir else d / "search.ckpt"

    def progress(done, total, hits):
        print(f"{done}/{total} records, {hits} hits in range", file=sys.stderr, flush=True)

    with _Timer() as t:
        res = herd_search(F, reps, S, kappa, workers=args.workers, checkpoint_dir=ck, resume=args.resume, progress=progress)
    clf = OvalClassifier(F, reps)
    report = []
    for c in res.stage1:
        line = f"{c.rep} {c.record.hex()} {kappa:x} stage={c.stage}"
        survivor = next((s for s in res.stage2 if s.index == c.index and s.rep == c.rep), None)
        if survivor is not None:
            fp = herd_fingerprint(survivor.herd(reps, F), clf)
            line = f"{c.rep} {c.record.hex()} {kappa:x} stage=2 {json.dumps(fp.summary(), sort_keys=True)}"
        report.append(line)
    out = d / f"survivors-k{kappa:x}.txt"
    out.write_text("\n".join(report) + ("\n" if report else ""))
    man.produce(out)
    man.counters = {"store_size": len(S), "stage1": len(res.stage1), "stage2": len(res.stage2), "per_rep": res.per_rep}
    man.wall_seconds, man.cpu_seconds = round(t.wall, 2), round(t.cpu, 2)
    man.write(d / f"manifest-herd-search-k{kappa:x}.json")
    print(f"stage-1={len(res.stage1)} stage-2={len(res.stage2)} -> {out}")
    return 0


def _herd_arg(spec: str, F: GF2e):
    from .herd import Herd, named_herd

    if spec in ("classical", "subiaco", "adelaide"):
        return named_herd(F, spec)
    return Herd.from_text(Path(spec).read_text(), F)


def _classifier(F: GF2e):
    from .herd import OvalClassifier

    path = artifact_dir(F) / "oval_classes.txt"
    return OvalClassifier(F, read_oval_classes(path, F) if path.exists() else [])


def cmd_fingerprint(args) -> int:
    from .herd import herd_fingerprint, is_herd

    F = _field(args)
    H = _herd_arg(args.herd, F)
    if not is_herd(H.f0, H.finf, H.kappa, F):
        print("FAIL not a herd")
        return 1
    print(json.dumps(herd_fingerprint(H, _classifier(F)).summary(), sort_keys=True))
    return 0


def cmd_herd_isomorphic(args) -> int:
    from .herd import herds_isomorphic

    F = _field(args)
    H1, H2 = _herd_arg(args.herd1, F), _herd_arg(args.herd2, F)
    iso = herds_isomorphic(H1, H2, _classifier(F))
    if iso is None:
        print("not isomorphic")
        return 1
    print(f"isomorphic psi={iso.psi.as_tuple()} perm={list(iso.perm)}")
    return 0


def cmd_gq_check(args) -> int:
    from .gq import build_gq, build_t2, verify_gq
    from .opoly import sqrt_table
    from .qclan import classical_qclan

    F = _field(args)
    if args.kind == "clan":
        C = _read_clan(args.file, F) if args.file else classical_qclan(F)
        S, order = build_gq(C), (F.q * F.q, F.q)
    else:
        S, order = build_t2(oval_points(sqrt_table(F), F)), (F.q, F.q)
    res = verify_gq(S, *order)
    if args.export:
        Path(args.export).write_text(S.to_text())
    p, l = S.counts
    print(f"{'PASS' if res else 'FAIL'} points={p} lines={l}" + ("" if res else f" axiom={res.axiom}: {res.detail}"))
    return 0 if res else 1


def cmd_census(args) -> int:
    from .plane import hyperoval_census, set_stabilizer

    F = _field(args)
    hyps = hyperoval_census(F)
    orders = [set_stabilizer(H).order for H in hyps]
    print(f"{len(hyps)} hyperovals up to equivalence, stabilizer orders {orders}")
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, required=True)
    common.add_argument("--field-poly", help="reduction polynomial in hex (default: Conway)")
    common.add_argument("--kappa", help="trace-1 element in hex (default: smallest)")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--checkpoint-dir")
    common.add_argument("--resume", action="store_true")

    p = argparse.ArgumentParser(prog="herdflock", description="Flocks of the quadratic cone via herds of ovals.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("field-info", cmd_field_info, "field parameters")
    sp = add("make-family", cmd_make_family, "write a named q-clan")
    sp.add_argument("--family", choices=["classical", "subiaco", "adelaide"], required=True)
    sp.add_argument("--auto", action="store_true", help="choose parameters automatically")
    sp.add_argument("--delta")
    sp.add_argument("--beta", help="element of GF(q^2), encoded u | v << e, in hex")
    sp.add_argument("--m", type=int)
    sp.add_argument("--out")
    add("verify-qclan", cmd_verify_qclan, "check the q-clan condition").add_argument("file")
    add("flock-check", cmd_flock_check, "check the flock geometrically").add_argument("file")
    sp = add("stabilizer", cmd_stabilizer, "stabilizer of the oval D(f)")
    sp.add_argument("--opoly", help="comma-separated hex coefficients of t^1..t^(q-1)")
    sp.add_argument("--family", choices=["classical", "subiaco", "adelaide"])
    add("oval-classes", cmd_oval_classes, "oval classes from hyperovals").add_argument(
        "--hyperovals", choices=["known", "census"], default="known"
    )
    add("build-store", cmd_build_store, "magic-orbit union of the oval classes")
    add("store-query", cmd_store_query, "store cardinality or membership").add_argument("--opoly")
    add("herd-search", cmd_herd_search, "two-stage (f0, f_inf) search")
    add("fingerprint", cmd_fingerprint, "member stabilizers and classes").add_argument(
        "herd", help="classical, subiaco, adelaide or a herd file"
    )
    sp = add("herd-isomorphic", cmd_herd_isomorphic, "magic-action isomorphism of two herds")
    sp.add_argument("herd1")
    sp.add_argument("herd2")
    sp = add("gq-check", cmd_gq_check, "build and verify a generalized quadrangle")
    sp.add_argument("--kind", choices=["clan", "t2"], default="clan")
    sp.add_argument("--file", help="q-clan file (default: classical)")
    sp.add_argument("--export", help="write the incidence structure here")
    add("census", cmd_census, "exhaustive hyperoval census (q <= 8)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
