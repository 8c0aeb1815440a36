"""Command line entry point: build, check, robust-search, simulate, distance, expansion."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chain, codes, decoders, gf2, groups, robustness
from .cayley_complex import LeftRightComplex, build_complex, m0_m1_check

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


def _field(cfg: dict, path: str, kind=None, default=...):
    cur = cfg
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if default is not ...:
                return default
            raise ConfigError(f"missing field '{path}'")
        cur = cur[part]
    if kind is not None and not isinstance(cur, kind):
        raise ConfigError(f"field '{path}' should be {getattr(kind, '__name__', kind)}, got {type(cur).__name__}")
    return cur


def parse_config(source) -> dict:
    if isinstance(source, dict):
        cfg = source
    else:
        text = Path(source).read_text()
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if _field(cfg, "version", int) != CONFIG_VERSION:
        raise ConfigError(f"field 'version' must be {CONFIG_VERSION}")
    kind = _field(cfg, "group.type", str)
    if kind not in ("cyclic", "psl2", "lps"):
        raise ConfigError(f"field 'group.type' must be cyclic, psl2 or lps, got {kind!r}")
    for side in ("A", "B"):
        entry = _field(cfg, f"codes.{side}", dict)
        if "H" not in entry and "random" not in entry:
            raise ConfigError(f"field 'codes.{side}' needs 'H' or 'random'")
    return cfg


@dataclass
class Instance:
    config: dict
    group: groups.FiniteGroup
    A: groups.GeneratorSet
    B: groups.GeneratorSet
    cx: LeftRightComplex
    CA: codes.LinearCode
    CB: codes.LinearCode
    x: chain.ChainComplex

    @property
    def cap(self) -> int:
        return int(self.config.get("cap", gf2.ENUM_CAP))


def _generators(cfg: dict, group, side: str, key: str) -> groups.GeneratorSet:
    kind = cfg["group"]["type"]
    if kind == "lps":
        if key in cfg:
            raise ConfigError(f"field '{key}' is derived for lps groups; remove it")
        return groups.lps_generators(_field(cfg, "group.p", int), _field(cfg, "group.q", int), side)
    elems = _field(cfg, key, list)
    if kind == "cyclic":
        n = group.order
        return groups.make_generators(group, [int(a) % n for a in elems], side)
    q = _field(cfg, "group.q", int)
    return groups.make_generators(group, [groups.psl2_element(q, m) for m in elems], side)


def _code(cfg: dict, side: str, delta: int) -> codes.LinearCode:
    entry = cfg["codes"][side]
    if "H" in entry:
        code = codes.from_parity_check(_field(cfg, f"codes.{side}.H", list))
    else:
        k = _field(cfg, f"codes.{side}.random.k", int)
        seed = _field(cfg, f"codes.{side}.random.seed", int)
        code = codes.sample_uniform(delta, k, np.random.default_rng(seed))
    if code.n != delta:
        raise ConfigError(f"field 'codes.{side}': code length {code.n} differs from generator count {delta}")
    return code


def load_instance(source) -> Instance:
    cfg = parse_config(source)
    kind = cfg["group"]["type"]
    if kind == "cyclic":
        group = groups.cyclic_group(_field(cfg, "group.n", int))
    else:
        group = groups.build_psl2(_field(cfg, "group.q", int))
    A = _generators(cfg, group, "left", "A")
    B = _generators(cfg, group, "right", "B")
    if len(A) != len(B):
        raise ConfigError(f"fields 'A' and 'B' must have the same size ({len(A)} vs {len(B)})")
    cx = build_complex(group, A, B)
    CA, CB = _code(cfg, "A", len(A)), _code(cfg, "B", len(B))
    return Instance(cfg, group, A, B, cx, CA, CB, chain.build_chain_complex(cx, CA, CB))


def _instance_from_args(args) -> Instance:
    path = Path(args.config)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if isinstance(data, dict) and "manifest_version" in data:
        return load_instance(data["config"])
    return load_instance(data)


def spectral(inst: Instance) -> tuple[groups.SpectralReport, groups.SpectralReport]:
    ga = groups.cayley_graph(inst.group, inst.A)
    gb = groups.cayley_graph(inst.group, inst.B)
    return groups.spectral_report(ga), groups.spectral_report(gb)


def _frac(v) -> str:
    if v is None:
        return "vacuous"
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return str(v)


def _dump(obj, out: Path | None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
    return text


# build


def manifest(inst: Instance) -> dict:
    x = inst.x
    dim = chain.dimension_and_rate(x)
    prof = x.ldpc_profile()
    ra, rb = spectral(inst)
    return {
        "manifest_version": 1,
        "config": inst.config,
        "group": {"name": inst.group.name, "order": inst.group.order},
        "generators": {"A": list(inst.A.elements), "B": list(inst.B.elements)},
        "sizes": {"faces": x.n_faces, "edge_bits": x.n_edge_bits, "vertex_bits": x.n_vertex_bits},
        "ldpc": {
            "d2_max_row": prof.d2_max_row, "d2_max_col": prof.d2_max_col,
            "d1_max_row": prof.d1_max_row, "d1_max_col": prof.d1_max_col,
            "coarse_ok": prof.coarse_ok(), "fine_ok": prof.fine_ok(),
        },
        "k": dim.k,
        "rate": str(dim.rate),
        "rate_lower_bound": str(dim.lower_bound),
        "lambda": {"A": ra.lam, "B": rb.lam, "bound": max(ra.lam_bound, rb.lam_bound)},
        "codes": {"HA": inst.CA.H.tolist(), "HB": inst.CB.H.tolist()},
    }


def cmd_build(args) -> int:
    inst = _instance_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    x = inst.x
    css = chain.css_code(x)
    files = {}
    for name, mat in (("d2", x.d2), ("d1", x.d1), ("hx", css.Hx), ("hz", css.Hz)):
        codes.write_alist(mat, out / f"{name}.alist")
        files[f"{name}.alist"] = name
    for name, mat in (("hx", css.Hx), ("hz", css.Hz)):
        codes.write_mtx(mat, out / f"{name}.mtx")
        files[f"{name}.mtx"] = name
    man = manifest(inst)
    man["files"] = sorted(files)
    _dump(man, out / "manifest.json")
    print(f"built {inst.group.name}: {x.n_faces} faces, {x.n_edge_bits} edge bits, k={man['k']} -> {out}")
    return 0


# check


def locate_chain_failure(x: chain.ChainComplex, d1: np.ndarray, d2: np.ndarray) -> tuple[int, int] | None:
    """(face, vertex) of the first nonzero entry of d1 d2, or None."""
    prod = gf2.matmul(d1, d2)
    if not prod.any():
        return None
    bit, face = (int(v) for v in np.argwhere(prod)[0])
    return face, bit // max(x.ma * x.mb, 1)


def run_checks(inst: Instance, d1=None, d2=None, seed: int = 0, samples: int = 500) -> list[tuple[str, bool, str]]:
    x = inst.x
    d1 = x.d1 if d1 is None else d1
    d2 = x.d2 if d2 is None else d2
    rows = []
    where = locate_chain_failure(x, d1, d2)
    rows.append(("chain condition", where is None, "" if where is None else f"face {where[0]}, vertex {where[1]}"))
    if d1 is not x.d1 or d2 is not x.d2:
        same = np.array_equal(d1, x.d1) and np.array_equal(d2, x.d2)
        rows.append(("stored maps match rebuild", same, ""))
    prof = x.ldpc_profile()
    rows.append(("ldpc 4D bound", prof.coarse_ok(), f"{prof}"))
    for name, ok in prof.fine_ok().items():
        rows.append((f"ldpc {name}", ok, ""))
    dim = chain.dimension_and_rate(x)
    ok = dim.k >= x.n_edge_bits - x.n_faces - x.n_vertex_bits and dim.bound_holds
    rows.append(("dimension and rate", ok, f"k={dim.k} rate={dim.rate} bound={dim.lower_bound}"))
    full = gf2.rank(x.HA) == x.ma and gf2.rank(x.HB) == x.mb
    if full:
        rows.append(("local exactness", robustness.local_complex(x.HA, x.HB).exactness_check(), ""))
    else:
        rows.append(("local exactness", True, "skipped: check matrices are rank deficient"))
    rng = np.random.default_rng(seed)
    reports = spectral(inst)
    for side, rep in zip("AB", reports):
        graph = groups.cayley_graph(inst.group, inst.A if side == "A" else inst.B)
        mix = groups.mixing_check(graph, rep, samples, rng)
        rows.append((f"mixing {side}", mix.passed, f"violations={mix.violations} worst={mix.worst_slack:.4g}"))
    lam = max(r.lam_bound for r in reports)
    quad = m0_m1_check(inst.cx, lam, samples, rng)
    rows.append(("edge quadratic forms", quad.passed, f"violations={quad.violations}"))
    return rows


def cmd_check(args) -> int:
    inst = _instance_from_args(args)
    d1 = d2 = None
    folder = Path(args.config).parent
    if (folder / "d1.alist").exists() and (folder / "d2.alist").exists():
        d1 = codes.read_alist(folder / "d1.alist")
        d2 = codes.read_alist(folder / "d2.alist")
    rows = run_checks(inst, d1, d2, seed=args.seed)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return 0 if all(ok for _, ok, _ in rows) else 1


# robust-search

SEARCH_FIELDS = ["sample", "ka", "kb", "d1_A", "d1_B", "d1_A_dual", "d1_B_dual",
                 "d2", "d2_check", "d2_dual", "d2_dual_check", "score", "HA", "HB"]


def _hex_rows(H: np.ndarray) -> str:
    return ";".join("".join(map(str, row)) for row in H.tolist())


def robust_search(delta: int, ka: int, kb: int, samples: int, seed: int, cap: int = gf2.ENUM_CAP):
    rng = np.random.default_rng(seed)
    rows = []
    best = None
    for i in range(samples):
        CA, CB = codes.sample_uniform(delta, ka, rng), codes.sample_uniform(delta, kb, rng)
        DA, DB = codes.dual(CA), codes.dual(CB)
        d2 = robustness.robustness_exact(CA, CB, cap).d2
        d2c = robustness.agreement_test_parameter(CA, CB, cap)
        d2d = robustness.robustness_exact(DA, DB, cap).d2
        d2dc = robustness.agreement_test_parameter(DA, DB, cap)
        if d2 != d2c or d2d != d2dc:
            raise AssertionError(f"sample {i}: robustness oracles disagree ({d2} vs {d2c}, {d2d} vs {d2dc})")
        vals = [CA.d1, CB.d1, DA.d1, DB.d1, d2, d2d]
        score = None if any(v is None for v in vals) else min(vals)
        row = {"sample": i, "ka": ka, "kb": kb,
               "d1_A": _frac(CA.d1), "d1_B": _frac(CB.d1), "d1_A_dual": _frac(DA.d1), "d1_B_dual": _frac(DB.d1),
               "d2": _frac(d2), "d2_check": _frac(d2c), "d2_dual": _frac(d2d), "d2_dual_check": _frac(d2dc),
               "score": _frac(score), "HA": _hex_rows(CA.H), "HB": _hex_rows(CB.H)}
        rows.append(row)
        if score is not None and (best is None or score > best[0]):
            best = (score, row)
    return rows, (None if best is None else best[1])


def cmd_robust_search(args) -> int:
    if args.k is not None:
        ka = kb = args.k
    else:
        ka, kb = round(args.rho_a * args.delta), round(args.rho_b * args.delta)
    rows, best = robust_search(args.delta, ka, kb, args.samples, args.seed, args.cap)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SEARCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _write_text(buf.getvalue(), args.out)
    print("best:", json.dumps(best, sort_keys=True) if best else "none (all pairs vacuous)", file=sys.stderr)
    return 0


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# simulate

SIM_FIELDS = ["trial", "error_weight", "syndrome_weight", "decoder", "success", "flips_evaluated", "wall_ns"]


def sample_error(n: int, channel: dict, rng: np.random.Generator) -> np.ndarray:
    e = np.zeros(n, dtype=np.uint8)
    model = channel.get("model", "fixed-weight")
    if model == "fixed-weight":
        w = int(channel.get("w", 1))
        if w > n:
            raise ConfigError(f"field 'channel.w' = {w} exceeds {n} bits")
        e[rng.choice(n, w, replace=False)] = 1
    elif model == "iid":
        e[:] = rng.random(n) < float(channel["p"])
    else:
        raise ConfigError(f"field 'channel.model' must be fixed-weight or iid, got {model!r}")
    return e


class Simulator:
    def __init__(self, inst: Instance, decoder: str, timing: bool = False):
        self.inst, self.decoder, self.timing = inst, decoder, timing
        x = inst.x
        if decoder == "reconstruct":
            self.x_dual = chain.dual_complex(inst.cx, inst.CA, inst.CB)
        else:
            self.codec = decoders.CoDecoder(x, inst.cap)

    def trial(self, index: int, channel: dict, seed: int) -> dict:
        x = self.inst.x
        rng = np.random.default_rng([seed, index])
        err = sample_error(x.n_edge_bits, channel, rng)
        if self.decoder == "reconstruct":
            syn = x.boundary(err, 1)
            res = decoders.decode_reconstruct(x, self.x_dual, syn)
            ok = res.success and decoders.verify_correction(x, res.correction, err, "chain")
            evals = res.co_decoder.evaluations if res.co_decoder else 0
            wall = res.co_decoder.wall_ns if res.co_decoder else 0
        else:
            syn = x.coboundary(err, 1)
            run = self.codec.decode_simple if self.decoder == "simple" else self.codec.decode_queue
            res = run(syn)
            ok = res.success and decoders.verify_correction(x, res.correction, err, "cochain")
            evals, wall = res.evaluations, res.wall_ns
        return {"trial": index, "error_weight": int(err.sum()), "syndrome_weight": int(syn.sum()),
                "decoder": self.decoder, "success": int(ok), "flips_evaluated": int(evals),
                "wall_ns": int(wall) if self.timing else 0}


def linear_fit(xs, ys) -> tuple[float, float]:
    """Least squares slope and R^2 (R^2 is 1 for a constant response)."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if xs.size < 2 or np.ptp(xs) == 0:
        return 0.0, 1.0
    slope, icpt = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + icpt)
    tot = ((ys - ys.mean()) ** 2).sum()
    return float(slope), float(1 - (resid**2).sum() / tot) if tot > 0 else 1.0


def simulate(inst: Instance, channel: dict, decoder: str, trials: int, seed: int, threads: int = 1, timing: bool = False):
    sim = Simulator(inst, decoder, timing)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda i: sim.trial(i, channel, seed), range(trials)))
    else:
        rows = [sim.trial(i, channel, seed) for i in range(trials)]
    slope, r2 = linear_fit([r["syndrome_weight"] for r in rows], [r["flips_evaluated"] for r in rows])
    summary = {
        "decoder": decoder, "trials": trials,
        "success_rate": sum(r["success"] for r in rows) / trials if trials else 1.0,
        "mean_flips_evaluated": float(np.mean([r["flips_evaluated"] for r in rows])) if rows else 0.0,
        "slope": slope, "r2": r2,
    }
    return rows, summary


def cmd_simulate(args) -> int:
    inst = _instance_from_args(args)
    channel = inst.config.get("channel", {"model": "fixed-weight", "w": 1})
    rows, summary = simulate(inst, channel, args.decoder, args.trials, args.seed, args.threads, args.timing)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SIM_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _write_text(buf.getvalue(), args.out)
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


# distance


def _systole_json(s: chain.Systole) -> dict:
    def support(w):
        return None if w is None else np.flatnonzero(w).tolist()

    return {"hamming": s.hamming, "cell": s.cell,
            "hamming_witness": support(s.hamming_witness), "cell_witness": support(s.cell_witness)}


def cmd_distance(args) -> int:
    inst = _instance_from_args(args)
    rep = chain.quantum_distance_exact(inst.x, args.cap or inst.cap)
    _dump({"k": rep.k, "dx": _systole_json(rep.dx), "dz": _systole_json(rep.dz)}, Path(args.out) if args.out else None)
    return 0


# expansion


def expansion_parameters(inst: Instance, cap: int) -> tuple[float, float, Fraction | None]:
    """Spectral bound and the dual-code distance and robustness the inequality uses."""
    DA, DB = codes.dual(inst.CA), codes.dual(inst.CB)
    lam = max(r.lam_bound for r in spectral(inst))
    d1 = min(DA.d1, DB.d1)
    d2 = robustness.robustness_exact(DA, DB, cap).d2
    return lam, d1, d2


def cmd_expansion(args) -> int:
    inst = _instance_from_args(args)
    over = inst.config.get("expansion", {})
    lam, d1, d2 = expansion_parameters(inst, args.cap or inst.cap)
    lam = args.lam if args.lam is not None else over.get("lam", lam)
    d1 = args.d1 if args.d1 is not None else over.get("d1", d1)
    d2 = args.d2 if args.d2 is not None else over.get("d2", d2)
    if d2 is None or math.isinf(d1):
        raise ConfigError("expansion needs finite d1 and a non-vacuous d2; override with --d1/--d2")
    # via the decimal string, so 1.000001 stays 1000001/1000000
    lam, d1 = Fraction(str(lam)), Fraction(str(d1))
    probe = chain.expansion_probe(inst.x, lam, d1, d2, args.samples, np.random.default_rng(args.seed))
    _dump({
        "lam": float(lam), "d1": float(d1), "d2": str(d2),
        "eta": str(probe.eta), "linear": str(probe.linear), "quadratic": str(probe.quadratic),
        "applicable": probe.applicable, "samples": probe.samples, "violations": probe.violations,
        "worst_slack": probe.worst_slack, "rows": [list(r) for r in probe.rows],
    }, Path(args.out) if args.out else None)
    return 0


# entry


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrcc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="run config or instance manifest (JSON)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--cap", type=int, default=None, help=f"enumeration cap (default {gf2.ENUM_CAP})")
        sp.add_argument("--out", default=None)
        sp.add_argument("--threads", type=int, default=1)
        return sp

    b = common(sub.add_parser("build", help="build an instance and export matrices"))
    b.set_defaults(func=cmd_build, out="instance")
    common(sub.add_parser("check", help="run validity checks")).set_defaults(func=cmd_check)

    r = common(sub.add_parser("robust-search", help="sample code pairs and compute exact robustness"), config=False)
    r.add_argument("--delta", type=int, required=True)
    r.add_argument("--k", type=int, default=None)
    r.add_argument("--rho-a", type=float, default=0.5)
    r.add_argument("--rho-b", type=float, default=0.5)
    r.add_argument("--samples", type=int, default=50)
    r.set_defaults(func=cmd_robust_search)

    s = common(sub.add_parser("simulate", help="decode sampled errors"))
    s.add_argument("--decoder", choices=["simple", "queue", "reconstruct"], default="queue")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--timing", action="store_true", help="record wall_ns (breaks byte-identical output)")
    s.set_defaults(func=cmd_simulate)

    common(sub.add_parser("distance", help="exact quantum distances")).set_defaults(func=cmd_distance)

    e = common(sub.add_parser("expansion", help="probe the co-expansion inequality"))
    e.add_argument("--samples", type=int, default=20)
    e.add_argument("--lam", type=float, default=None)
    e.add_argument("--d1", type=float, default=None)
    e.add_argument("--d2", type=Fraction, default=None)
    e.set_defaults(func=cmd_expansion)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "cap", None) is None and args.command == "robust-search":
        args.cap = gf2.ENUM_CAP
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (groups.ClosureError, groups.RegularityError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
