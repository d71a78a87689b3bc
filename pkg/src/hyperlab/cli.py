"""Experiment runner tying the library together behind one console command.

Subcommands: density, orbit, construct-fhc, check, hardy, schatten.  Each
run reads an optional YAML manifest (flags override file values), executes
one experiment, and writes a canonical JSON report plus optional CSV
artifacts into the output directory.  Reports embed the manifest hash and
every finitization parameter (horizons, grids, tolerances), never a
timestamp, so a fixed seed reproduces identical bytes.

Exit codes: 0 on success, 2 when a checker or verification reports a
violation, 1 for usage or runtime errors (malformed manifests carry a
line:column anchor when the parser provides one).

Small grammars used by the flags, also accepted in manifests:

  complex     "re" or "re:im"                    e.g. "2" or "1:-0.5"
  weights     "name=kind:args[@N|@Z];..."        kinds and args:
                constant:VALUE
                ratio:n0,n1,..|d0,d1,..          ascending-power coefficients
                table:START|v1,v2,..|[DEFAULT]
                step:SPLIT|LOW|HIGH              (domain defaults to Z)
  vector      "idx[=VALUE],..."                  e.g. "0" or "0,1" or "3=1:1"
  vectors     vector "|" vector "|" ...
  symbol      comma list of complex coefficients, ascending powers
  range       "lo:hi" (inclusive)
  set         "squares" | "evens" | "multiples:K" | "file:PATH"
  beta        "hardy" | "inv_linear" | "table:PATH" (one value per line)
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .checkers import (CheckGrid, check_bilateral_growth_decay,
                       check_diagonal_forward_summability,
                       check_schatten_summability, check_unilateral_growth)
from .density import NatSet, density_to_csv, natset_from_lines, q_lower_density
from .fhc import (BackwardOrbitFamily, CriterionFailure, EpsSchedule,
                  assemble_vector, build_separated_family, find_tail_threshold,
                  verify_q_frequent_visits, verify_separated_family)
from .hardy import (AnalyticSymbol, BetaSpace, adjoint_kernel_eigencheck,
                    conjugation_eigencheck, converse_certificate,
                    nuclear_eigencheck, span_density_residual,
                    unimodular_locus_sample)
from .matops import MatOp, schatten_norm, shift_matrix, singular_values, spectrum_to_csv
from .seqspace import (Domain, SeqVector, ShiftOp, WeightSeq, iterate_orbit,
                       lp_norm)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2

_EXPERIMENTS = ("density", "orbit", "construct_fhc", "check", "hardy", "schatten")


class ConfigError(Exception):
    """Manifest or flag problem; rendered to stderr and mapped to exit 1."""


# -- small grammars ---------------------------------------------------------

def parse_complex(tok: str) -> complex:
    parts = str(tok).strip().split(":")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"bad complex literal {tok!r} (expected re or re:im)")


def _parse_domain_suffix(rule: str) -> tuple[str, Domain | None]:
    if rule.endswith("@N"):
        return rule[:-2], Domain.NATURALS
    if rule.endswith("@Z"):
        return rule[:-2], Domain.INTEGERS
    return rule, None


def parse_weight_rule(rule: str) -> WeightSeq:
    rule, domain = _parse_domain_suffix(rule.strip())
    kind, _, args = rule.partition(":")
    if not args:
        raise ConfigError(f"weight rule {rule!r} is missing arguments")
    if kind == "constant":
        return WeightSeq.constant(parse_complex(args),
                                  domain or Domain.NATURALS)
    if kind == "ratio":
        try:
            num_s, den_s = args.split("|")
            num = [float(c) for c in num_s.split(",")]
            den = [float(c) for c in den_s.split(",")]
        except ValueError:
            raise ConfigError(f"bad ratio arguments {args!r} "
                              "(expected n0,n1,..|d0,d1,..)") from None
        return WeightSeq.ratio(num, den, domain or Domain.NATURALS)
    if kind == "table":
        parts = args.split("|")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad table arguments {args!r} "
                              "(expected START|v1,v2,..|[DEFAULT])")
        try:
            start = int(parts[0])
        except ValueError:
            raise ConfigError(f"bad table start {parts[0]!r}") from None
        values = [parse_complex(v) for v in parts[1].split(",")]
        default = None
        if len(parts) == 3 and parts[2].strip():
            default = parse_complex(parts[2])
        return WeightSeq.table(values, start, default, domain or Domain.NATURALS)
    if kind == "step":
        parts = args.split("|")
        if len(parts) != 3:
            raise ConfigError(f"bad step arguments {args!r} "
                              "(expected SPLIT|LOW|HIGH)")
        try:
            split = int(parts[0])
        except ValueError:
            raise ConfigError(f"bad step split {parts[0]!r}") from None
        return WeightSeq.step(parse_complex(parts[1]), parse_complex(parts[2]),
                              split, domain or Domain.INTEGERS)
    raise ConfigError(f"unknown weight kind {kind!r}")


def parse_weight_spec(text: str) -> dict:
    out = {}
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, eq, rule = chunk.partition("=")
        if not eq:
            raise ConfigError(f"weight entry {chunk!r} is missing '='")
        out[name.strip()] = parse_weight_rule(rule)
    if not out:
        raise ConfigError("no weight rules given")
    return out


def parse_vector(text: str, domain: Domain = Domain.NATURALS,
                 p: float = 2.0) -> SeqVector:
    entries = {}
    for term in str(text).split(","):
        term = term.strip()
        if not term:
            continue
        idx_s, eq, val_s = term.partition("=")
        try:
            idx = int(idx_s)
        except ValueError:
            raise ConfigError(f"bad vector index {idx_s!r}") from None
        entries[idx] = parse_complex(val_s) if eq else 1.0 + 0.0j
    if not entries:
        raise ConfigError(f"empty vector literal {text!r}")
    return SeqVector(entries, domain, p)


def parse_vectors(text: str, domain: Domain = Domain.NATURALS,
                  p: float = 2.0) -> list:
    return [parse_vector(part, domain, p) for part in str(text).split("|")]


def parse_symbol(text: str) -> AnalyticSymbol:
    coeffs = [parse_complex(tok) for tok in str(text).split(",") if tok.strip()]
    if not coeffs:
        raise ConfigError(f"empty symbol literal {text!r}")
    return AnalyticSymbol.from_coeffs(coeffs)


def parse_range(text: str) -> tuple:
    lo_s, sep, hi_s = str(text).partition(":")
    try:
        lo = int(lo_s)
        hi = int(hi_s) if sep else lo
    except ValueError:
        raise ConfigError(f"bad range {text!r} (expected lo:hi)") from None
    if hi < lo:
        raise ConfigError(f"empty range {text!r}")
    return tuple(range(lo, hi + 1))


def build_natset(spec: str, horizon: int) -> NatSet:
    spec = str(spec).strip()
    if spec == "squares":
        elems = []
        n = 1
        while n * n <= horizon:
            elems.append(n * n)
            n += 1
        return NatSet(tuple(elems), horizon)
    if spec == "evens":
        return NatSet(tuple(range(2, horizon + 1, 2)), horizon)
    if spec.startswith("multiples:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad multiples spec {spec!r}") from None
        if k < 1:
            raise ConfigError("multiples stride must be >= 1")
        return NatSet(tuple(range(k, horizon + 1, k)), horizon)
    if spec.startswith("file:"):
        path = Path(spec.split(":", 1)[1])
        try:
            return natset_from_lines(path.read_text())
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror or e}") from None
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from None
    raise ConfigError(f"unknown set spec {spec!r}")


def build_beta_space(spec: str, dim: int) -> BetaSpace:
    spec = str(spec).strip()
    if spec == "hardy":
        return BetaSpace.hardy(dim)
    if spec == "inv_linear":
        return BetaSpace.inv_linear(dim)
    if spec.startswith("table:"):
        path = Path(spec.split(":", 1)[1])
        try:
            values = [float(ln) for ln in path.read_text().split()]
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror or e}") from None
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from None
        if len(values) < dim + 1:
            raise ConfigError(f"{path}: table holds {len(values)} values, "
                              f"need {dim + 1}")
        rule = WeightSeq.table(values, start=0)
        return BetaSpace(rule, dim)
    raise ConfigError(f"unknown basis-weight spec {spec!r}")


_SHIFT_BUILDERS = {
    "backward": ShiftOp.backward,
    "forward": ShiftOp.forward,
    "bilateral-backward": ShiftOp.bilateral_backward,
    "bilateral-forward": ShiftOp.bilateral_forward,
    "diagonal": ShiftOp.diagonal,
}


def build_shift(kind: str, w: WeightSeq) -> ShiftOp:
    try:
        builder = _SHIFT_BUILDERS[str(kind)]
    except KeyError:
        raise ConfigError(f"unknown operator kind {kind!r} (choose from "
                          f"{', '.join(sorted(_SHIFT_BUILDERS))})") from None
    try:
        return builder(w)
    except ValueError as e:
        raise ConfigError(str(e)) from None


# -- manifests and reports --------------------------------------------------

def load_config(path: str) -> tuple[dict, str]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror or e}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is not None:
            problem = getattr(e, "problem", "invalid syntax")
            raise ConfigError(
                f"{path}:{mark.line + 1}:{mark.column + 1}: {problem}") from None
        raise ConfigError(f"{path}: {e}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data, hashlib.sha256(text.encode()).hexdigest()


def to_jsonable(obj):
    """Canonical JSON shadow: dataclasses to dicts, complex to re/im pairs,
    enums to values, non-finite floats to strings."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in obj]
    return repr(obj)


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _hash_params(params: dict) -> str:
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()


def _write_report(outdir: Path, name: str, report: dict) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}_report.json"
    path.write_text(canonical_json(report))
    return path


# -- experiment handlers ----------------------------------------------------

def _run_density(p: dict, outdir: Path, fmt: str, seed: int):
    spec = p.get("set", "squares")
    q = float(p.get("q", 1))
    n_max = int(p.get("n_max", 1000))
    tail_start = p.get("tail_start")
    horizon = max(1, math.ceil(n_max ** q))
    A = build_natset(spec, horizon)
    est = q_lower_density(A, q, n_max,
                          None if tail_start is None else int(tail_start))
    params = {"set": str(spec), "q": q, "n_max": n_max,
              "tail_start": est.tail_start, "set_horizon": A.horizon}
    last_n, last_count, last_ratio = est.profile[-1]
    results = {"liminf_proxy": est.liminf_proxy, "element_count": len(A.elems),
               "final": {"N": last_n, "count": last_count, "ratio": last_ratio}}
    if fmt == "csv":
        with open(outdir / "density.csv", "w") as fh:
            density_to_csv(est, fh)
    return EXIT_OK, params, results


def _run_orbit(p: dict, outdir: Path, fmt: str, seed: int):
    weights = parse_weight_spec(p.get("weights", "w=constant:2"))
    if "w" not in weights:
        raise ConfigError("orbit needs a weight rule named 'w'")
    op = build_shift(p.get("op", "backward"), weights["w"])
    norm_p = float(p.get("p", 2))
    start = parse_vector(p.get("start", "0"), op.domain, norm_p)
    horizon = int(p.get("horizon", 64))
    stride = int(p.get("stride_exponent", 1))
    rows = []
    for step, x in enumerate(iterate_orbit(op, start, horizon, stride), start=1):
        time = step ** stride
        rows.append((time, lp_norm(x, norm_p), len(x)))
    params = {"weights": str(p.get("weights", "w=constant:2")),
              "op": str(p.get("op", "backward")), "start": str(p.get("start", "0")),
              "horizon": horizon, "stride_exponent": stride, "p": norm_p}
    results = {"points": len(rows),
               "final_norm": rows[-1][1] if rows else lp_norm(start, norm_p),
               "max_norm": max((r[1] for r in rows), default=0.0),
               "final_support": rows[-1][2] if rows else len(start)}
    if fmt == "csv":
        with open(outdir / "orbit.csv", "w") as fh:
            fh.write("time,norm,support\n")
            for time, nv, sup in rows:
                fh.write(f"{time},{nv!r},{sup}\n")
    return EXIT_OK, params, results


def _run_construct_fhc(p: dict, outdir: Path, fmt: str, seed: int):
    weights = parse_weight_spec(p.get("weights", "w=constant:2"))
    if "w" not in weights:
        raise ConfigError("construction needs a weight rule named 'w'")
    kind = p.get("op", "backward")
    if kind not in ("backward", "bilateral-backward"):
        raise ConfigError("construction runs on backward-type operators")
    op = build_shift(kind, weights["w"])
    q = int(p.get("q", 1))
    targets = parse_vectors(p.get("targets", "0|0,1"), op.domain)
    horizon = int(p.get("horizon", 10_000))
    sched = EpsSchedule(float(p.get("eps_scale", 1.0)),
                        float(p.get("eps_base", 0.5)))
    family = BackwardOrbitFamily(op, tuple(targets))
    K = family.num_classes
    n_ks = [find_tail_threshold(family, op, k, q, sched, seed=seed)
            for k in range(1, K + 1)]
    J = build_separated_family(n_ks, K, horizon)
    sep = verify_separated_family(J)
    x = assemble_vector(family, J, q)
    radii = [k * sched.eps(k) + sum(sched.eps(j) for j in range(k + 1, K + 1))
             for k in range(1, K + 1)]
    reports = verify_q_frequent_visits(op, x, family, J, q, radii, eps=sched)
    ok = sep.ok and all(r.contained and r.density_ratio > 0.0 for r in reports)
    params = {"weights": str(p.get("weights", "w=constant:2")), "op": str(kind),
              "q": q, "targets": str(p.get("targets", "0|0,1")),
              "horizon": horizon, "eps": sched.describe(), "seed": seed}
    results = {
        "thresholds": n_ks,
        "separation": to_jsonable(sep),
        "vector_support": len(x),
        "classes": [
            {"k": r.k, "radius": r.radius, "designed_count": r.designed_count,
             "designed_within": r.designed_within, "contained": r.contained,
             "max_designed_distance": r.max_designed_distance,
             "designed_density": r.designed_density,
             "visit_density": r.visit_density,
             "density_ratio": r.density_ratio, "truncated": r.truncated}
            for r in reports
        ],
    }
    if fmt == "csv":
        with open(outdir / "visit_times.csv", "w") as fh:
            fh.write("class,time\n")
            for r in reports:
                for t in r.visit_times.elems:
                    fh.write(f"{r.k},{t}\n")
    return (EXIT_OK if ok else EXIT_VIOLATION), params, results


def _build_check_grid(p: dict, bilateral: bool) -> CheckGrid:
    if bilateral:
        base = CheckGrid.bilateral_default(q=int(p.get("q", 1)))
    else:
        base = CheckGrid.unilateral_default(q=int(p.get("q", 1)))
    i_range = parse_range(p["i_range"]) if "i_range" in p else base.i_range
    j_range = parse_range(p["j_range"]) if "j_range" in p else base.j_range
    return CheckGrid(
        i_range, j_range,
        r_max=int(p.get("r_max", base.r_max)),
        n_max=int(p.get("n_max", base.n_max)),
        q=int(p.get("q", 1)),
        growth_threshold=float(p.get("growth_threshold", base.growth_threshold)),
        tail_tolerance=float(p.get("tail_tolerance", base.tail_tolerance)),
    )


def _run_check(p: dict, outdir: Path, fmt: str, seed: int):
    condition = str(p.get("condition", "growth"))
    weights = parse_weight_spec(p.get("weights", "w=constant:2;mu=constant:2"))
    try:
        if condition == "growth":
            grid = _build_check_grid(p, bilateral=False)
            verdict = check_unilateral_growth(weights["w"], weights["mu"], grid)
        elif condition == "bilateral":
            grid = _build_check_grid(p, bilateral=True)
            verdict = check_bilateral_growth_decay(weights["w"], weights["mu"], grid)
        elif condition == "schatten":
            w = weights["w"]
            grid = _build_check_grid(p, bilateral=w.domain is Domain.INTEGERS)
            verdict = check_schatten_summability(w, weights["mu"],
                                                float(p.get("p", 2)), grid)
        elif condition == "diagonal":
            grid = _build_check_grid(p, bilateral=False)
            verdict = check_diagonal_forward_summability(
                weights["lam"], weights["mu"], float(p.get("p", 2)), grid)
        else:
            raise ConfigError(f"unknown condition {condition!r} (choose from "
                              "growth, bilateral, schatten, diagonal)")
    except KeyError as e:
        raise ConfigError(f"condition {condition!r} needs a weight rule "
                          f"named {e.args[0]!r}") from None
    params = {"condition": condition,
              "weights": str(p.get("weights", "w=constant:2;mu=constant:2")),
              "grid": to_jsonable(grid)}
    if "p" in p or condition in ("schatten", "diagonal"):
        params["p"] = float(p.get("p", 2))
    results = {"verdict": verdict.as_json_dict()}
    return (EXIT_OK if verdict.satisfied else EXIT_VIOLATION), params, results


def _run_hardy(p: dict, outdir: Path, fmt: str, seed: int):
    check = str(p.get("check", "eigen"))
    dim = int(p.get("dim", 64))
    phi = parse_symbol(p.get("phi", "0,1"))
    psi = parse_symbol(p.get("psi", "1"))
    params = {"check": check, "phi": str(p.get("phi", "0,1")),
              "psi": str(p.get("psi", "1")), "dim": dim,
              "beta": str(p.get("beta", "hardy"))}
    code = EXIT_OK
    if check == "eigen":
        space = build_beta_space(p.get("beta", "hardy"), dim)
        z = parse_complex(p.get("z", "0.5"))
        if "w" in p:
            w = parse_complex(p["w"])
            rep = conjugation_eigencheck(phi, psi, space, z, w)
            params["z"], params["w"] = to_jsonable(z), to_jsonable(w)
        else:
            rep = adjoint_kernel_eigencheck(phi, space, z)
            params["z"] = to_jsonable(z)
        results = {"report": to_jsonable(rep), "passed": rep.passed}
        code = EXIT_OK if rep.passed else EXIT_VIOLATION
    elif check == "locus":
        grid_density = int(p.get("grid_density", 16))
        tol = float(p.get("tol", 1e-3))
        exclude = tuple(parse_complex(t)
                        for t in str(p.get("exclude", "")).split(",") if t.strip())
        pts = unimodular_locus_sample(phi, psi, grid_density, tol, exclude)
        params.update({"grid_density": grid_density, "tol": tol,
                       "exclude": to_jsonable(exclude)})
        results = {"count": len(pts),
                   "points": to_jsonable(pts[:int(p.get("max_points", 128))])}
        if fmt == "csv":
            with open(outdir / "locus.csv", "w") as fh:
                fh.write("z_re,z_im,w_re,w_im,modulus\n")
                for pt in pts:
                    fh.write(f"{pt.z.real!r},{pt.z.imag!r},"
                             f"{pt.w.real!r},{pt.w.imag!r},{pt.modulus!r}\n")
    elif check == "density":
        space = build_beta_space(p.get("beta", "hardy"), dim)
        grid_density = int(p.get("grid_density", 16))
        tol = float(p.get("tol", 1e-3))
        samples = int(p.get("samples", 64))
        pts = unimodular_locus_sample(phi, psi, grid_density, tol)
        if not pts:
            raise ConfigError("the unimodular level set misses the scan grid; "
                              "no samples to span with")
        pts = sorted(pts, key=lambda q_: (round(q_.z.real, 12), round(q_.z.imag, 12),
                                          round(q_.w.real, 12), round(q_.w.imag, 12)))
        step = max(1, len(pts) // samples)
        chosen = pts[::step][:samples]
        target = _parse_target_matrix(p.get("target", "0,0"), dim)
        rep = span_density_residual(chosen, target, space)
        params.update({"grid_density": grid_density, "tol": tol,
                       "samples": len(chosen), "target": str(p.get("target", "0,0"))})
        results = {"report": to_jsonable(rep)}
    elif check == "converse":
        cert = converse_certificate(phi, psi, seed=seed)
        results = {"certificate": to_jsonable(cert)}
    elif check == "nuclear":
        lam = parse_complex(p.get("lam", "0.5"))
        mu = parse_complex(p.get("mu", "0.5"))
        rep = nuclear_eigencheck(phi, psi, lam, mu, float(p.get("p", 1)),
                                 dim=dim, seed=seed)
        params.update({"lam": to_jsonable(lam), "mu": to_jsonable(mu),
                       "p": float(p.get("p", 1))})
        results = {"report": to_jsonable(rep), "passed": rep.passed}
        code = EXIT_OK if rep.passed else EXIT_VIOLATION
    else:
        raise ConfigError(f"unknown hardy check {check!r} (choose from "
                          "eigen, locus, density, converse, nuclear)")
    return code, params, results


def _parse_target_matrix(spec: str, dim: int) -> MatOp:
    """Rank-one basis target "i,j" meaning e_i (x) e_j* on the truncation."""
    try:
        i_s, j_s = str(spec).split(",")
        i, j = int(i_s), int(j_s)
    except ValueError:
        raise ConfigError(f"bad target spec {spec!r} (expected i,j)") from None
    if not (0 <= i <= dim and 0 <= j <= dim):
        raise ConfigError(f"target indices {spec!r} escape the truncation")
    data = np.zeros((dim + 1, dim + 1), dtype=complex)
    data[i, j] = 1.0
    return MatOp(data)


def _run_schatten(p: dict, outdir: Path, fmt: str, seed: int):
    weights = parse_weight_spec(p.get("weights", "w=constant:2"))
    if "w" not in weights:
        raise ConfigError("schatten needs a weight rule named 'w'")
    op = build_shift(p.get("op", "backward"), weights["w"])
    window = p.get("window", "0:15")
    rng = parse_range(window)
    lo, hi = rng[0], rng[-1]
    ps = [float(t) for t in str(p.get("p", "1,2")).split(",") if t.strip()]
    mat = MatOp(shift_matrix(op, lo, hi), basis_offset=lo)
    spec = singular_values(mat)
    norms = {repr(pv): schatten_norm(mat, pv) for pv in ps}
    params = {"weights": str(p.get("weights", "w=constant:2")),
              "op": str(p.get("op", "backward")), "window": str(window),
              "p": str(p.get("p", "1,2"))}
    results = {"singular_values": [float(v) for v in spec.values],
               "sweeps": spec.sweeps, "converged": spec.converged,
               "schatten_norms": norms}
    if fmt == "csv":
        with open(outdir / "spectrum.csv", "w") as fh:
            spectrum_to_csv(spec, fh)
    return EXIT_OK, params, results


_HANDLERS = {
    "density": _run_density,
    "orbit": _run_orbit,
    "construct_fhc": _run_construct_fhc,
    "check": _run_check,
    "hardy": _run_hardy,
    "schatten": _run_schatten,
}


# -- argument plumbing ------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse insists on exit code 2 for usage problems; this runner
        # reserves 2 for checker violations, so reroute through ConfigError
        raise ConfigError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="YAML manifest; flags override its values")
    sub.add_argument("--out", help="output directory (default .)")
    sub.add_argument("--seed", type=int, help="64-bit seed for sampled steps")
    sub.add_argument("--format", choices=("json", "csv"),
                     help="also write CSV artifacts next to the JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperlab",
                     description="numerical experiments for orbit frequency, "
                                 "weight conditions, and kernel eigenchecks")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")

    sp = subs.add_parser("density", help="power-clock lower-density profile")
    sp.add_argument("--set", dest="set")
    sp.add_argument("--q", type=float)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--tail-start", dest="tail_start", type=int)

    sp = subs.add_parser("orbit", help="orbit norms of a weighted shift")
    sp.add_argument("--weights")
    sp.add_argument("--op")
    sp.add_argument("--start")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--stride-exponent", dest="stride_exponent", type=int)
    sp.add_argument("--p", type=float)

    sp = subs.add_parser("construct-fhc",
                         help="build and verify a frequent-orbit vector")
    sp.add_argument("--weights")
    sp.add_argument("--op")
    sp.add_argument("--q", type=int)
    sp.add_argument("--targets")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--eps-scale", dest="eps_scale", type=float)
    sp.add_argument("--eps-base", dest="eps_base", type=float)

    sp = subs.add_parser("check", help="finitized weight-condition checkers")
    sp.add_argument("--condition")
    sp.add_argument("--weights")
    sp.add_argument("--p", type=float)
    sp.add_argument("--i-range", dest="i_range")
    sp.add_argument("--j-range", dest="j_range")
    sp.add_argument("--r-max", dest="r_max", type=int)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--growth-threshold", dest="growth_threshold", type=float)
    sp.add_argument("--tail-tolerance", dest="tail_tolerance", type=float)

    sp = subs.add_parser("hardy", help="kernel-space eigenchecks and surveys")
    sp.add_argument("--beta")
    sp.add_argument("--phi")
    sp.add_argument("--psi")
    sp.add_argument("--check", dest="check")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--z")
    sp.add_argument("--w")
    sp.add_argument("--lam")
    sp.add_argument("--mu")
    sp.add_argument("--p", type=float)
    sp.add_argument("--grid-density", dest="grid_density", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--target")

    sp = subs.add_parser("schatten", help="singular spectrum of a shift window")
    sp.add_argument("--weights")
    sp.add_argument("--op")
    sp.add_argument("--window")
    sp.add_argument("--p")

    for name, sub in subs.choices.items():
        _add_common(sub)
    return parser


_COMMON_KEYS = {"config", "out", "seed", "format", "experiment"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.experiment is None:
            raise ConfigError("an experiment subcommand is required "
                              f"(one of: {', '.join(s.replace('_', '-') for s in _EXPERIMENTS)})")
        experiment = args.experiment.replace("-", "_")

        config, cfg_hash = ({}, None)
        if args.config:
            config, cfg_hash = load_config(args.config)
        section = config.get(experiment, {})
        if not isinstance(section, dict):
            raise ConfigError(f"manifest section {experiment!r} must be a mapping")
        declared = config.get("experiment")
        if declared is not None and str(declared).replace("-", "_") != experiment:
            raise ConfigError(f"manifest declares experiment {declared!r} but "
                              f"the {experiment.replace('_', '-')!r} subcommand was invoked")

        params = dict(section)
        for key, value in vars(args).items():
            if key in _COMMON_KEYS or value is None:
                continue
            params[key] = value

        out_cfg = config.get("output", {})
        outdir = Path(args.out or out_cfg.get("dir", "."))
        fmt = args.format or str(out_cfg.get("format", "json"))
        if fmt not in ("json", "csv"):
            raise ConfigError(f"unknown output format {fmt!r}")
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

        outdir.mkdir(parents=True, exist_ok=True)
        code, run_params, results = _HANDLERS[experiment](params, outdir, fmt, seed)
        report = {
            "experiment": experiment,
            "version": __version__,
            "seed": seed,
            "config_sha256": cfg_hash if cfg_hash is not None else _hash_params(run_params),
            "parameters": run_params,
            "results": results,
            "exit_code": code,
        }
        path = _write_report(outdir, experiment, report)
        print(path)
        return code
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CriterionFailure as e:
        print(f"error: construction failed: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
