"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 bad config or input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from . import estimators as est
from . import sampling as sm
from . import variation as vr
from .bases import unitary
from .classes import GenerativeRange, Subspace, UnsupportedClassError, class_from_json, class_tag
from .experiments import ConfigError, ExperimentConfig, run, write_outputs
from .hilbert import InnerProductSpace
from .io import (array_from_json, dump_json, matrix_to_csv_text, read_matrix_csv, read_vector_csv,
                 rows_to_csv_text)

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# Input loading

def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def load_space(path) -> InnerProductSpace | None:
    return InnerProductSpace.from_json(_load_json(path)) if path else None


def load_class(path, space=None):
    try:
        return class_from_json(_load_json(path), space, Path(path).parent)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed class file {path}: {exc}") from exc


def _unitary(spec, base_dir) -> np.ndarray:
    if isinstance(spec, dict) and "kind" in spec:
        return unitary(spec["kind"], int(spec["N"]))
    return array_from_json(spec, base_dir)


def family_from_json(data: dict, cls=None, base_dir=None) -> sm.SamplingFamily:
    """Build a family from {"kind": pointwise | rows | bernoulli | half_half, ...}.

    Probability specs may be a list, "uniform", or (for pointwise densities)
    "christoffel", which needs a subspace or union class.
    """
    kind = data.get("kind")
    m = int(data.get("m", 1))
    if kind == "pointwise":
        space = cls.space if cls is not None else InnerProductSpace.from_json(data["space"])
        dens = data.get("density", "uniform")
        if dens == "uniform":
            dist = sm.PointwiseDensity.uniform(space)
        elif dens == "christoffel":
            dist = vr.christoffel_density(vr.christoffel(cls))
        else:
            dist = sm.PointwiseDensity(space, array_from_json(dens, base_dir))
        return sm.SamplingFamily.repeat(dist, m)
    if kind in ("rows", "bernoulli", "half_half"):
        U = _unitary(data["U"], base_dir)
        pi = data.get("pi", "uniform")
        if kind == "half_half":
            tail = None if pi == "uniform" else array_from_json(pi, base_dir)
            return sm.build_half_half(U, int(data["m1"]), m, tail)
        pi = np.full(U.shape[0], 1.0 / U.shape[0]) if pi == "uniform" else array_from_json(pi, base_dir)
        if kind == "rows":
            return sm.SamplingFamily.repeat(sm.RowSampler(U, pi), m)
        return sm.build_bernoulli_family(U, pi, m)
    raise ConfigError(f"unknown family kind {kind!r}")


def _load_family(args, cls):
    if not args.family:
        raise UsageError("--family is required")
    return family_from_json(_load_json(args.family), cls, Path(args.family).parent)


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


# Output

def _emit(args, rows: list[dict], columns: list[str], payload=None) -> None:
    if args.format == "json":
        text = dump_json(payload if payload is not None else rows)
    else:
        text = rows_to_csv_text(rows, columns)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# Subcommands

def cmd_variation(args):
    cls = load_class(args.model, load_space(args.space))
    fam = _load_family(args, cls)
    rows = []
    ncs = fam.nonconstant_index_set
    phi = vr.variation(cls, fam).phi if ncs else 0.0
    rows.append({"quantity": "phi", "value": phi})
    try:
        a, b = sm.nondegeneracy_constants(fam, restrict_to=cls if isinstance(cls, Subspace) else None,
                                          space=cls.space)
        rows += [{"quantity": "alpha", "value": a}, {"quantity": "beta", "value": b}]
    except sm.DegenerateFamilyError:
        rows.append({"quantity": "alpha", "value": 0.0})
    rows.append({"quantity": "nonconstant_members", "value": len(ncs)})
    _emit(args, rows, ["quantity", "value"], {r["quantity"]: r["value"] for r in rows}
          | {"class": class_tag(cls)})


def cmd_leverage(args):
    tau = vr.leverage_scores(read_matrix_csv(args.matrix))
    rows = [{"row": i, "tau": float(t)} for i, t in enumerate(tau)]
    _emit(args, rows, ["row", "tau"], {"tau": tau, "sum": float(tau.sum())})


def cmd_christoffel(args):
    space = load_space(args.space_file)
    cls = load_class(args.model, space)
    prof = vr.christoffel(cls, space)
    nu = vr.christoffel_measure(prof)
    rows = [{"node": j, "K": float(k), "density": float(d)} for j, (k, d) in enumerate(zip(prof.values, nu))]
    _emit(args, rows, ["node", "K", "density"],
          {"K": prof.values, "density": nu, "integral": prof.integral, "class": prof.class_tag})


def cmd_coherences(args):
    cls = load_class(args.model, load_space(args.space))
    U = unitary(args.unitary, cls.ambient_dim) if args.unitary != "csv" else \
        read_matrix_csv(args.unitary_csv, args.complex)
    if isinstance(cls, GenerativeRange):
        pairs = np.random.default_rng(args.seed).standard_normal((args.samples, 2, cls.n_latent))
        sig = vr.mc_coherence_trace(U, cls, pairs, "difference")[-1]
        sig_t = vr.mc_coherence_trace(U, cls, pairs, "expansion")[-1]
        rows = [{"row": i, "sigma": float(a), "sigma_expansion": float(b)}
                for i, (a, b) in enumerate(zip(sig, sig_t))]
        cols = ["row", "sigma", "sigma_expansion"]
        payload = {"sigma": sig, "sigma_expansion": sig_t, "kind": "monte-carlo", "samples": args.samples}
    else:
        lc = vr.local_coherences(U, cls)
        rows = [{"row": i, "sigma": float(a)} for i, a in enumerate(lc.sigma)]
        cols = ["row", "sigma"]
        payload = {"sigma": lc.sigma, "kind": "exact", "sq_norm": lc.sq_norm}
    _emit(args, rows, cols, payload)


def cmd_pi(args):
    if args.sigma2 is None:
        raise UsageError("--sigma2 is required")
    sig = np.sqrt(_floats(args.sigma2))
    if args.bernoulli:
        if args.m is None:
            raise UsageError("--bernoulli needs --m")
        pi, c = vr.bernoulli_pi(sig, args.m)
    else:
        pi, c = vr.optimal_pi(sig), None
    rows = [{"i": i, "pi": float(p)} for i, p in enumerate(pi)]
    if args.format == "csv" and c is not None:
        rows.append({"i": "c", "pi": float(c)})
    _emit(args, rows, ["i", "pi"], {"pi": pi, "c": c})


def cmd_bound(args):
    if args.kind == "chernoff":
        m = dg.chernoff_bound_m(args.phi, args.n, args.d, args.alpha, args.delta, args.eps)
    elif args.kind == "sparse":
        m = vr.sparse_cs_bound(args.phi, args.s, args.N, args.eps, args.constant)
    else:
        m = vr.sample_complexity(args.condition, phi=args.phi, n=args.n, d=args.d, eps=args.eps,
                                 alpha=args.alpha, constant=args.constant, gamma=args.gamma,
                                 regime=args.kind, M=args.M)
    _emit(args, [{"bound": args.kind, "m": m}], ["bound", "m"], {"bound": args.kind, "m": m})


def cmd_sample(args):
    cls = load_class(args.model, load_space(args.space)) if args.model else None
    fam = _load_family(args, cls)
    ops = fam.draw(sm.rng_for(args.seed, 0))
    A = sm.stack_operators(ops)
    if args.matrix_out:
        Path(args.matrix_out).write_text(matrix_to_csv_text(A))
    rows = [{"draw": k, "atom": op.index} for k, op in enumerate(ops)]
    _emit(args, rows, ["draw", "atom"], {"atoms": [op.index for op in ops], "m": len(ops)})


def _read_A(path, cplx):
    return read_matrix_csv(path, cplx)


def cmd_estimate(args):
    cls = load_class(args.model, load_space(args.space))
    A = _read_A(args.A, args.complex)
    b = read_vector_csv(args.b, args.complex)
    if A.shape[0] != b.shape[0]:
        raise ConfigError("A and b have different numbers of rows")
    fit = est.solve((A, b), cls, greedy=args.greedy, rng=np.random.default_rng(args.seed))
    fit = est.finalize(fit, args.theta, cls.space)
    if args.format == "json":
        payload = fit.to_json(cls.space) | {"xhat": fit.xhat}
        if fit.xcheck is not None:
            payload["xcheck"] = fit.xcheck
        _emit(args, [], [], payload)
    else:
        x = fit.xcheck
        rows = [{"i": i, "xhat": complex(v) if np.iscomplexobj(x) else float(v)} for i, v in enumerate(x)]
        _emit(args, rows, ["i", "xhat"])


def cmd_diagnose(args):
    cls = load_class(args.model, load_space(args.space))
    A = _read_A(args.A, args.complex)
    if isinstance(cls, Subspace):
        a, b = dg.empirical_nondegeneracy(A, cls)
    else:
        a, b = dg.empirical_nondegeneracy_union(A, cls, difference=args.difference)
    out = {"alpha_emp": a, "beta_emp": b, "class": class_tag(cls)}
    if args.family:
        out["delta_U"] = dg.delta_U(A, _load_family(args, cls), cls)
    rows = [{"quantity": k, "value": v} for k, v in out.items()]
    _emit(args, rows, ["quantity", "value"], out)


def cmd_experiment(args):
    data = _load_json(args.config)
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(data)
    rows, summary = run(cfg)
    out_dir = args.out or "results"
    for p in write_outputs(cfg, rows, summary, out_dir):
        print(p)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="varsamp", description=__doc__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, seed_default=0):
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, default=seed_default)

    def model(sp, required=True):
        sp.add_argument("--class", dest="model", required=required, help="model class JSON")
        sp.add_argument("--space", help="inner-product space JSON")

    s = sub.add_parser("variation", help="variation and nondegeneracy constants")
    model(s)
    s.add_argument("--family", help="sampling family JSON")
    common(s)
    s.set_defaults(func=cmd_variation)

    s = sub.add_parser("leverage", help="leverage scores of a matrix CSV")
    s.add_argument("matrix")
    common(s)
    s.set_defaults(func=cmd_leverage)

    s = sub.add_parser("christoffel", help="Christoffel function and optimal density")
    s.add_argument("model", metavar="class.json")
    s.add_argument("space_file", metavar="space.json", nargs="?")
    common(s)
    s.set_defaults(func=cmd_christoffel)

    s = sub.add_parser("coherences", help="local coherences (exact, or Monte Carlo for generative)")
    model(s)
    s.add_argument("--unitary", default="dft", choices=("identity", "dft", "dct", "hadamard", "csv"))
    s.add_argument("--unitary-csv")
    s.add_argument("--complex", action="store_true")
    s.add_argument("--samples", type=int, default=1000)
    common(s)
    s.set_defaults(func=cmd_coherences)

    s = sub.add_parser("pi", help="optimal or Bernoulli sampling probabilities")
    s.add_argument("--sigma2", help="comma-separated squared local coherences")
    s.add_argument("--bernoulli", action="store_true")
    s.add_argument("--m", type=float)
    common(s)
    s.set_defaults(func=cmd_pi)

    s = sub.add_parser("bound", help="sample-complexity bounds")
    s.add_argument("kind", choices=("chernoff", "direct", "hull", "sparse"))
    s.add_argument("--condition", choices=("a", "b", "c"), default="c")
    s.add_argument("--phi", type=float, required=True)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--s", type=int, default=1)
    s.add_argument("--N", type=int, default=2)
    s.add_argument("--M", type=int)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--constant", type=float, default=1.0, help="universal constant C")
    common(s)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("sample", help="draw one operator from every family member")
    model(s, required=False)
    s.add_argument("--family", help="sampling family JSON")
    s.add_argument("--matrix-out", help="write the stacked operator CSV here")
    common(s)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("estimate", help="least-squares fit over a model class")
    model(s)
    s.add_argument("--A", required=True, help="stacked operator CSV")
    s.add_argument("--b", required=True, help="stacked observation CSV")
    s.add_argument("--theta", type=float, required=True,
                   help="truncation radius, an a-priori bound on ||x||")
    s.add_argument("--greedy", action="store_true")
    s.add_argument("--complex", action="store_true")
    common(s)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("diagnose", help="empirical nondegeneracy and deviation from expectation")
    model(s)
    s.add_argument("--A", required=True, help="stacked operator CSV")
    s.add_argument("--family", help="sampling family JSON (enables delta_U)")
    s.add_argument("--difference", action="store_true", help="use U - U for unions")
    s.add_argument("--complex", action="store_true")
    common(s)
    s.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("experiment", help="run an experiment config")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: results)")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (sm.DegenerateFamilyError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, UnsupportedClassError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
