"""Command-line front end.

Every subcommand builds one or more VerificationReports, prints them as text
(or as a JSON envelope with ``--json``) and exits 0 exactly when no item has
status "fail".  Usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from typing import Callable

import numpy as np

from . import __version__
from .finite_group import BUILTINS, builtin_group, default_characters
from .report import SCHEMA_VERSION, VerificationReport

PRIMES = (3, 5, 7, 11, 13)

# the short names are the public suite names; the dotted ones are accepted aliases
COCHAIN_SUITES = {
    "carry": "carry", "lemma3.5": "carry",
    "packed": "packed", "theorem3.7": "packed",
    "matrixrep": "matrixrep",
    "constructors": "constructors",
    "eta": "eta",
    "display-sign": "display-sign",
    "shapiro": "shapiro",
    "bockstein": "bockstein",
}

MODULES = ("trivial", "ring", "tau", "m1mod3", "m2mod3", "m3mod3", "m4mod3")


class UsageError(Exception):
    pass


def _group(name: str):
    try:
        return builtin_group(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _pair(g):
    try:
        return default_characters(g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _independent_pair(g):
    from .cohomology import _independent
    c1, c2 = _pair(g)
    if not _independent(c1, c2):
        raise UsageError(f"{g.name} has no surjection onto (Z/3)^2: the two characters are dependent")
    return c1, c2


def _lifted_character(g):
    for c in _pair(g):
        if c.lift is not None:
            return c
    raise UsageError(f"no character of {g.name} lifts to Z/9 (every element has order dividing 3); "
                     "use c9, c9xc3 or c9xc9")


def _prime(p: int) -> int:
    if p not in PRIMES:
        raise UsageError(f"unsupported prime {p}; choose one of {', '.join(map(str, PRIMES))}")
    return p


def _cochain_prime(p: int | None) -> None:
    if p is not None and p != 3:
        raise UsageError("the cochain calculus is implemented for p = 3 only")


# ---------------------------------------------------------------------------
# subcommands; each returns (reports, extra payload)

def cmd_verify_prism(a) -> tuple[list[VerificationReport], dict]:
    from .prism import PrismContext, verify_exactness, verify_h2_congruences, verify_homotopy_prism, verify_kappa
    p = _prime(a.p)
    moduli = (0, p, p * p) if a.modulus is None else (a.modulus,)
    if any(m not in (0, p, p * p) for m in moduli):
        raise UsageError(f"modulus must be 0, {p} or {p * p}")
    ctx = PrismContext(p)
    reps = [verify_exactness(p, m, ctx) for m in moduli]
    reps += [verify_homotopy_prism(p, m, ctx) for m in moduli]
    reps += [verify_kappa(p), verify_h2_congruences(p, ctx)]
    return reps, {"dimensions": dict(zip(("M1", "M2", "M3", "M4"), map(int, ctx.dims)))}


def cmd_verify_structure(a) -> tuple[list[VerificationReport], dict]:
    from . import group_ring, m4_structure
    p = _prime(a.p)
    reps = [m4_structure.verify_all(p), group_ring.verify_trace_ideal_sequence(p)]
    if p == 3:
        reps += [group_ring.verify_mod9_trace_facts(), group_ring.verify_mod3_congruences()]
    return reps, {}


def cmd_verify_cochain(a) -> tuple[list[VerificationReport], dict]:
    from . import cochain_calculus as cc
    from . import cohomology as co
    _cochain_prime(a.p)
    suite = COCHAIN_SUITES[a.suite]
    g = _group(a.group)
    if suite == "matrixrep":
        return [cc.verify_matrix_rep()], {}
    if suite == "carry":
        return [cc.verify_carry_identities(_lifted_character(g))], {}
    if suite == "packed":
        theta = _lifted_character(g)
        return [cc.tau_module_checks(theta, a.n - 1, a.samples, a.seed)], {}
    if suite == "shapiro":
        return [co.verify_shapiro(g, _pair(g)[0], a.samples, a.seed)], {}
    if suite == "bockstein":
        return [co.verify_bockstein(a.samples, a.seed, g.name)], {}
    c1, c2 = _pair(g)
    fn = {"constructors": cc.verify_constructors, "eta": cc.verify_eta, "display-sign": cc.verify_display_sign}[suite]
    if suite == "eta":
        c1, c2 = _independent_pair(g)
    return [fn(g, c1, c2, a.samples, a.n - 1, a.seed)], {}


def cmd_compute_eta(a) -> tuple[list[VerificationReport], dict]:
    from . import cochain_calculus as cc
    from .cohomology import cohomology
    _cochain_prime(a.p)
    g = _group(a.group)
    c1, c2 = _independent_pair(g)
    mods = cc.PrismModules(g, c1, c2)
    m = a.n - 1
    rng = np.random.default_rng(a.seed)
    basis = cc.m4_cocycle_space(mods, m, a.seed)
    target = cohomology(g, mods.triv, a.n, a.seed)
    rows = []
    for _ in range(a.samples):
        u, v, chi = cc.random_m4_cocycle(mods, m, rng, basis)
        res = cc.eta_pipeline(u, v, chi, mods)
        rows.append({"chi_is_zero": chi.is_zero(), "eta_class": target.coordinates(res.eta).tolist()})
    rep = cc.verify_eta(g, c1, c2, a.samples, m, a.seed)
    return [rep], {"dimensions": {f"H^{a.n}(Z/3)": target.dimension, "normal-form cocycles": int(basis.shape[1])},
                   "samples": rows}


def _module(name: str, g):
    from . import cochain_calculus as cc
    if name == "trivial":
        return cc.trivial_module(g, 3)
    if name == "tau":
        return cc.cyclic_module(g, _pair(g)[0], 3)
    c1, c2 = _pair(g)
    if name == "ring":
        return cc.group_ring_module(g, c1, c2, 3)
    return cc.prism_module(g, c1, c2, int(name[1]), 3)


def cmd_compute_cohomology(a) -> tuple[list[VerificationReport], dict]:
    from .cohomology import cohomology, coinduced_pieces
    _cochain_prime(a.p)
    g = _group(a.group)
    mod = _module(a.module, g)
    degree = a.degree if a.degree is not None else a.n
    try:
        space = cohomology(g, mod, degree, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = VerificationReport(f"H^{degree}({g.name}, {a.module})", seed=a.seed,
                             meta={"group": g.name, "module": a.module, "degree": degree})
    out = {"dimensions": {"H": space.dimension, "cocycles": space.cocycle_dimension}}
    if a.module in ("m1mod3", "m2mod3", "m3mod3"):
        c1, c2 = _pair(g)
        pieces = coinduced_pieces(g, c1, c2, int(a.module[1]), degree)
        want = sum(p.contribution for p in pieces)
        rep.check("dimension equals the coinduced prediction", "coinduced decomposition", space.dimension == want,
                  {"bar_complex": space.dimension, "prediction": want})
        out["pieces"] = [{"name": p.name, "stabilizer_order": len(p.stabilizer), "orbits": p.orbits,
                          "dimension": p.subgroup_dimension} for p in pieces]
    rep.note("dimension", "bar complex", space.to_json())
    return [rep], out


def cmd_obstruction(a) -> tuple[list[VerificationReport], dict]:
    from .cohomology import obstruction_spaces, verify_obstruction
    _cochain_prime(a.p)
    g = _group(a.group)
    c1, c2 = _independent_pair(g)
    obs = obstruction_spaces(g, a.n, c1, c2, a.seed)
    rep = verify_obstruction(g, c1, c2, a.n, min(a.samples, 10), a.seed)
    return [rep], {"dimensions": obs.dims()}


def cmd_h3_bockstein(a) -> tuple[list[VerificationReport], dict]:
    from .cohomology import h3_bockstein_report
    _cochain_prime(a.p)
    if a.n > 2:
        raise UsageError("--n must be at most 2")
    g = _group(a.group)
    c1, c2 = _pair(g)
    rep = h3_bockstein_report(g, c1, c2, a.n, a.seed)
    return [rep], {"verdicts": rep.items[1].detail}


def cmd_six_term(a) -> tuple[list[VerificationReport], dict]:
    from .cohomology import six_term_report
    _cochain_prime(a.p)
    g = _group(a.group)
    c1, c2 = _pair(g)
    try:
        rep = six_term_report(g, c1, c2, a.n, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return [rep], {}


def cmd_all(a) -> tuple[list[VerificationReport], dict]:
    from . import cochain_calculus as cc
    from . import cohomology as co
    p = _prime(a.p)
    reps: list[VerificationReport] = []
    a_prism = argparse.Namespace(**{**vars(a), "modulus": None})
    reps += cmd_verify_prism(a_prism)[0]
    reps += cmd_verify_structure(a)[0]
    if p == 3:
        c9, c9x3, c3x3 = builtin_group("c9"), builtin_group("c9xc3"), builtin_group("c3xc3")
        reps += [cc.verify_carry_identities(_lifted_character(c9)),
                 cc.verify_carry_identities(_lifted_character(c9x3)),
                 cc.verify_matrix_rep(),
                 cc.tau_module_checks(_lifted_character(c9), 1, a.samples, a.seed)]
        for g in (c3x3, c9):
            c1, c2 = default_characters(g)
            reps.append(cc.verify_constructors(g, c1, c2, a.samples, 1, a.seed))
        c1, c2 = default_characters(c3x3)
        reps.append(cc.verify_eta(c3x3, c1, c2, min(a.samples, 20), 1, a.seed))
        reps.append(co.shapiro_cross_check(c3x3, c1, c2, 2, a.seed))
        reps.append(co.verify_shapiro(c3x3, c1, min(a.samples, 20), a.seed))
        reps.append(co.verify_bockstein(min(a.samples, 20), a.seed))
        reps.append(co.verify_obstruction(c3x3, c1, c2, 2, 10, a.seed))
        reps.append(co.h3_bockstein_report(c3x3, c1, c2, 1, a.seed))
        reps.append(co.six_term_report(c3x3, c1, c2, 2, a.seed))
    return reps, {}


COMMANDS: dict[str, Callable] = {
    "verify-prism": cmd_verify_prism,
    "verify-structure": cmd_verify_structure,
    "verify-cochain": cmd_verify_cochain,
    "compute-eta": cmd_compute_eta,
    "compute-cohomology": cmd_compute_cohomology,
    "obstruction": cmd_obstruction,
    "h3-bockstein-report": cmd_h3_bockstein,
    "six-term": cmd_six_term,
    "all": cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="prime (default 3)")
    common.add_argument("--modulus", type=int, default=None, help="coefficient modulus: 0, p or p^2")
    common.add_argument("--group", default="c3xc3", help=f"builtin group: {', '.join(BUILTINS)}")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--n", type=int, default=2, help="cohomological degree")
    common.add_argument("--samples", type=int, default=20)
    common.add_argument("--json", action="store_true", help="emit a JSON envelope")
    common.add_argument("--no-timing", action="store_true", help="omit timing fields from JSON")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")
    ap = argparse.ArgumentParser(prog="prismcoh", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify-cochain":
            sp.add_argument("--suite", required=True, choices=sorted(COCHAIN_SUITES))
        if name == "compute-cohomology":
            sp.add_argument("--module", default="trivial", choices=MODULES)
            sp.add_argument("--degree", type=int, default=None)
    return ap


def toolchain() -> dict:
    import scipy
    return {"prismcoh": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def render(command: str, args, reports: list[VerificationReport], extra: dict) -> str:
    if args.json:
        env = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "seed": args.seed,
            "group": args.group,
            "toolchain": toolchain(),
            "ok": all(r.ok for r in reports),
            **extra,
            "reports": [r.to_dict(timing=not args.no_timing) for r in reports],
        }
        return json.dumps(env, indent=2, sort_keys=True)
    parts = [r.to_text() for r in reports]
    if extra:
        parts.append(json.dumps(extra, sort_keys=True, default=str))
    return "\n\n".join(parts)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.p is None:
        args.p = 3
    try:
        reports, extra = COMMANDS[args.command](args)
    except UsageError as exc:
        ap.error(str(exc))
    text = render(args.command, args, reports, extra)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if all(r.ok for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
