"""Command-line front end: run, sweep, formulas, audit.

Output is deterministic byte for byte given the same configuration and
seed: formula cells are exact decimal or fraction renderings of
rationals, CSV rows are written in grid order regardless of worker
completion order, and line endings are always LF.

Exit codes: 0 ok, 2 invalid parameters, 3 decode failure, 4 audit
failure.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .errors import CacheCoderError, InvalidParams, OutOfRegion
from . import formulas as fm
from .audit import security_audit
from .schemes import MODULES, execute, make_params, random_demand, worst_demand
from .subsets import min_valid_f

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DECODE = 3
EXIT_AUDIT = 4

CSV_HEADER = ("scheme,K,L,N,M,t_or_q,delay_secure,delay_insecure,"
              "m_d,m_k,dof,region_ok,measured_delay")

SCHEME_CHOICES = ("mt", "grouped", "feedback", "decentralized", "formulas-only")


def format_rational(x) -> str:
    """Exact rendering: terminating decimal when one exists, else p/q."""
    if x is None:
        return ""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{x.numerator}/{x.denominator}"
    shift = max(twos, fives)
    scaled = abs(x.numerator) * 10**shift // x.denominator
    digits = str(scaled).rjust(shift + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def load_config(path: str) -> dict:
    """Flat `key = value` pairs, # comments, blank lines ignored."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParams(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    return values


def add_common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="config file; flags given here override it")
    p.add_argument("--scheme", choices=SCHEME_CHOICES)
    p.add_argument("--K", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--M", type=str, help="memory size (rational, e.g. 5/2)")
    p.add_argument("--q", type=str, help="caching probability (rational)")
    p.add_argument("--f", type=str, help='symbols per file, or "auto"')
    p.add_argument("--field-bits", dest="field_bits", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--demand", type=str,
                   help='"worst", "random", or an explicit list like 1,2,3')
    p.add_argument("--placement-mode", dest="placement_mode",
                   choices=("ideal", "bernoulli"))
    p.add_argument("--trials", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--ablate-keys", dest="ablate_keys", action="store_true",
                   default=None)
    p.add_argument("--p-threshold", dest="p_threshold", type=float)


def merge_config(args: argparse.Namespace) -> dict:
    """CLI flags override config-file values; unset fields get defaults."""
    cfg = {}
    if args.config:
        raw = load_config(args.config)
        casts = {
            "K": int, "L": int, "N": int, "t": int, "seed": int,
            "trials": int, "jobs": int, "field_bits": int,
            "p_threshold": float,
            "ablate_keys": lambda v: v.lower() in ("1", "true", "yes"),
        }
        for key, val in raw.items():
            norm = key.replace("-", "_")
            cfg[norm] = casts.get(norm, str)(val)
    for key, val in vars(args).items():
        if key != "config" and val is not None:
            cfg[key] = val
    cfg.setdefault("seed", int(os.environ.get("CACHECODER_SEED", "0")))
    cfg.setdefault("field_bits", 8)
    cfg.setdefault("f", "auto")
    cfg.setdefault("demand", "worst")
    cfg.setdefault("placement_mode", "ideal")
    cfg.setdefault("trials", 0)
    cfg.setdefault("jobs", 1)
    cfg.setdefault("ablate_keys", False)
    cfg.setdefault("p_threshold", 0.01)
    return cfg


def _require(cfg, *names):
    for name in names:
        if cfg.get(name) is None:
            raise InvalidParams(f"missing required parameter --{name}")


def _cache_parameter(cfg) -> tuple[str, object]:
    given = [name for name in ("t", "M", "q") if cfg.get(name) is not None]
    if len(given) != 1:
        raise InvalidParams(
            f"exactly one of --t, --M, --q must be set, got {given or 'none'}"
        )
    name = given[0]
    if name == "t":
        return name, int(cfg["t"])
    return name, parse_fraction(str(cfg[name]))


def build_params(cfg, scheme: str):
    """Scheme params from a merged config; f='auto' resolves to min_valid_f."""
    _require(cfg, "K", "L", "N")
    K, L, N = cfg["K"], cfg["L"], cfg["N"]
    kind, value = _cache_parameter(cfg)
    common = dict(K=K, L=L, N=N, m=cfg["field_bits"], seed=cfg["seed"])

    if scheme == "decentralized":
        if kind == "t":
            raise InvalidParams("decentralized scheme takes --q or --M, not --t")
        q = value if kind == "q" else fm.solve_cache_prob(K, L, N, value)
        base = (min_valid_f("decentralized", K, L, cache_prob=q)
                if cfg["placement_mode"] == "ideal" else 1)
        f = base if cfg["f"] == "auto" else int(cfg["f"])
        return make_params("decentralized", f=f, cache_prob=q,
                           mode=cfg["placement_mode"], **common)

    if kind == "q":
        raise InvalidParams(f"--q only applies to the decentralized scheme")
    if kind == "M":
        t = _integer_t(scheme, K, L, N, value)
    else:
        t = value
    base = min_valid_f(scheme, K, L, t)
    f = base if cfg["f"] == "auto" else int(cfg["f"])
    return make_params(scheme, t=t, f=f, **common)


def _integer_t(scheme, K, L, N, M) -> int:
    t = {
        "mt": Fraction(K * (M - 1), N - 1),
        "grouped": Fraction(K * (M - L), N - L),
        "feedback": fm._feedback_t_from_m(K, L, N, Fraction(M)),
    }[scheme]
    if t.denominator != 1:
        raise InvalidParams(
            f"memory M={M} gives non-integer cache parameter t={t}; "
            f"this simulator has no memory-sharing construction"
        )
    return int(t)


def parse_demand(cfg, K: int, N: int) -> list[int]:
    spec = str(cfg["demand"])
    if spec == "worst":
        return worst_demand(K, N)
    if spec == "random":
        return random_demand(K, N, cfg["seed"])
    return [int(x) for x in spec.split(",")]


# -- run ---------------------------------------------------------------


def cmd_run(cfg) -> int:
    scheme = cfg.get("scheme")
    if scheme is None:
        raise InvalidParams("missing required parameter --scheme")
    if scheme == "formulas-only":
        return cmd_formulas(cfg)
    params = build_params(cfg, scheme)
    demand = parse_demand(cfg, params.K, params.N)
    run = execute(scheme, params, demand)
    rep = run.report

    ideal = getattr(params, "mode", "ideal") == "ideal"
    print(f"scheme={scheme} K={params.K} L={params.L} N={params.N} "
          f"f={params.f} field=GF(2^{params.m}) seed={params.seed}")
    print(f"demand: {','.join(str(d) for d in demand)}")
    t_or_q = (format_rational(params.cache_prob) if scheme == "decentralized"
              else str(params.t))
    print(f"cache parameter: {t_or_q}  M={format_rational(rep.formula_m_d + rep.formula_m_k)}")
    for label, got, want in (
        ("delay", rep.measured_delay, rep.formula_delay),
        ("M_D", rep.measured_m_d, rep.formula_m_d),
        ("M_K", rep.measured_m_k, rep.formula_m_k),
    ):
        verdict = "MATCH" if got == want else ("info" if not ideal else "MISMATCH")
        print(f"measured {label:5s} = {format_rational(got):>12s}   "
              f"formula = {format_rational(want):>12s}   {verdict}")
    good = sum(rep.decode_ok.values())
    print(f"decode: {good}/{params.K} users exact")

    ok = rep.all_decoded and (not ideal or (rep.delay_matches and rep.storage_matches))
    if cfg["trials"]:
        audit = security_audit(run, cfg["trials"], ablate_keys=cfg["ablate_keys"])
        print(_audit_lines(audit, cfg["p_threshold"]))
        ok = ok and audit.passed(cfg["p_threshold"])
    if not rep.all_decoded:
        return EXIT_DECODE
    return EXIT_OK if ok else EXIT_AUDIT


# -- formulas ----------------------------------------------------------


def _region_ok(scheme: str, K: int, L: int, N: int, M: Fraction) -> bool:
    if scheme == "grouped":
        lo, hi = fm.grouped_operating_region(K, L, N)
        return lo <= M <= hi
    if scheme == "decentralized":
        return 1 < M < N
    return 1 < M <= N


def _formula_row(scheme: str, K: int, L: int, N: int, kind: str, value):
    """One CSV row of formula cells; blanks where a point is undefined."""
    cells = [scheme, str(K), str(L), str(N)]
    try:
        kwargs = {kind: value}
        point = fm.formulas(scheme, K, L, N, **kwargs)
        if scheme == "decentralized":
            insecure = fm.insecure_dec_delay(K, L, N, point.M)
        else:
            insecure = fm.insecure_centralized_delay(K, L, N, point.M)
        region = _region_ok(scheme, K, L, N, point.M)
        cells += [
            format_rational(point.M),
            format_rational(point.t_or_q),
            format_rational(point.delay),
            format_rational(insecure),
            format_rational(point.m_d),
            format_rational(point.m_k),
            "" if point.dof is None else str(point.dof),
            "true" if region else "false",
        ]
        return cells, point
    except (OutOfRegion, InvalidParams, CacheCoderError) as exc:
        cells += ["", "", "", "", "", "", "", f"false ({exc.__class__.__name__})"]
        return cells, None


def cmd_formulas(cfg) -> int:
    scheme = cfg.get("scheme") or "formulas-only"
    names = list(MODULES) if scheme == "formulas-only" else [scheme]
    _require(cfg, "K", "L", "N")
    kind, value = _cache_parameter(cfg)
    lines = [CSV_HEADER]
    for name in names:
        if name == "decentralized" and kind == "t":
            print("# skipping decentralized: takes q or M, not t",
                  file=sys.stderr)
            continue
        if name != "decentralized" and kind == "q":
            print(f"# skipping {name}: q only applies to decentralized",
                  file=sys.stderr)
            continue
        cells, _ = _formula_row(name, cfg["K"], cfg["L"], cfg["N"],
                                kind, value)
        lines.append(",".join(cells + [""]))
    text = "\n".join(lines) + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK


# -- sweep -------------------------------------------------------------


def parse_axis(spec: str) -> tuple[str, list]:
    if "=" not in spec:
        raise InvalidParams(f'axis must look like "t=1,2,3", got {spec!r}')
    name, _, raw = spec.partition("=")
    name = name.strip()
    if name not in ("K", "L", "N", "t", "M", "q"):
        raise InvalidParams(f"unsupported sweep axis {name!r}")
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if name in ("K", "L", "N", "t"):
        return name, [int(v) for v in values]
    return name, [parse_fraction(v) for v in values]


def _sweep_point(task):
    """One grid point -> one CSV line (top level so pools can pickle it)."""
    cfg, scheme, simulate = task
    K, L, N = cfg["K"], cfg["L"], cfg["N"]
    try:
        kind, val = _cache_parameter(cfg)
    except InvalidParams as exc:
        return ",".join([scheme, str(K), str(L), str(N)]
                        + [""] * 7 + [f"false ({exc})", ""])
    cells, point = _formula_row(scheme, K, L, N, kind, val)
    measured = ""
    if simulate and point is not None:
        try:
            params = build_params(cfg, scheme)
            run = execute(scheme, params, parse_demand(cfg, K, N))
            measured = format_rational(run.report.measured_delay)
            if not run.report.all_decoded:
                measured += " (decode failed)"
        except (CacheCoderError, ValueError):
            measured = ""
    return ",".join(cells + [measured])


def cmd_sweep(cfg) -> int:
    scheme = cfg.get("scheme")
    if scheme is None:
        raise InvalidParams("missing required parameter --scheme")
    if cfg.get("axis") is None:
        raise InvalidParams("missing required parameter --axis")
    axis, values = parse_axis(cfg["axis"])
    simulate = scheme != "formulas-only" and not cfg.get("formulas_only")
    names = list(MODULES) if scheme == "formulas-only" else [scheme]

    tasks = []
    for name in names:
        for value in values:
            base = dict(cfg)
            if axis in ("t", "M", "q"):
                for other in ("t", "M", "q"):
                    base.pop(other, None)
            base[axis] = value
            tasks.append((base, name, simulate))

    jobs = max(1, int(cfg["jobs"]))
    if jobs == 1 or len(tasks) <= 1:
        rows = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    text = "\n".join([CSV_HEADER] + rows) + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK


# -- audit -------------------------------------------------------------


def _audit_lines(audit, p_threshold) -> str:
    lines = [
        f"audit: structural {'ok' if audit.structural_ok else 'FAIL'}, "
        f"mask {'present' if audit.mask_present else 'ABSENT'}, "
        f"trials={audit.trials}, positions={audit.positions}",
    ]
    if audit.uniformity_pvalue is not None:
        verdict = "ok" if audit.uniformity_pvalue > p_threshold else "REJECTED"
        lines.append(f"audit: uniformity p-value = {audit.uniformity_pvalue:.6g} "
                     f"({verdict} at threshold {p_threshold})")
    for issue in audit.issues:
        lines.append(f"audit: issue: {issue}")
    return "\n".join(lines)


def cmd_audit(cfg) -> int:
    scheme = cfg.get("scheme")
    if scheme is None or scheme == "formulas-only":
        raise InvalidParams("audit needs a concrete --scheme")
    params = build_params(cfg, scheme)
    demand = parse_demand(cfg, params.K, params.N)
    run = execute(scheme, params, demand)
    if not run.report.all_decoded:
        print("decode failed; aborting audit")
        return EXIT_DECODE
    trials = cfg["trials"] or 320
    audit = security_audit(run, trials, ablate_keys=cfg["ablate_keys"])
    print(_audit_lines(audit, cfg["p_threshold"]))
    if audit.passed(cfg["p_threshold"]):
        return EXIT_OK
    if not audit.structural_ok:
        print("audit failed: key reuse / missing key term")
    elif not audit.mask_present:
        print("audit failed: key mask absent at eavesdropper")
    else:
        print("audit failed: uniformity rejected")
    return EXIT_AUDIT


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cachecoder",
        description="Keyed multi-transmitter coded caching simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep),
                     ("formulas", cmd_formulas), ("audit", cmd_audit)):
        p = sub.add_parser(name)
        add_common_flags(p)
        if name == "sweep":
            p.add_argument("--axis", type=str,
                           help='sweep axis, e.g. "M=2,3,4" or "t=1,2,3"')
            p.add_argument("--formulas-only", dest="formulas_only",
                           action="store_true", default=None)
        p.set_defaults(func=fn)

    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
        if getattr(args, "axis", None) is not None:
            cfg["axis"] = args.axis
        return args.func(cfg)
    except (InvalidParams, OutOfRegion) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CacheCoderError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_DECODE


if __name__ == "__main__":
    sys.exit(main())
