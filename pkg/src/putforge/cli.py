"""Command-line entry point: ``putforge <subcommand>``.

Exit codes: 0 success, 1 domain failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from . import manifest as mf
from .batch import PRESETS, PresetError, custom_preset, generate_batch, get_preset
from .dsl import DslError, parse, parse_file, print_sequence, strip_comment
from .instantiate import RNG_ALGORITHM, InstantiationError, Ranges, instantiate, make_rng
from .metrics import compute
from .model import ArgvInt, ArgvString, input_slot_index
from .oracle import Conflict, derive_inputs
from .verify import ENV_CC_LIST, default_configs, load_configs, verify_batch, write_summary


class UsageError(Exception):
    pass


def dq(arg):
    """Double-quote ``arg`` for a POSIX shell."""
    return '"' + "".join("\\" + c if c in '"\\$`' else c for c in arg) + '"'


def format_argv(argv):
    return " ".join(dq(a) for a in argv)


def resolve_policy(policy, specs):
    """``auto``: keep written argv bindings when every input slot has one."""
    if policy != "auto":
        return policy
    for spec in specs:
        for item in spec.items:
            i = input_slot_index(item.kind)
            if i is not None and not isinstance(item.params[i], (ArgvInt, ArgvString)):
                return "distinct"
    return "as-written"


def _ranges(path):
    if not path:
        return Ranges()
    try:
        return Ranges.load(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load ranges from {path}: {exc}") from None


def _config_line(**kw):
    return "# " + " ".join(f"{k}={json.dumps(v)}" for k, v in kw.items())


def cmd_generate(args):
    if bool(args.spec) == bool(args.preset):
        raise UsageError("exactly one of --spec / --preset is required")
    if args.preset and args.count is not None:
        raise UsageError("--count cannot be combined with --preset (the preset fixes the count)")
    ranges = _ranges(args.ranges)
    if args.preset:
        try:
            preset = get_preset(args.preset)
        except PresetError as exc:
            raise UsageError(str(exc)) from None
        policy = "distinct" if args.argv_policy == "auto" else args.argv_policy
    else:
        try:
            specs = [s for _, s in parse_file(args.spec)]
        except OSError as exc:
            raise UsageError(f"cannot read {args.spec}: {exc}") from None
        except DslError as exc:
            print(f"error: {args.spec}:{exc}", file=sys.stderr)
            return 1
        count = 1 if args.count is None else args.count
        if count < 0:
            raise UsageError("--count must be >= 0")
        name = args.batch or os.path.splitext(os.path.basename(args.spec))[0]
        preset = custom_preset(name, specs, count)
        policy = resolve_policy(args.argv_policy, specs)

    print(_config_line(command="generate", batch=preset.name, count=preset.count, seed=args.seed,
                       out=args.out, bug=args.bug, argvPolicy=policy, ranges=ranges.to_dict(),
                       rng=RNG_ALGORITHM, version=__version__))

    def report(rec):
        if rec.ok:
            m = rec.metrics
            print(f"{rec.source_path} ok bugLine={rec.bug_line} trigger=[{format_argv(rec.trigger)}] "
                  f"cyclomatic={m['cyclomatic']} pathStatements={m['pathStatements']}")
        else:
            print(f"put_{preset.name}_{rec.index} error {rec.error}")

    manifest = generate_batch(preset, args.out, seed=args.seed, ranges=ranges, policy=policy,
                              bug_kind=args.bug, on_put=report)
    errors = sum(not r.ok for r in manifest.records)
    print(f"# {len(manifest.records) - errors}/{len(manifest.records)} PUTs generated in "
          f"{os.path.join(args.out, preset.name)}")
    return 1 if errors else 0


def _single(args):
    try:
        spec = parse(args.spec_line)
    except DslError as exc:
        raise UsageError(f"cannot parse spec line: {exc}") from None
    policy = resolve_policy(args.argv_policy, [spec])
    ranges = _ranges(args.ranges)
    print(_config_line(command=args.command, seed=args.seed, argvPolicy=policy,
                       ranges=ranges.to_dict(), rng=RNG_ALGORITHM), file=sys.stderr)
    return instantiate(spec, ranges, make_rng(args.seed), policy)


def cmd_derive(args):
    try:
        seq = _single(args)
        inputs = derive_inputs(seq)
    except (Conflict, InstantiationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(format_argv(inputs.trigger))
    print("(none)" if inputs.non_trigger is None else format_argv(inputs.non_trigger))
    return 0


def cmd_metrics(args):
    try:
        seq = _single(args)
        inputs = derive_inputs(seq)
    except (Conflict, InstantiationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    m = compute(seq, inputs.trigger)
    print(json.dumps({"cyclomatic": m.cyclomatic, "pathStatements": m.path_statements,
                      "transformationCount": m.transformation_count}))
    return 0


def cmd_parse_check(args):
    try:
        with open(args.file, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    print(_config_line(command="parse-check", file=args.file), file=sys.stderr)
    status = 0
    for lineno, raw in enumerate(lines, start=1):
        text = strip_comment(raw).strip()
        if not text:
            continue
        try:
            print(print_sequence(parse(text)))
        except DslError as exc:
            print(f"{args.file}:{lineno}: {exc}", file=sys.stderr)
            status = 1
    return status


def cmd_verify(args):
    if not os.path.isfile(args.manifest):
        raise UsageError(f"manifest not found: {args.manifest}")
    if args.config:
        configs = load_configs(args.config)
    else:
        ccs = [c.strip() for c in args.cc_list.split(",") if c.strip()] if args.cc_list else None
        configs = default_configs(ccs, sanitizer=not args.no_sanitizer)
    print(_config_line(command="verify", manifest=args.manifest, jobs=args.jobs,
                       timeout=args.timeout,
                       configs=[{"name": c.name, "command": c.command, "flags": list(c.flags)}
                                for c in configs]))
    try:
        summary = verify_batch(args.manifest, configs, jobs=args.jobs, timeout=args.timeout)
    except mf.ManifestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = os.path.join(os.path.dirname(os.path.abspath(args.manifest)), "verification.json")
    write_summary(summary, out)
    for r in summary.reports:
        line = f"put {r.index}: {r.status}"
        if r.problems:
            line += " - " + "; ".join(r.problems)
        print(line)
    if summary.total and summary.skipped == summary.total:
        print(f"# skipped: no configured compiler available ({summary.total} PUTs)")
    else:
        print(f"# {summary.passed} pass, {summary.failed} fail, {summary.inconclusive} inconclusive, "
              f"{summary.skipped} skipped of {summary.total}; report: {out}")
    return 0 if summary.ok else 1


def cmd_presets(args):
    for p in PRESETS.values():
        sizes = sorted(set(p.sizes))
        size = str(sizes[0]) if len(sizes) == 1 else f"{sizes[0]}-{sizes[-1]}"
        kinds = ",".join(str(k) for k in p.kinds)
        print(f"{p.name:7} count={p.count:<4} size={size:<5} kinds={kinds:<15} {p.description}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="putforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a batch of PUTs")
    g.add_argument("--spec", help="file with one transformation sequence per line")
    g.add_argument("--preset", help="named batch recipe (see 'presets')")
    g.add_argument("--count", type=int, help="instantiations per spec line (--spec only)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--bug", choices=["assert", "oob"], help="override every PUT's bug kind")
    g.add_argument("--ranges", help="JSON file overriding parameter ranges")
    g.add_argument("--batch", help="batch name for --spec (default: spec file stem)")
    g.add_argument("--argv-policy", choices=["auto", "distinct", "as-written"], default="auto")
    g.set_defaults(func=cmd_generate)

    pc = sub.add_parser("parse-check", help="parse a spec file and print canonical lines")
    pc.add_argument("file")
    pc.set_defaults(func=cmd_parse_check)

    for name, func, text in (("derive", cmd_derive, "print trigger and non-trigger inputs"),
                             ("metrics", cmd_metrics, "print static metrics as JSON")):
        d = sub.add_parser(name, help=text)
        d.add_argument("--spec-line", required=True)
        d.add_argument("--seed", type=int, default=0)
        d.add_argument("--ranges")
        d.add_argument("--argv-policy", choices=["auto", "distinct", "as-written"], default="auto")
        d.set_defaults(func=func)

    v = sub.add_parser("verify", help="compile and run the PUTs of a manifest")
    v.add_argument("--manifest", required=True)
    v.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    v.add_argument("--cc-list", help=f"comma-separated compilers (default ${ENV_CC_LIST} or gcc,clang)")
    v.add_argument("--config", help="JSON file listing compiler configurations")
    v.add_argument("--no-sanitizer", action="store_true")
    v.add_argument("--timeout", type=float, default=10.0, help="per-run limit in seconds")
    v.set_defaults(func=cmd_verify)

    p = sub.add_parser("presets", help="list batch presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
