"""Named batch recipes and bulk generation of PUTs onto disk."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Optional

from . import manifest as mf
from .dsl import print_sequence
from .emit import EmitOptions, emit
from .instantiate import (
    RNG_ALGORITHM,
    Ranges,
    child_seed,
    instantiate,
    make_rng,
    random_sequence,
    skeleton,
)
from .metrics import compute
from .model import BUG_KINDS, Fail, Kind, Put, SequenceSpec, TransformationSpec
from .oracle import Verdict, derive_inputs, interpret

# Sizes of the 200 PUTs in B10: {size: how many}.
B10_HISTOGRAM = {2: 1, 3: 4, 4: 9, 5: 41, 6: 44, 7: 43, 8: 29, 9: 20, 10: 9}


class PresetError(ValueError):
    pass


@dataclass(frozen=True)
class BatchPreset:
    name: str
    count: int
    description: str
    sizes: tuple = ()
    kinds: tuple = tuple(Kind)
    specs: tuple = field(default=(), repr=False)  # custom batches only


def _base_configs():
    return [(kind, bug) for kind in Kind for bug in BUG_KINDS]


def _fixed_specs(name):
    base = _base_configs()
    if name == "B1":
        return [SequenceSpec([skeleton(k, last=True, bug_kind=b)]) for k, b in base]
    if name == "B2":
        return [
            SequenceSpec([skeleton(k1, last=False), skeleton(k2, last=True, bug_kind=b2)])
            for (k1, _), (k2, b2) in itertools.combinations(base, 2)
        ]
    return None


def _sizes_from_histogram(hist):
    return tuple(size for size, n in sorted(hist.items()) for _ in range(n))


PRESETS = {
    "B1": BatchPreset("B1", 10, "one transformation; each kind with an assert and an oob bug", (1,) * 10),
    "B2": BatchPreset("B2", 45, "two transformations; all pairs of the ten B1 configurations", (2,) * 45),
    "B10": BatchPreset("B10", 200, "2-10 random transformations, fixed size histogram",
                       _sizes_from_histogram(B10_HISTOGRAM)),
    "B100": BatchPreset("B100", 100, "100 random transformations", (100,) * 100),
    "B1000": BatchPreset("B1000", 100, "1000 random transformations", (1000,) * 100),
}
for _kind in Kind:
    PRESETS[f"B_{_kind}"] = BatchPreset(
        f"B_{_kind}", 10, f"sizes 1-10, every transformation {_kind}", tuple(range(1, 11)), (_kind,)
    )
PRESETS["B_STAR"] = BatchPreset("B_STAR", 10, "sizes 1-10, random transformations", tuple(range(1, 11)))


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise PresetError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None


def custom_preset(name, specs, count=1):
    """``count`` instantiations of each spec, in file order."""
    specs = tuple(specs)
    return BatchPreset(name, len(specs) * count, "custom", specs=tuple(s for s in specs for _ in range(count)))


def make_batch(preset, seed=0):
    """Return ``[(SequenceSpec, child seed), ...]`` for ``preset``."""
    if isinstance(preset, str):
        preset = get_preset(preset)
    seeds = [child_seed(seed, i) for i in range(preset.count)]
    if preset.specs or preset.count == 0:
        return list(zip(preset.specs, seeds))
    fixed = _fixed_specs(preset.name)
    if fixed is not None:
        return list(zip(fixed, seeds))
    out = []
    for size, cs in zip(preset.sizes, seeds):
        shape_rng = make_rng(child_seed(cs, "shape"))
        out.append((random_sequence(size, preset.kinds, shape_rng), cs))
    return out


def with_bug_kind(spec, bug_kind):
    if bug_kind is None:
        return spec
    items = list(spec.items)
    last = items[-1]
    holes = [Fail(bug_kind) if isinstance(h, Fail) else h for h in last.holes]
    items[-1] = TransformationSpec(last.kind, last.params, holes)
    return SequenceSpec(items)


def build_put(spec, seed, ranges=None, policy="distinct", bug_kind=None):
    """Instantiate, derive inputs, emit and measure one PUT."""
    spec = with_bug_kind(spec, bug_kind)
    seq = instantiate(spec, ranges or Ranges(), make_rng(seed), policy)
    inputs = derive_inputs(seq)
    if interpret(seq, inputs.trigger) is not Verdict.FAIL_REACHED:
        raise RuntimeError("trigger does not reach the bug")
    if inputs.non_trigger is not None and interpret(seq, inputs.non_trigger) is not Verdict.CLEAN_EXIT:
        raise RuntimeError("non-trigger reaches the bug")
    source, bug_line = emit(seq, EmitOptions())
    return Put(
        source=source,
        bug_line=bug_line,
        trigger=inputs.trigger,
        non_trigger=inputs.non_trigger,
        metrics=compute(seq, inputs.trigger),
        seed=seed,
        spec=seq.spec,
        sequence=seq,
    )


def source_name(batch, index):
    return f"put_{batch}_{index}.c"


def generate_batch(preset, out_dir, seed=0, ranges=None, policy="distinct",
                   bug_kind: Optional[str] = None, on_put=None):
    """Generate every PUT of ``preset`` under ``out_dir/<batch>/``.

    A failing PUT is recorded with status ``error`` and does not stop the
    batch.  ``on_put(record)`` is called after each PUT.
    """
    if isinstance(preset, str):
        preset = get_preset(preset)
    ranges = ranges or Ranges()
    batch_dir = os.path.join(out_dir, preset.name)
    os.makedirs(batch_dir, exist_ok=True)
    manifest = mf.Manifest(
        batch=preset.name,
        master_seed=seed,
        rng_algorithm=RNG_ALGORITHM,
        argv_policy=policy,
        ranges=ranges.to_dict(),
    )
    for index, (spec, cs) in enumerate(make_batch(preset, seed)):
        try:
            put = build_put(spec, cs, ranges, policy, bug_kind)
        except Exception as exc:  # recorded per PUT
            try:
                text = print_sequence(spec)
            except Exception:
                text = repr(spec)
            record = mf.Record(index, cs, text, status="error", error=f"{type(exc).__name__}: {exc}")
        else:
            name = source_name(preset.name, index)
            with open(os.path.join(batch_dir, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(put.source)
            m = put.metrics
            record = mf.Record(
                index=index,
                child_seed=cs,
                spec_text=print_sequence(put.spec),
                argv_arity=put.sequence.argv_arity,
                trigger=put.trigger,
                non_trigger=put.non_trigger,
                bug_kind=put.bug_kind,
                bug_line=put.bug_line,
                source_path=name,
                source_sha256=mf.sha256(put.source),
                metrics={
                    "cyclomatic": m.cyclomatic,
                    "pathStatements": m.path_statements,
                    "transformationCount": m.transformation_count,
                },
            )
        manifest.records.append(record)
        if on_put:
            on_put(record)
    mf.write(manifest, os.path.join(batch_dir, "manifest.json"))
    return manifest
