"""Command-line entry points for the corpus pipeline and control kernels.

Exit codes: 0 success, 1 usage error, 2 data error (malformed manifests,
profiles, or configuration), 3 stage failure (alignment, stitching, or a
pipeline stage blowing up). Progress goes to standard error so stdout stays
clean for piped data.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import editctl, flowsched
from .aligner import AlignmentError, find_emissions, force_align, load_emissions
from .audio import AudioFormatError, read_wav, write_wav
from .curate import (CurationError, EvalCriteria, compute_stats, eligible,
                     render_stats_table, select_eval, stats_to_json_dict,
                     trim_trailing_silence)
from .manifest import (ManifestError, SourceAdapterSpec, adapt, read_manifest,
                       with_words, write_manifest)
from .pipeline import ConfigError, PipelineError, PipelineStageError, shard
from .quality import FilterConfig, QualityError, fit_ratio_bounds, run_chain
from .textnorm import (EmptyTextError, ProfileError, SUPPORTED_LANGUAGES,
                       UnmappableCharacterError, load_profiles, normalize,
                       romanize)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2; remap usage problems to 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _progress(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_kv(pairs: list[str], flag: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"{flag} expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------- commands

def _cmd_ingest(args) -> int:
    adapter = None
    if args.source or args.map or args.default:
        if not args.source:
            raise UsageError("--map/--default require --source")
        adapter = SourceAdapterSpec(source=args.source,
                                    field_map=_parse_kv(args.map, "--map"),
                                    defaults=_parse_kv(args.default, "--default"))
    records = []
    if adapter is None:
        records = list(read_manifest(args.input))
    else:
        with open(args.input, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ManifestError(f"invalid JSON: {exc.msg}",
                                        line_no=line_no) from exc
                records.append(adapt(row, adapter))
    count = write_manifest(records, args.output)
    _progress(f"ingest: wrote {count} records to {args.output}")
    return EXIT_OK


def _cmd_normalize(args) -> int:
    profiles = load_profiles(profiles_dir=args.profiles)
    out = []
    skipped = 0
    for record in read_manifest(args.input):
        profile = profiles.get(record.language)
        if profile is None:
            raise ManifestError(f"no profile for language {record.language!r}",
                                key=record.key)
        try:
            text = normalize(record.raw_text, profile)
        except EmptyTextError:
            if not args.skip_failed:
                raise
            skipped += 1
            continue
        updates = {"normalized_text": text}
        if not args.no_romanize:
            try:
                tokens = romanize(text, record.language,
                                  split_zh_chars=args.split_zh_chars)
            except UnmappableCharacterError:
                if not args.skip_failed:
                    raise
                skipped += 1
                continue
            updates["romanized_tokens"] = tuple(tokens)
        out.append(replace(record, **updates))
    count = write_manifest(out, args.output)
    note = f", skipped {skipped}" if skipped else ""
    _progress(f"normalize: wrote {count} records{note}")
    return EXIT_OK


def _cmd_align(args) -> int:
    out = []
    skipped = 0
    for record in read_manifest(args.input):
        if not record.romanized_tokens:
            raise ManifestError("no romanized_tokens; normalize first",
                                key=record.key)
        path = find_emissions(args.emissions, record.key)
        if path is None:
            if not args.skip_failed:
                raise AlignmentError(f"no emissions for key {record.key!r} "
                                     f"under {args.emissions}")
            skipped += 1
            continue
        try:
            result = force_align(load_emissions(path), record.romanized_tokens,
                                 score_mode=args.score_mode)
        except AlignmentError:
            if not args.skip_failed:
                raise
            skipped += 1
            continue
        out.append(with_words(record, result.words, result.score))
    count = write_manifest(out, args.output)
    note = f", skipped {skipped}" if skipped else ""
    _progress(f"align: wrote {count} records{note}")
    return EXIT_OK


def _filter_config_from_args(args) -> FilterConfig:
    kwargs: dict = {}
    if args.min_duration_s is not None:
        kwargs["min_duration_s"] = args.min_duration_s
    if args.max_duration_s is not None:
        kwargs["max_duration_s"] = args.max_duration_s
    if args.max_gap_s is not None:
        kwargs["max_gap_s"] = args.max_gap_s
    pair: dict[tuple[str, str], float] = {}
    by_source: dict[str, float] = {}
    by_language: dict[str, float] = {}
    for spec, value in _parse_kv(args.threshold, "--threshold").items():
        try:
            number = float(value)
        except ValueError:
            raise UsageError(f"--threshold {spec} expects a number, "
                             f"got {value!r}") from None
        parts = spec.split(".")
        if parts == ["default"]:
            kwargs["default_confidence_threshold"] = number
        elif len(parts) == 2 and parts[0] == "source":
            by_source[parts[1]] = number
        elif len(parts) == 2 and parts[0] == "language":
            by_language[parts[1]] = number
        elif len(parts) == 3 and parts[0] == "pair":
            pair[(parts[1], parts[2])] = number
        else:
            raise UsageError(f"--threshold key must be default, source.S, "
                             f"language.L, or pair.S.L, got {spec!r}")
    profiles = load_profiles(profiles_dir=args.profiles)
    return FilterConfig(profiles=profiles,
                        thresholds_by_source_language=pair,
                        thresholds_by_source=by_source,
                        thresholds_by_language=by_language,
                        **kwargs)


def _cmd_filter(args) -> int:
    config = _filter_config_from_args(args)
    kept = []
    rejected = []
    for record in read_manifest(args.input):
        verdict = run_chain(record, config)
        if verdict.passed:
            kept.append(record)
        else:
            rejected.append({"key": record.key,
                             "reasons": list(verdict.reasons)})
    count = write_manifest(kept, args.output)
    if args.rejects:
        with open(args.rejects, "w", encoding="utf-8") as handle:
            for entry in rejected:
                handle.write(json.dumps(entry, sort_keys=True,
                                        ensure_ascii=False) + "\n")
    _progress(f"filter: kept {count}, rejected {len(rejected)}")
    return EXIT_OK


def _cmd_fit_bounds(args) -> int:
    records = [r for r in read_manifest(args.input)
               if r.language == args.language]
    low, high = fit_ratio_bounds(records, args.language,
                                 percentile=args.percentile)
    print(json.dumps({"language": args.language, "min_ratio": low,
                      "max_ratio": high}, sort_keys=True))
    return EXIT_OK


def _cmd_curate_eval(args) -> int:
    criteria = EvalCriteria(
        min_confidence=args.min_confidence,
        min_words=args.min_words,
        min_duration_s=args.min_duration_s,
        max_duration_s=args.max_duration_s,
        trailing_silence_s=args.trailing_silence_s,
        target_per_language=args.target,
    )
    pools: dict[str, list] = {}
    trims = []
    for record in read_manifest(args.input):
        if not record.words or record.avg_confidence is None:
            continue
        record, trim = trim_trailing_silence(record, criteria)
        if trim is not None:
            trims.append(trim)
        if eligible(record, criteria):
            pools.setdefault(record.language, []).append(record)
    selections = {language: select_eval(pools[language], criteria)
                  for language in sorted(pools)}
    selected = [record for chosen in selections.values() for record in chosen]
    count = write_manifest(selected, args.output)
    if args.trims:
        with open(args.trims, "w", encoding="utf-8") as handle:
            for trim in trims:
                handle.write(json.dumps({
                    "key": trim.key,
                    "old_duration_s": trim.old_duration_s,
                    "new_duration_s": trim.new_duration_s,
                }, sort_keys=True) + "\n")
    per_lang = ", ".join(f"{lang}: {len(chosen)}"
                         for lang, chosen in selections.items())
    _progress(f"curate-eval: selected {count} ({per_lang or 'none eligible'})")
    return EXIT_OK


def _cmd_stats(args) -> int:
    stats = compute_stats(read_manifest(args.input))
    if args.json:
        print(json.dumps(stats_to_json_dict(stats), indent=2, sort_keys=True))
    else:
        print(render_stats_table(stats))
    return EXIT_OK


def _cmd_shard(args) -> int:
    records = list(read_manifest(args.input))
    assignment = shard(records, args.shards)
    by_key = {r.key: r for r in records}
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for index in range(assignment.n_shards):
        keys = assignment.keys_for(index)
        write_manifest((by_key[k] for k in keys),
                       out_dir / f"{args.prefix}{index:03d}.jsonl")
    payload = {
        "n_shards": assignment.n_shards,
        "durations_s": [round(d, 3) for d in assignment.durations],
        "assignment": dict(sorted(assignment.shard_of.items())),
    }
    (out_dir / "assignment.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    spread = (max(assignment.durations) - min(assignment.durations)
              if records else 0.0)
    _progress(f"shard: {len(records)} records into {args.shards} shards, "
              f"spread {spread:.3f}s")
    return EXIT_OK


def _cmd_sched(args) -> int:
    guidance = flowsched.GuidanceParams(strength=args.strength)
    sway = flowsched.SwayParams(gamma=args.gamma, steps=args.steps)
    rows = flowsched.schedule_table(guidance, sway)
    if args.json:
        payload = [{"step": k, "uniform": s, "warped": t, "guidance": g}
                   for k, s, t, g in rows]
        print(json.dumps(payload, indent=2))
    else:
        print(f"{'step':>4}  {'uniform':>10}  {'warped':>10}  {'guidance':>10}")
        for k, s, t, g in rows:
            print(f"{k:>4}  {s:>10.6f}  {t:>10.6f}  {g:>10.6f}")
    return EXIT_OK


def _cmd_editsim(args) -> int:
    controller = editctl.RegenController(
        avg_speed=args.avg_speed,
        target_tokens=args.target_tokens,
        mask_start=args.mask[0],
        mask_end=args.mask[1],
        max_rounds=args.max_rounds,
    )
    if not args.flags or set(args.flags) - {"0", "1"}:
        raise UsageError(f"--flags must be a string of 0s and 1s, "
                         f"got {args.flags!r}")
    flags = [ch == "1" for ch in args.flags]
    if args.frames:
        frames = [int(f) for f in args.frames.split(",")]
        if len(frames) != len(flags):
            raise UsageError(f"--frames gives {len(frames)} attempts but "
                             f"--flags gives {len(flags)}")
    else:
        frames = [int(controller.expected_frames)] * len(flags)
    outcomes = [editctl.GenerationOutcome(generated_frames=f, re_gen_flag=b)
                for f, b in zip(frames, flags)]
    decisions = editctl.run_regen(controller, outcomes)
    trace = []
    state = controller
    for decision in decisions:
        trace.append({
            "round": state.round,
            "action": decision.action,
            "too_short": decision.too_short,
            "flagged": decision.flagged,
            "mask": [decision.controller.mask_start,
                     decision.controller.mask_end],
            "repetition_penalty":
                decision.controller.penalty.repetition_penalty,
        })
        state = decision.controller
    print(json.dumps(trace, indent=2))
    return EXIT_OK


def _cmd_stitch(args) -> int:
    segments = []
    rate = None
    for path in args.inputs:
        samples, sample_rate = read_wav(path)
        if rate is None:
            rate = sample_rate
        elif sample_rate != rate:
            raise editctl.StitchError(f"{path} has rate {sample_rate}, "
                                      f"expected {rate}")
        segments.append(samples)
    out, plan = editctl.stitch(segments, rate, args.fade_s, args.overlap_s)
    write_wav(args.output, out, rate)
    if args.plan:
        Path(args.plan).write_text(
            json.dumps(plan.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    _progress(f"stitch: wrote {len(out)} samples at {rate} Hz to {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> _Parser:
    parser = _Parser(prog="voxkit",
                     description="Corpus curation and generation control "
                                 "for speech synthesis pipelines.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        return p

    p = add("ingest", _cmd_ingest, "convert source rows to a manifest")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--source", help="source tag for adapted rows")
    p.add_argument("--map", action="append", default=[], metavar="FIELD=KEY",
                   help="manifest field taken from this source key")
    p.add_argument("--default", action="append", default=[],
                   metavar="FIELD=VALUE", help="constant manifest field")

    p = add("normalize", _cmd_normalize, "normalize and romanize transcripts")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--profiles", help="directory of language profiles")
    p.add_argument("--no-romanize", action="store_true")
    p.add_argument("--split-zh-chars", action="store_true",
                   help="one romanized token per CJK character")
    p.add_argument("--skip-failed", action="store_true",
                   help="drop records that fail instead of aborting")

    p = add("align", _cmd_align, "force-align words against emissions")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--emissions", required=True,
                   help="directory of per-key emission files")
    p.add_argument("--score-mode", choices=("geometric", "arithmetic"),
                   default="geometric")
    p.add_argument("--skip-failed", action="store_true",
                   help="drop unalignable records instead of aborting")

    p = add("filter", _cmd_filter, "apply the quality filter chain")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--rejects", help="write rejected keys and reasons here")
    p.add_argument("--profiles")
    p.add_argument("--min-duration-s", type=float)
    p.add_argument("--max-duration-s", type=float)
    p.add_argument("--max-gap-s", type=float)
    p.add_argument("--threshold", action="append", default=[],
                   metavar="SPEC=VALUE",
                   help="confidence threshold: default=V, source.S=V, "
                        "language.L=V, or pair.S.L=V")

    p = add("fit-bounds", _cmd_fit_bounds,
            "fit speech-rate bounds from percentiles")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--language", "-l", required=True,
                   choices=SUPPORTED_LANGUAGES)
    p.add_argument("--percentile", type=float, default=1.0)

    p = add("curate-eval", _cmd_curate_eval, "build the evaluation subset")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--trims", help="write duration trim instructions here")
    p.add_argument("--min-confidence", type=float, default=0.9)
    p.add_argument("--min-words", type=int, default=5)
    p.add_argument("--min-duration-s", type=float, default=3.0)
    p.add_argument("--max-duration-s", type=float, default=15.0)
    p.add_argument("--trailing-silence-s", type=float, default=0.2)
    p.add_argument("--target", type=int, default=500,
                   help="records to keep per language")

    p = add("stats", _cmd_stats, "per-language corpus statistics")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--json", action="store_true")

    p = add("shard", _cmd_shard, "split a manifest into balanced shards")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output-dir", "-o", required=True)
    p.add_argument("--shards", "-n", type=int, required=True)
    p.add_argument("--prefix", default="shard_")

    p = add("sched", _cmd_sched, "print guidance and sampling schedules")
    p.add_argument("--steps", type=int, default=32)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--strength", type=float, default=5.0)
    p.add_argument("--json", action="store_true")

    p = add("editsim", _cmd_editsim, "trace the re-generation state machine")
    p.add_argument("--avg-speed", type=float, required=True,
                   help="frames per token")
    p.add_argument("--target-tokens", type=int, required=True)
    p.add_argument("--mask", type=int, nargs=2, required=True,
                   metavar=("START", "END"), help="edit mask in frames")
    p.add_argument("--max-rounds", type=int, default=3)
    p.add_argument("--flags", required=True,
                   help="retry flag per attempt, e.g. 1101")
    p.add_argument("--frames", help="comma-separated frames per attempt "
                                    "(default: the expected count)")

    p = add("stitch", _cmd_stitch, "cross-fade overlapping audio chunks")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--overlap-s", type=float, required=True)
    p.add_argument("--fade-s", type=float, default=0.01)
    p.add_argument("--plan", help="write the splice plan JSON here")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ManifestError, ProfileError, ConfigError, QualityError,
            CurationError, EmptyTextError, UnmappableCharacterError,
            AudioFormatError, json.JSONDecodeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AlignmentError, PipelineStageError, PipelineError,
            editctl.EditControlError, flowsched.ScheduleError) as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
