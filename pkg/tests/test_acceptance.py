"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single ACCEPTANCE PASS/FAIL line so the suite's verdict
can be read off a terminal or CI log at a glance.
"""

import itertools
import json
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

import test_aligner as aligner_tests
from voxkit import (
    EvalCriteria,
    FilterConfig,
    GenerationOutcome,
    GuidanceParams,
    PenaltyParams,
    PipelineConfig,
    RegenController,
    SwayParams,
    UtteranceRecord,
    WordSpan,
    apply_penalty,
    cfg_strength,
    compute_stats,
    eligible,
    force_align,
    load_profiles,
    normalize,
    penalty_factor,
    romanize,
    run_chain,
    run_pipeline,
    run_regen,
    save_emissions,
    select_eval,
    stats_from_totals,
    stitch,
    sway_grid,
    write_manifest,
)

PROFILES = load_profiles()


@contextmanager
def criterion(capsys, number, label):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"ACCEPTANCE FAIL [{number:02d}] {label}")
        raise
    with capsys.disabled():
        print(f"ACCEPTANCE PASS [{number:02d}] {label}")


def zh_record(key, n_chars, duration_s):
    text = "好" * n_chars
    return UtteranceRecord(key=key, language="zh", audio_ref=f"a/{key}.wav",
                           duration_s=duration_s, raw_text=text,
                           normalized_text=text)


def en_record(key, n_words, duration_s):
    text = " ".join("word" for _ in range(n_words))
    return UtteranceRecord(key=key, language="en", audio_ref=f"a/{key}.wav",
                           duration_s=duration_s, raw_text=text,
                           normalized_text=text)


def test_01_stats_from_record_level_manifest(capsys):
    with criterion(capsys, 1, "per-language stats from a record-level manifest"):
        started = time.perf_counter()
        # 500 zh records summing to 18,627 words over 75.84 minutes
        total_words, n = 18_627, 500
        extras = total_words - 37 * n            # records carrying 38 words
        per_duration = 75.84 * 60.0 / n
        records = [
            zh_record(f"zh{i:04d}", 38 if i < extras else 37, per_duration)
            for i in range(n)
        ]
        stats = compute_stats(records, unit="minutes")
        row = stats.rows[0]
        assert row.language == "zh"
        assert row.utterances == 500
        assert row.total_words == 18_627
        assert abs(row.avg_words - 37.25) <= 0.01
        assert abs(row.avg_duration_s - 9.10) <= 0.01

        # a 5,000-record corpus totalling 78,722 words
        total_words, n = 78_722, 5_000
        extras = total_words - 15 * n            # records carrying 16 words
        records = [
            en_record(f"en{i:04d}", 16 if i < extras else 15, 6.0)
            for i in range(n)
        ]
        stats = compute_stats(records)
        assert stats.total.utterances == 5_000
        assert stats.total.total_words == 78_722
        assert abs(stats.total.avg_words - 15.74) <= 0.01
        assert time.perf_counter() - started < 1.0


def test_02_stats_from_aggregate_totals(capsys):
    with criterion(capsys, 2, "average duration from aggregate totals"):
        started = time.perf_counter()
        row = stats_from_totals("zh", utterances=17_780_000,
                                total_duration_s=32_920.0 * 3600.0,
                                total_words=0)
        assert abs(row.avg_duration_s - 6.67) <= 0.02
        assert time.perf_counter() - started < 1.0


def test_03_aligner_matches_exhaustive_enumeration(capsys):
    with criterion(capsys, 3, "aligner equals exhaustive path enumeration"):
        started = time.perf_counter()
        rng = np.random.default_rng(727)
        infeasible = 0
        for _ in range(500):
            n_frames = int(rng.integers(1, 9))
            vocab_size = int(rng.integers(2, 5))
            n_labels = int(rng.integers(1, 4))
            labels = [int(rng.integers(1, vocab_size))
                      for _ in range(n_labels)]
            logits = rng.normal(scale=2.0, size=(n_frames, vocab_size))
            emissions = aligner_tests.emissions_from_logits(logits)
            tokens = [emissions.vocab[i] for i in labels]
            expected = aligner_tests.best_path_by_enumeration(
                emissions.log_probs, labels)
            if expected == -math.inf:
                infeasible += 1
                with pytest.raises(Exception):
                    force_align(emissions, tokens)
                continue
            result = force_align(emissions, tokens)
            assert abs(result.path_logprob - expected) <= 1e-9
        assert infeasible > 0
        assert time.perf_counter() - started < 30.0


def boundary_record(duration_s=8.0, confidence=0.95, gap_s=None,
                    n_words=8):
    """A record that passes every filter unless one knob is pushed."""
    words = []
    token = "aaaa"
    if gap_s is None:
        step = duration_s / n_words
        for i in range(n_words):
            words.append(WordSpan(word=token, start_s=round(i * step, 3),
                                  end_s=round((i + 1) * step, 3),
                                  score=confidence))
    else:
        token = "aaaaaaaaaaaa"
        mid = (duration_s - gap_s) / 2.0
        words.append(WordSpan(word=token, start_s=0.0, end_s=mid,
                              score=confidence))
        words.append(WordSpan(word=token, start_s=mid + gap_s,
                              end_s=duration_s, score=confidence))
        n_words = 2
    text = " ".join(token for _ in range(n_words))
    return UtteranceRecord(key="b", language="en", audio_ref="a/b.wav",
                           duration_s=duration_s, raw_text=text,
                           normalized_text=text, words=tuple(words),
                           avg_confidence=confidence)


def test_04_filter_boundary_table(capsys):
    with criterion(capsys, 4, "filter and eligibility boundary behaviors"):
        started = time.perf_counter()
        config = FilterConfig(profiles=PROFILES)

        filter_table = [
            (boundary_record(duration_s=0.5, n_words=1), ()),
            (boundary_record(duration_s=0.499, n_words=1), ("too_short",)),
            (boundary_record(duration_s=30.0, n_words=16), ()),
            (boundary_record(duration_s=30.001, n_words=16), ("too_long",)),
            (boundary_record(gap_s=4.0), ()),
            (boundary_record(gap_s=4.01), ("long_gap",)),
            (boundary_record(confidence=0.3), ("low_confidence",)),
            (boundary_record(confidence=0.301), ()),
        ]
        for record, expected in filter_table:
            assert run_chain(record, config).reasons == expected, record

        criteria = EvalCriteria()
        eval_table = [
            (dict(confidence=0.9), "low_score"),
            (dict(confidence=0.901, n_words=5), "few_words"),
            (dict(confidence=0.901, n_words=6), None),
            (dict(duration_s=3.0), None),
            (dict(duration_s=2.999), "duration"),
            (dict(duration_s=15.0), None),
            (dict(duration_s=15.001), "duration"),
        ]
        for knobs, expected in eval_table:
            verdict = eligible(boundary_record(**knobs), criteria)
            assert (verdict.reason or None) == expected, knobs
            assert verdict.ok is (expected is None)
        assert time.perf_counter() - started < 1.0


def test_05_schedule_kernels(capsys):
    with criterion(capsys, 5, "guidance decay and warped grid identities"):
        rng = np.random.default_rng(505)
        for _ in range(50):
            strength = float(rng.uniform(0.0, 12.0))
            params = GuidanceParams(strength)
            assert abs(cfg_strength(0.0, params) - strength) <= 1e-12
            assert abs(cfg_strength(1.0, params)) <= 1e-12
            assert abs(cfg_strength(0.5, params) - strength / 4.0) <= 1e-12

        uniform = sway_grid(SwayParams(gamma=0.0, steps=17))
        assert np.max(np.abs(uniform - np.linspace(0, 1, 18))) <= 1e-12
        assert sway_grid(SwayParams(gamma=1.0, steps=2)).tolist() == \
            [0.0, 0.25, 1.0]

        for _ in range(1_000):
            strength = float(rng.uniform(0.0, 12.0))
            gamma = float(rng.uniform(-0.95, 3.0))
            steps = int(rng.integers(1, 65))
            grid = sway_grid(SwayParams(gamma=gamma, steps=steps))
            assert grid[0] == 0.0 and grid[-1] == 1.0
            assert np.all(np.diff(grid) > 0)
            params = GuidanceParams(strength)
            t_lo, t_hi = sorted(rng.uniform(0.0, 1.0, size=2))
            assert cfg_strength(t_lo, params) >= cfg_strength(t_hi, params)


def test_06_penalty_kernel(capsys):
    with criterion(capsys, 6, "repetition penalty closed form"):
        rng = np.random.default_rng(606)
        for _ in range(1_000):
            rp = float(rng.uniform(0.0, 10.0))
            num_gen = int(rng.integers(0, 5_000))
            factor = penalty_factor(PenaltyParams(rp), num_gen)
            assert factor == rp / 100.0 * num_gen + 1.0

        for _ in range(200):
            logits = rng.normal(scale=4.0, size=16)
            history = rng.integers(0, 16, size=8).tolist()
            factor = penalty_factor(PenaltyParams(float(rng.uniform(0, 5))),
                                    int(rng.integers(1, 100)))
            out = apply_penalty(logits, history, factor)
            for token in history:
                assert out[token] <= logits[token] + 1e-12

        logits = rng.normal(size=16)
        identity = apply_penalty(logits, list(range(16)),
                                 penalty_factor(PenaltyParams(5.0), 0))
        assert np.array_equal(identity, logits)


def test_07_regen_state_machine(capsys):
    with criterion(capsys, 7, "regen loop terminates and never relaxes"):
        for flags in itertools.product([False, True], repeat=4):
            start = RegenController(avg_speed=4.0, target_tokens=25,
                                    mask_start=100, mask_end=200,
                                    max_rounds=3)
            outcomes = [GenerationOutcome(int(start.expected_frames), flag)
                        for flag in flags]
            decisions = run_regen(start, outcomes)
            assert len(decisions) <= 4
            assert decisions[-1].action in ("accept", "give_up")
            trajectory = [start] + [d.controller for d in decisions]
            widths = [c.mask_end - c.mask_start for c in trajectory]
            penalties = [c.penalty.repetition_penalty for c in trajectory]
            assert widths == sorted(widths)
            assert penalties == sorted(penalties)

        # the shortness trigger is strictly below half the expected count
        ctl = RegenController(avg_speed=2.0, target_tokens=10,
                              mask_start=0, mask_end=50)
        assert ctl.expected_frames == 20.0
        assert run_regen(ctl, [GenerationOutcome(9)])[0].too_short
        assert not run_regen(ctl, [GenerationOutcome(10)])[0].too_short


def test_08_stitch_fidelity(capsys):
    with criterion(capsys, 8, "stitch splice stays within source roughness"):
        rate = 16_000
        overlap_s = 0.25
        t = np.arange(int(rate * 2.0)) / rate
        wave = (0.5 * np.sin(2 * np.pi * 440.0 * t) * 32767).astype(np.int16)
        n_ov = int(overlap_s * rate)
        half = len(wave) // 2
        first, second = wave[: half + n_ov], wave[half:]

        out, plan = stitch([first, second], rate, fade_s=0.010,
                           overlap_s=overlap_s)
        splice = plan.splices[0]

        def max_jump(samples):
            return int(np.max(np.abs(np.diff(samples.astype(np.int64)))))

        source_jump = max(max_jump(first), max_jump(second))
        window = out[max(splice.overlap_start - 1, 0):
                     splice.overlap_start + n_ov + 1]
        assert max_jump(window) <= source_jump

        # outside the overlap both sources survive bit-exactly
        boundary = len(first) - n_ov
        assert np.array_equal(out[:boundary], first[:boundary])
        assert np.array_equal(out[len(first):], second[n_ov:])


def eval_pool_record(key, duration_s, n_chars):
    text = "x" * n_chars
    words = tuple(WordSpan(word="x", start_s=round(i * duration_s / 6, 3),
                           end_s=round((i + 1) * duration_s / 6, 3),
                           score=0.95) for i in range(6))
    return UtteranceRecord(key=key, language="en", audio_ref=f"a/{key}.wav",
                           duration_s=duration_s, raw_text=text,
                           normalized_text=text, words=words,
                           avg_confidence=0.95)


def test_09_eval_selection_optimality(capsys):
    with criterion(capsys, 9, "eval selection keeps the most typical records"):
        rng = np.random.default_rng(909)
        for trial in range(200):
            pool_size = int(rng.integers(1, 1_001))
            target = int(rng.integers(1, 60))
            criteria = EvalCriteria(target_per_language=target)
            pool = []
            for i in range(pool_size):
                duration = float(rng.uniform(3.0, 15.0))
                n_chars = int(rng.integers(
                    max(1, int(2.1 * duration)), int(27.9 * duration)))
                pool.append(eval_pool_record(f"p{i:04d}", duration, n_chars))
            chosen = select_eval(pool, criteria)
            assert len(chosen) == min(target, pool_size)
            assert [r.key for r in chosen] == sorted(r.key for r in chosen)

            ratios = {r.key: len(r.normalized_text) / r.duration_s
                      for r in pool}
            mean = sum(ratios.values()) / len(ratios)
            chosen_keys = {r.key for r in chosen}
            worst_chosen = max(abs(ratios[k] - mean) for k in chosen_keys)
            left_out = [abs(ratios[r.key] - mean) for r in pool
                        if r.key not in chosen_keys]
            if left_out:
                assert min(left_out) >= worst_chosen

            if trial % 10 == 0:
                shuffled = list(pool)
                rng.shuffle(shuffled)
                again = select_eval(shuffled, criteria)
                assert [r.key for r in again] == [r.key for r in chosen]


FIXTURE_TEXTS = {
    "en": "the rain stopped just before the evening train arrived",
    "de": "der alte garten liegt still hinter dem hohen zaun",
    "fr": "le petit marché ouvre ses portes chaque matin d'été",
    "es": "la ciudad despierta lentamente bajo un cielo muy claro",
    "it": "il vecchio ponte attraversa il fiume vicino alla piazza",
    "pt": "o barco pequeno voltou ao porto antes da tempestade",
    "id": "pagi ini pasar kota sangat ramai dan penuh warna",
    "vi": "buổi sáng hôm nay trời trong xanh và mát mẻ",
    "ru": "старый дом стоит на холме возле тихой реки",
    "zh": "清晨的街道安静得只听见风声",
}


def peaked_emissions(tokens, duration_s):
    """Emissions whose best path spells the tokens exactly."""
    from voxkit import BLANK_TOKEN, EmissionMatrix
    chars = [c for tok in tokens for c in tok]
    vocab = [BLANK_TOKEN] + sorted(set(chars))
    ext = [0]
    for ch in chars:
        ext.extend([vocab.index(ch), 0])
    probs = np.full((len(ext), len(vocab)), 1e-4)
    for t, label in enumerate(ext):
        probs[t, label] = 1.0
    probs /= probs.sum(axis=1, keepdims=True)
    return EmissionMatrix(np.log(probs), duration_s / len(ext), tuple(vocab))


def build_fixture(tmp_path, n_records=100):
    """A 100-record corpus plus matching synthetic emissions."""
    languages = sorted(FIXTURE_TEXTS)
    records = []
    emissions_dir = tmp_path / "emissions"
    emissions_dir.mkdir()
    for i in range(n_records):
        language = languages[i % len(languages)]
        text = FIXTURE_TEXTS[language]
        key = f"fx{i:03d}"
        normalized = normalize(text, PROFILES[language])
        n_chars = sum(1 for ch in normalized if not ch.isspace())
        duration = round(n_chars / 5.0 + (i % 7) * 0.3, 3)
        records.append(UtteranceRecord(
            key=key, language=language, audio_ref=f"a/{key}.wav",
            duration_s=duration, raw_text=text, source="fixture"))
        tokens = romanize(normalized, language)
        save_emissions(peaked_emissions(tokens, duration),
                       emissions_dir / f"{key}.npz")
    # a couple of records that must be rejected, deterministically
    records.append(UtteranceRecord(
        key="fx_bad_lang", language="xx", audio_ref="a/x.wav",
        duration_s=4.0, raw_text="whatever"))
    records.append(UtteranceRecord(
        key="fx_no_emissions", language="en", audio_ref="a/y.wav",
        duration_s=4.0, raw_text="these words have no emission file"))
    manifest = tmp_path / "input.jsonl"
    write_manifest(records, manifest)
    return manifest, emissions_dir


def test_10_pipeline_determinism(capsys, tmp_path):
    with criterion(capsys, 10, "full pipeline reruns byte-identically"):
        manifest, emissions_dir = build_fixture(tmp_path)

        def run_into(out_name, workers):
            config = PipelineConfig(
                input_path=manifest, output_dir=tmp_path / out_name,
                filter_config=FilterConfig(profiles=PROFILES),
                profiles=PROFILES, emissions_dir=emissions_dir,
                shard_count=2, workers=workers)
            return run_pipeline(config)

        summary_a = run_into("out_a", workers=1)
        summary_b = run_into("out_b", workers=4)
        assert summary_a == summary_b
        assert summary_a["input_records"] == 102
        assert summary_a["output_records"] >= 90

        names_a = sorted(p.name for p in (tmp_path / "out_a").iterdir())
        names_b = sorted(p.name for p in (tmp_path / "out_b").iterdir())
        assert names_a == names_b
        assert {"normalize.jsonl", "romanize.jsonl", "align.jsonl",
                "filter.jsonl", "rejections.jsonl", "stats.json",
                "summary.json", "shard_000.jsonl",
                "shard_001.jsonl"} <= set(names_a)
        for name in names_a:
            bytes_a = (tmp_path / "out_a" / name).read_bytes()
            bytes_b = (tmp_path / "out_b" / name).read_bytes()
            assert bytes_a == bytes_b, f"{name} differs between runs"
