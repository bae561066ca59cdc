"""Acceptance suite: one check per criterion, each printed as a pass/fail line.

Run with ``pytest tests/test_acceptance.py``; the summary section
"acceptance criteria" lists every verdict.
"""

import math
import time

import numpy as np

from asymstft.cli import main, parse_report
from asymstft.metrics import measure_delay_snr, multires_mag_loss, multires_mag_loss_terms
from asymstft.nalr import CATALOG_FREQUENCIES, Audiogram, apply_amplification, design_fir, nalr_gains
from asymstft.process import magnitude_gain_processor
from asymstft.stft import StftConfig, latency_sweep, measure_impulse_latency, process_signal
from asymstft.wavio import read_wav, write_wav
from asymstft.window import WindowParams, cola_deviation, cola_envelope, make_window_pair, normalize_synthesis
from conftest import ACCEPTANCE_LINES, SWEEP_TRIPLES
from oracles import brute_force_multires_loss, dtft, w1_value, w2_value

FS = 32000
RESOLUTIONS = (128, 256, 512, 1024, 2048)


def verdict(number, title, checks, elapsed=None, limit=None):
    """Record one line per criterion and fail with the names of the failed checks."""
    if limit is not None:
        checks = dict(checks, **{f"runtime {elapsed:.2f}s < {limit}s": elapsed < limit})
    failed = [name for name, ok in checks.items() if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = "; ".join(checks) if not failed else "failed: " + "; ".join(failed)
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title} ({detail})")
    assert not failed, failed


def test_criterion_1_latency():
    start = time.perf_counter()
    config = StftConfig.from_params()
    latency = measure_impulse_latency(config)
    sweep = latency_sweep((256, 512, 1024), hop=64)
    elapsed = time.perf_counter() - start
    verdict(
        1,
        "impulse latency 128 samples, independent of window length",
        {
            f"default latency {latency} == 128": latency == 128,
            f"latency_ms {config.latency_ms} == 4.0": config.latency_ms == 4.0,
            f"sweep {sweep} all 128": all(v == 128 for v in sweep.values()),
        },
        elapsed,
        1.0,
    )


def test_criterion_2_perfect_reconstruction():
    start = time.perf_counter()
    x = np.random.default_rng(2).standard_normal(10 * FS)
    checks = {}
    for label, normalize in (("normalized", True), ("continuous un-normalized", False)):
        y = process_signal(x, StftConfig.from_params(normalize=normalize))
        delay, snr = measure_delay_snr(x, y[: x.size], 1000)
        checks[f"{label}: delay {delay} == 128"] = delay == 128
        checks[f"{label}: snr {snr:.1f} dB >= 200"] = snr >= 200.0
    elapsed = time.perf_counter() - start
    verdict(2, "10 s white noise reconstructs through identity", checks, elapsed, 5.0)


def test_criterion_3_cola():
    start = time.perf_counter()
    worst_continuous = max(
        cola_deviation(make_window_pair(WindowParams(n1=a, n2=b, hop=r)))[0] for a, b, r in SWEEP_TRIPLES
    )
    verbatim = make_window_pair(WindowParams(tail_variant="verbatim"))
    env = cola_envelope(verbatim)
    # deviation at the phase holding w1[n2-32]*w2[n2-32] + w1[n2+32]*w2[n2+32]
    derived = 1.0 - (math.cos(math.pi / 4) ** 2 + math.sin(math.pi / 8) * math.sin(math.pi / 4))
    at_phase = abs(1.0 - env[(448 - 32) % 64])
    true_max, phase = cola_deviation(verbatim)
    restored = cola_deviation(normalize_synthesis(verbatim))[0]
    elapsed = time.perf_counter() - start
    verdict(
        3,
        "COLA envelope verification",
        {
            f"{len(SWEEP_TRIPLES)} continuous triples, max deviation {worst_continuous:.1e} < 1e-12": (
                len(SWEEP_TRIPLES) >= 10 and worst_continuous < 1e-12
            ),
            f"verbatim deviation {at_phase:.6f} vs 1 - 0.7706": abs(at_phase - (1 - 0.7706)) < 1e-3,
            f"matches derived {derived:.6f}": abs(at_phase - derived) < 1e-12,
            f"normalized {restored:.1e} < 1e-12": restored < 1e-12,
            f"true verbatim max deviation {true_max:.6f} at phase {phase}": true_max >= at_phase,
        },
        elapsed,
        1.0,
    )


def test_criterion_4_window_tables():
    checks = {}
    for variant, denominator in (("continuous", 2), ("verbatim", 4)):
        pair = make_window_pair(WindowParams(tail_variant=variant))
        w1 = np.array([w1_value(n, 64, 448, 64, denominator) for n in range(512)])
        w2 = np.array([w2_value(n, 64, 448, 64) for n in range(512)])
        err = max(np.max(np.abs(pair.w1 - w1)), np.max(np.abs(pair.w2 - w2)))
        checks[f"{variant} max error {err:.1e} < 1e-12"] = err < 1e-12
    pair = make_window_pair()
    boundary = max(abs(pair.w1[0]), abs(pair.w1[64] - 1), abs(pair.w2[384]), abs(pair.w2[448] - 1))
    checks[f"w1[0]=0, w1[64]=1, w2[384]=0, w2[448]=1 within {boundary:.1e}"] = boundary < 1e-12
    verdict(4, "window tables match closed form", checks)


def test_criterion_5_multires_loss():
    start = time.perf_counter()
    gen = np.random.default_rng(5)
    x = gen.standard_normal(8192)
    y = x + 0.3 * gen.standard_normal(8192)
    zero = multires_mag_loss(x, x)
    base = multires_mag_loss(x, np.zeros_like(x))
    scaled = multires_mag_loss(2.5 * x, np.zeros_like(x))
    homogeneity = abs(scaled - 6.25 * base) / (6.25 * base)
    _, expected = brute_force_multires_loss(x, y, RESOLUTIONS)
    terms = multires_mag_loss_terms(x, y)
    worst = max(abs(terms[w] - e) / e for w, e in zip(RESOLUTIONS, expected))
    elapsed = time.perf_counter() - start
    verdict(
        5,
        "multi-resolution magnitude loss",
        {
            f"identical inputs give {zero}": zero == 0.0,
            f"homogeneity rel error {homogeneity:.1e} < 1e-9": homogeneity < 1e-9,
            f"brute force rel error {worst:.1e} < 1e-9 at {RESOLUTIONS}": worst < 1e-9,
        },
        elapsed,
        10.0,
    )


def test_criterion_6_nalr():
    start = time.perf_counter()
    flat = nalr_gains(Audiogram.flat(50))
    gen = np.random.default_rng(6)
    worst, symmetric = 0.0, True
    for _ in range(100):
        gains = nalr_gains(Audiogram(gen.uniform(0, 120, 6)))
        taps = design_fir(gains)
        symmetric &= bool(np.array_equal(taps, taps[::-1]))
        response = np.array([20 * math.log10(abs(dtft(taps, f, FS))) for f in CATALOG_FREQUENCIES])
        worst = max(worst, float(np.max(np.abs(response - gains))))
    elapsed = time.perf_counter() - start
    verdict(
        6,
        "NAL-R prescription and FIR fit",
        {
            f"flat-50 gain at 1 kHz {flat[2]} == 24.0": abs(flat[2] - 24.0) < 1e-12,
            f"worst FIR error {worst:.2e} dB < 0.5 over 100 audiograms": worst < 0.5,
            "taps exactly symmetric": symmetric,
        },
        elapsed,
        10.0,
    )


def test_criterion_7_streaming_equivalence():
    x = np.random.default_rng(7).standard_normal(2 * FS)
    config = StftConfig.from_params()
    outputs = {b: process_signal(x, config, magnitude_gain_processor(), block_size=b) for b in (1, 7, 64, 4096)}
    reference = outputs[4096]
    checks = {f"block {b} bit-identical": np.array_equal(y, reference) for b, y in outputs.items()}
    verdict(7, "block size does not change output", checks)


def run_cli(capsys, argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_criterion_8_cli(capsys, tmp_path):
    gen = np.random.default_rng(8)
    x = (0.2 * gen.standard_normal((1, FS))).astype(np.float32).astype(np.float64)
    noisy = (x + 0.05 * gen.standard_normal(x.shape)).astype(np.float32).astype(np.float64)
    ref_path, in_path = tmp_path / "ref.wav", tmp_path / "in.wav"
    write_wav(ref_path, FS, x)
    write_wav(in_path, FS, noisy)
    audiogram = tmp_path / "ag.txt"
    audiogram.write_text("30 40 50 55 60 65\n")
    common = ["process", in_path, "--reference", ref_path, "--processor", "gain", "--nalr", audiogram,
              "--format", "json-lines"]
    code_a, out_a = run_cli(capsys, common + ["-o", tmp_path / "a.wav"])
    code_b, out_b = run_cli(capsys, common + ["-o", tmp_path / "b.wav"])
    identical = (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()
    report = parse_report(out_a)

    _, noisy_read = read_wav(in_path)
    y = process_signal(noisy_read, StftConfig.from_params(), magnitude_gain_processor(), block_size=4096)
    y = apply_amplification(y, [Audiogram(np.array([30, 40, 50, 55, 60, 65.0]))])
    aligned = y[0, 128 : 128 + FS]
    delay, snr = measure_delay_snr(x[0], y[0, :FS], FS // 2 - 1)
    expected = {
        "latency_samples": 128,
        "ch0.delay": delay,
        "ch0.snr_db": snr,
        "ch0.gain_db": 10 * math.log10(np.sum(aligned**2) / np.sum(x[0] ** 2)),
        "ch0.loss": multires_mag_loss(x[0], aligned),
    }
    expected.update({f"ch0.loss.{w}": v for w, v in multires_mag_loss_terms(x[0], aligned).items()})
    mismatched = [k for k, v in expected.items() if report.get(k) != v]

    code_e, out_e = run_cli(capsys, ["eval-loss", ref_path, in_path, "--format", "json-lines"])
    eval_report = parse_report(out_e)
    eval_ok = eval_report["ch0.loss"] == multires_mag_loss(x[0], noisy_read[0])
    verdict(
        8,
        "CLI determinism and library parity",
        {
            "exit codes 0": code_a == code_b == code_e == 0,
            "repeated process output files byte-identical": identical,
            "repeated reports identical": out_a == out_b,
            f"{len(expected)} process metrics equal library values": not mismatched,
            "eval-loss equals library value": eval_ok,
        },
    )
