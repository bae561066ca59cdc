"""
Command-line front end.

Subcommands::

    gen-windows      write the (n, w1, w2) table and print frame/latency summary
    verify-cola      check the overlap-add envelope against a tolerance
    process          WAV -> analyze -> processors -> synthesize [-> NAL-R] -> WAV
    measure-latency  impulse test through the pipeline, plus a window-length sweep
    eval-loss        multi-resolution magnitude loss and delay/SNR between two WAVs

Reports are ``key: value`` lines by default, or ``--format csv`` /
``--format json-lines``. Floats are printed with ``repr`` so every reported
number parses back to exactly the value the library returned. Exit codes
are listed in :data:`asymstft.errors.EXIT_CODES`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np

from asymstft.errors import (
    AsymStftError,
    InputOutputError,
    ParameterError,
    SampleRateMismatchError,
    ShapeError,
    UndefinedSnrError,
    VerificationError,
)
from asymstft.metrics import MultiResConfig, measure_delay_snr, multires_mag_loss_terms
from asymstft.nalr import DEFAULT_NFIR, apply_amplification, read_audiograms
from asymstft.process import (
    SuppressionParams,
    chain,
    identity_processor,
    magnitude_gain_processor,
)
from asymstft.stft import StftConfig, latency_sweep, measure_impulse_latency, process_signal
from asymstft.wavio import read_wav, resample, write_wav
from asymstft.window import (
    TailVariant,
    WindowParams,
    cola_deviation,
    make_window_pair,
    normalize_synthesis,
    window_table,
)

Report = list[tuple[str, Any]]


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: Report, fmt: str, stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    if fmt == "text":
        for key, value in report:
            stream.write(f"{key}: {_format_value(value)}\n")
    elif fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in report:
            writer.writerow([key, _format_value(value)])
    else:
        for key, value in report:
            stream.write(json.dumps({"key": key, "value": value}) + "\n")


def parse_report(text: str, fmt: str = "json-lines") -> dict[str, Any]:
    """Inverse of :func:`emit_report` for the json-lines and text formats."""
    if fmt == "json-lines":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        return {r["key"]: r["value"] for r in records}
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition(": ")
        out[key] = value
    return out


def _window_params(args) -> WindowParams:
    return WindowParams(
        n1=args.n1,
        n2=args.n2,
        hop=args.hop,
        sample_rate=float(args.sample_rate),
        tail_variant=TailVariant(args.tail),
    )


def _summary(params: WindowParams) -> Report:
    ms = 1000.0 / params.sample_rate
    return [
        ("window_samples", params.length),
        ("window_ms", params.length * ms),
        ("hop_samples", params.hop),
        ("hop_ms", params.hop * ms),
        ("latency_samples", params.latency),
        ("latency_ms", params.latency * ms),
    ]


def cmd_gen_windows(args) -> tuple[Report, int]:
    params = _window_params(args)
    pair = make_window_pair(params)
    if args.normalize:
        pair = normalize_synthesis(pair)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for n, w1, w2 in window_table(pair):
        writer.writerow([int(n), repr(float(w1)), repr(float(w2))])
    _write_text(args.output, buf.getvalue())
    report = _summary(params) + [("tail_variant", params.tail_variant.value), ("rows", pair.length)]
    return report, 0


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputOutputError(f"{path}: {exc.strerror}") from None


def cmd_verify_cola(args) -> tuple[Report, int]:
    params = _window_params(args)
    pair = make_window_pair(params)
    deviation, phase = cola_deviation(pair)
    passed = deviation <= args.tolerance
    report: Report = [
        ("tail_variant", params.tail_variant.value),
        ("tolerance", float(args.tolerance)),
        ("max_deviation", deviation),
        ("worst_phase", phase),
        ("status", "pass" if passed else "fail"),
    ]
    if args.normalize:
        normalized = normalize_synthesis(pair)
        deviation, phase = cola_deviation(normalized)
        passed = deviation <= args.tolerance
        report += [
            ("normalized_max_deviation", deviation),
            ("normalized_worst_phase", phase),
            ("normalized_status", "pass" if passed else "fail"),
        ]
    return report, 0 if passed else VerificationError.exit_code


def build_processor(names: list[str], args):
    """Chain the selected processors, in command-line order."""
    names = names or ["identity"]
    gain_flags = {k: getattr(args, k) for k in ("alpha", "beta", "g_min") if getattr(args, k) is not None}
    if gain_flags and "gain" not in names:
        raise ParameterError("--alpha/--beta/--g-min require --processor gain")
    members = []
    for name in names:
        if name == "identity":
            members.append(identity_processor())
        else:
            members.append(magnitude_gain_processor(SuppressionParams(**gain_flags)))
    return members[0] if len(members) == 1 else chain(members)


def _load(path: str, target_rate: int, allow_resample: bool) -> np.ndarray:
    rate, samples = read_wav(path)
    if rate != target_rate:
        if not allow_resample:
            raise SampleRateMismatchError(
                f"{path}: sample rate {rate} Hz differs from {target_rate} Hz (use --resample)"
            )
        samples = resample(samples, rate, target_rate)
    return samples


def _default_max_delay(n: int, requested: int | None) -> int:
    limit = max(0, math.ceil(n / 2) - 1)
    return limit if requested is None else min(int(requested), limit)


def compare_signals(reference: np.ndarray, estimate: np.ndarray, max_delay: int | None) -> Report:
    """Per-channel multi-resolution loss and delay/SNR of ``estimate`` vs ``reference``.

    Both arrays are ``(channels, n)``; ``estimate`` is expected to be
    time-aligned already for the loss entries.
    """
    if reference.shape != estimate.shape:
        raise ShapeError(f"shape mismatch: reference {reference.shape} vs estimate {estimate.shape}")
    report: Report = []
    n = reference.shape[1]
    config = MultiResConfig()
    for ch in range(reference.shape[0]):
        ref, est = reference[ch], estimate[ch]
        prefix = f"ch{ch}."
        terms = multires_mag_loss_terms(ref, est, config)
        for w, value in terms.items():
            report.append((f"{prefix}loss.{w}", value))
        report.append((f"{prefix}loss", float(np.mean(list(terms.values())))))
        try:
            delay, snr = measure_delay_snr(ref, est, _default_max_delay(n, max_delay))
            report += [(f"{prefix}delay", delay), (f"{prefix}snr_db", snr)]
        except UndefinedSnrError:
            report += [(f"{prefix}delay", "undefined"), (f"{prefix}snr_db", "undefined")]
    return report


def cmd_process(args) -> tuple[Report, int]:
    params = _window_params(args)
    processor = build_processor(args.processor, args)
    rate = int(args.sample_rate)
    if args.block_size is not None and args.block_size < 1:
        raise ParameterError("--block-size must be positive")
    audiograms = read_audiograms(args.nalr) if args.nalr else None

    x = _load(args.input, rate, args.resample)
    reference = _load(args.reference, rate, args.resample) if args.reference else None
    if audiograms is not None and len(audiograms) != x.shape[0]:
        raise ShapeError(f"{x.shape[0]} channel(s) but audiogram has {len(audiograms)} ear(s)")

    config = StftConfig.from_params(
        params, normalize=args.normalize, fft_size=args.fft_size, num_channels=x.shape[0]
    )
    y = process_signal(x, config, processor, block_size=args.block_size)
    if audiograms is not None:
        y = apply_amplification(y, audiograms, nfir=args.nfir, sample_rate=rate)
    write_wav(args.output, rate, y, pcm16=args.pcm16)

    latency = config.latency
    report: Report = [
        ("channels", x.shape[0]),
        ("input_samples", x.shape[1]),
        ("output_samples", y.shape[1]),
        ("latency_samples", latency),
        ("latency_ms", config.latency_ms),
    ]
    if reference is not None:
        n = reference.shape[1]
        if reference.shape[0] != y.shape[0] or n != x.shape[1]:
            raise ShapeError("reference must match the input's channel count and length")
        report += _reference_report(reference, y, latency, args.max_delay)
    return report, 0


def _reference_report(reference: np.ndarray, y: np.ndarray, latency: int, max_delay: int | None) -> Report:
    n = reference.shape[1]
    report: Report = []
    for ch in range(reference.shape[0]):
        ref, out = reference[ch], y[ch]
        prefix = f"ch{ch}."
        try:
            delay, snr = measure_delay_snr(ref, out[:n], _default_max_delay(n, max_delay))
            report += [(f"{prefix}delay", delay), (f"{prefix}snr_db", snr)]
        except UndefinedSnrError:
            report += [(f"{prefix}delay", "undefined"), (f"{prefix}snr_db", "undefined")]
        aligned = out[latency : latency + n]
        ref_energy = float(np.sum(ref**2))
        if ref_energy > 0.0:
            report.append((f"{prefix}gain_db", 10.0 * math.log10(float(np.sum(aligned**2)) / ref_energy)))
        if n >= max(MultiResConfig().window_sizes):
            terms = multires_mag_loss_terms(ref, aligned)
            report += [(f"{prefix}loss.{w}", v) for w, v in terms.items()]
            report.append((f"{prefix}loss", float(np.mean(list(terms.values())))))
    return report


def cmd_measure_latency(args) -> tuple[Report, int]:
    params = _window_params(args)
    config = StftConfig.from_params(params, fft_size=args.fft_size)
    measured = measure_impulse_latency(config)
    report: Report = [
        ("window_samples", params.length),
        ("hop_samples", params.hop),
        ("latency_samples", measured),
        ("latency_ms", 1000.0 * measured / params.sample_rate),
        ("expected_samples", config.latency),
    ]
    sweep = latency_sweep(
        args.sweep, params.hop, n1=params.n1, sample_rate=params.sample_rate,
        tail_variant=params.tail_variant,
    )
    report += [(f"sweep.{length}", value) for length, value in sweep.items()]
    consistent = measured == config.latency and all(v == config.latency for v in sweep.values())
    report.append(("status", "pass" if consistent else "fail"))
    return report, 0 if consistent else VerificationError.exit_code


def cmd_eval_loss(args) -> tuple[Report, int]:
    rate = int(args.sample_rate)
    ref = _load(args.reference, rate, args.resample)
    est = _load(args.estimate, rate, args.resample)
    return compare_signals(ref, est, args.max_delay), 0


def _add_window_args(p: argparse.ArgumentParser, normalize_default: bool) -> None:
    g = p.add_argument_group("window")
    g.add_argument("--n1", type=int, default=64, help="analysis rise length (default 64)")
    g.add_argument("--n2", type=int, default=448, help="end of the flat section (default 448)")
    g.add_argument("--hop", type=int, default=64, help="hop size R (default 64)")
    g.add_argument("--sample-rate", type=int, default=32000, help="processing rate in Hz")
    g.add_argument("--tail", choices=[v.value for v in TailVariant], default="continuous",
                   help="analysis tail variant (default continuous)")
    g.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=normalize_default,
                   help="divide w2 by the overlap-add envelope")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["text", "csv", "json-lines"], default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymstft", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-windows", help="export the window table as CSV")
    _add_window_args(p, normalize_default=False)
    p.add_argument("-o", "--output", required=True, help="CSV path (rows: n,w1,w2)")
    _add_format(p)
    p.set_defaults(func=cmd_gen_windows)

    p = sub.add_parser("verify-cola", help="check the overlap-add envelope")
    _add_window_args(p, normalize_default=False)
    p.add_argument("--tolerance", type=float, default=1e-10)
    _add_format(p)
    p.set_defaults(func=cmd_verify_cola)

    p = sub.add_parser("process", help="run a WAV file through the pipeline")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    _add_window_args(p, normalize_default=True)
    p.add_argument("--fft-size", type=int, default=None)
    p.add_argument("--processor", action="append", choices=["identity", "gain"],
                   help="frame processor; repeat to chain (default identity)")
    p.add_argument("--alpha", type=float, default=None, help="noise-floor smoothing (default 0.98)")
    p.add_argument("--beta", type=float, default=None, help="over-subtraction (default 1.0)")
    p.add_argument("--g-min", type=float, default=None, help="gain floor (default 0.1)")
    p.add_argument("--nalr", metavar="AUDIOGRAM", help="apply NAL-R amplification for this audiogram file")
    p.add_argument("--nfir", type=int, default=DEFAULT_NFIR)
    p.add_argument("--reference", help="report delay/SNR, gain and loss against this WAV")
    p.add_argument("--max-delay", type=int, default=None)
    p.add_argument("--resample", action="store_true", help="resample inputs to --sample-rate")
    p.add_argument("--pcm16", action="store_true", help="write dithered PCM16 instead of float32")
    p.add_argument("--block-size", type=int, default=4096, help="streaming block size in samples")
    _add_format(p)
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("measure-latency", help="impulse latency through the pipeline")
    _add_window_args(p, normalize_default=True)
    p.add_argument("--fft-size", type=int, default=None)
    p.add_argument("--sweep", type=int, nargs="+", default=[256, 512, 1024],
                   help="analysis window lengths to sweep at fixed hop")
    _add_format(p)
    p.set_defaults(func=cmd_measure_latency)

    p = sub.add_parser("eval-loss", help="compare two WAV files")
    p.add_argument("reference")
    p.add_argument("estimate")
    p.add_argument("--sample-rate", type=int, default=32000)
    p.add_argument("--resample", action="store_true")
    p.add_argument("--max-delay", type=int, default=None)
    _add_format(p)
    p.set_defaults(func=cmd_eval_loss)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = args.func(args)
    except AsymStftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    emit_report(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
