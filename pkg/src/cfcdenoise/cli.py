"""Command-line front end: denoise, decompose, noise, metrics, bench, theory.

Every subcommand is deterministic given its flags (including --seed); the
only timing that reaches a file is the wall_seconds column of the bench
CSV, whose row shape requires it. Numbers are serialized with 9
significant digits, and each CSV carries comment lines echoing the flags
that produced it.

Exit codes: 0 success, 1 input/output failure, 2 bad flags or malformed
manifest, 3 training divergence.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__
from .denoiser import TrainConfig, ablate, denoise
from .errors import DimensionError, DivergenceError, FormatError, ParameterError
from .freq import decompose
from .image import Image, load_image, png_has_alpha, save_image, save_raw
from .losses import LossWeights
from .metrics import psnr, ssim
from .noiselab import (
    DEFAULT_BAND_A,
    DEFAULT_BAND_B,
    NoiseSpec,
    add_noise,
    measure_noise_std,
    theory_report,
)

NOISE_KINDS = ("white", "pink", "correlated")


def g9(value) -> str:
    """Format one number with 9 significant digits; None becomes blank."""
    if value is None:
        return ""
    return format(float(value), ".9g")


def default_config_hash() -> str:
    digest = hashlib.sha256(repr(TrainConfig()).encode("utf-8")).hexdigest()
    return digest[:12]


def version_string() -> str:
    return f"cfcdenoise {__version__} (default-config {default_config_hash()})"


def parse_float_list(text: str, count: int, flag: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise ParameterError(f"{flag} needs {count} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ParameterError(f"{flag} has a non-numeric entry: {text!r}") from exc


def parse_std(text: str) -> float:
    """Noise level as a plain float or a NUM/DEN fraction like 25/255."""
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"bad --std value: {text!r}") from exc


def build_train_config(args) -> TrainConfig:
    fc = parse_float_list(args.fc, 3, "--fc")
    fref = parse_float_list(args.fref, 2, "--fref")
    w = parse_float_list(args.weights, 3, "--weights")
    return TrainConfig(
        f_c1=fc[0],
        f_c2=fc[1],
        f_c3=fc[2],
        f_ref1=fref[0],
        f_ref2=fref[1],
        weights=LossWeights(w1=w[0], w2=w[1], w3=w[2]),
        iterations=args.iters,
        lr=args.lr,
        seed=args.seed,
        depth=args.depth,
    )


def train_flag_echo(args) -> str:
    return (
        f"fc={args.fc} fref={args.fref} weights={args.weights} "
        f"iters={args.iters} lr={g9(args.lr)} seed={args.seed} depth={args.depth}"
    )


def load_png(path: str) -> Image:
    p = Path(path)
    if p.is_file() and png_has_alpha(p):
        print(f"warning: {path}: alpha channel ignored", file=sys.stderr)
    return load_image(p)


def trace_path_for(out: Path) -> Path:
    if out.suffix.lower() == ".png":
        return out.with_suffix(".loss.csv")
    return Path(str(out) + ".loss.csv")


def write_trace(path: Path, result, flag_echo: str) -> None:
    lines = [
        f"# {version_string()}",
        f"# flags: {flag_echo}",
        "iteration,cons1,cons2,reg,total",
    ]
    for i, entry_ in enumerate(result.loss_trace):
        lines.append(
            f"{i},{g9(entry_.cons1)},{g9(entry_.cons2)},{g9(entry_.reg)},{g9(entry_.total)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_denoise(args) -> int:
    cfg = build_train_config(args)
    noisy = load_png(args.input)
    result = denoise(noisy, cfg)
    out = Path(args.output)
    save_image(result.denoised, out)
    write_trace(trace_path_for(out), result, f"input={args.input} output={args.output} " + train_flag_echo(args))
    final = result.loss_trace[-1].total
    print(f"wrote {out} ({cfg.iterations} iterations, final loss {g9(final)}, {result.elapsed:.2f}s)")
    return 0


def cmd_decompose(args) -> int:
    fc = parse_float_list(args.fc, 3, "--fc")
    img = load_png(args.input)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    decomp = decompose(img, fc)
    print(f"# {version_string()}")
    print(f"# flags: input={args.input} outdir={args.outdir} fc={args.fc}")
    save_raw(decomp.lfs1, outdir / "lfs1.npy")
    save_image(decomp.lfs1, outdir / "lfs1.png")
    for name in ("hfs1", "hfs2", "hfs3"):
        band: Image = getattr(decomp, name)
        save_raw(band, outdir / f"{name}.npy")
        # PNG copies are for the eye only: zero-centered bands sit at mid-gray
        save_image(Image(band.planes / 2.0 + 0.5), outdir / f"{name}.png")
        print(f"wrote {outdir / name}.npy / .png")
    print(f"wrote {outdir / 'lfs1'}.npy / .png")
    return 0


def cmd_noise(args) -> int:
    spec = NoiseSpec(kind=args.kind, std=parse_std(args.std), corr_length=args.corr_length, seed=args.seed)
    clean = load_png(args.input)
    noisy = add_noise(clean, spec)
    out = Path(args.output)
    save_image(noisy, out)
    # The PNG clamps; the raw dump keeps the unclamped field for measurement.
    raw = out.with_suffix(".npy") if out.suffix.lower() == ".png" else Path(str(out) + ".npy")
    save_raw(noisy, raw)
    print(f"# {version_string()}")
    print(
        f"# flags: input={args.input} output={args.output} kind={args.kind} "
        f"std={args.std} corr_length={g9(args.corr_length)} seed={args.seed}"
    )
    print(f"measured_std={g9(measure_noise_std(noisy, clean))}")
    return 0


def cmd_metrics(args) -> int:
    a = load_png(args.image_a)
    b = load_png(args.image_b)
    lines = [
        f"# {version_string()}",
        f"# flags: image_a={args.image_a} image_b={args.image_b} peak={g9(args.peak)}",
        "path_a,path_b,psnr,ssim",
        f"{args.image_a},{args.image_b},{g9(psnr(a, b, args.peak))},{g9(ssim(a, b))}",
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_theory(args) -> int:
    kind = args.kind
    if kind is None:
        kind = "correlated" if args.Lc != 1.0 else "white"
    spec = NoiseSpec(kind=kind, std=parse_std(args.std), corr_length=args.Lc, seed=args.seed)
    band_a = parse_float_list(args.band_a, 2, "--band-a")
    band_b = parse_float_list(args.band_b, 2, "--band-b")
    chart = load_png(args.input)
    report = theory_report(chart, spec, band_a, band_b)
    lines = [
        f"# {version_string()}",
        (
            f"# flags: input={args.input} kind={kind} std={args.std} Lc={g9(args.Lc)} "
            f"seed={args.seed} band_a={args.band_a} band_b={args.band_b}"
        ),
        (
            "rho_noise_empirical,rho_noise_bound,rho_tex_empirical,delta_gap,"
            "band_a_lo,band_a_hi,band_b_lo,band_b_hi,ring_gap"
        ),
        ",".join(
            g9(v)
            for v in (
                report.rho_noise_empirical,
                report.rho_noise_bound,
                report.rho_tex_empirical,
                report.delta_gap,
                report.band_a[0],
                report.band_a[1],
                report.band_b[0],
                report.band_b[1],
                report.ring_gap,
            )
        ),
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def read_manifest(path: str) -> list[tuple[str, str | None]]:
    rows: list[tuple[str, str | None]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) > 2 or not parts[0] or (len(parts) == 2 and not parts[1]):
                raise ParameterError(f"manifest line {lineno} is malformed: {raw.rstrip()!r}")
            rows.append((parts[0], parts[1] if len(parts) == 2 else None))
    if not rows:
        raise ParameterError(f"manifest {path} lists no images")
    return rows


BENCH_COLUMNS = (
    "image",
    "std_measured",
    "psnr_noisy",
    "psnr_denoised",
    "ssim_noisy",
    "ssim_denoised",
    "wall_seconds",
    "iterations",
    "seed",
)


def bench_one(task: dict) -> dict:
    """Run one manifest row; shaped for ProcessPoolExecutor.map."""
    cfg: TrainConfig = replace(task["cfg"], seed=task["cfg"].seed + task["index"])
    if task["noise_kind"] is not None:
        clean = load_image(task["path1"])
        spec = NoiseSpec(
            kind=task["noise_kind"],
            std=task["noise_std"],
            corr_length=task["corr_length"],
            seed=cfg.seed,
        )
        noisy = add_noise(clean, spec)
    else:
        noisy = load_image(task["path1"])
        clean = load_image(task["path2"]) if task["path2"] else None
    if task["ablate"] is not None:
        result = ablate(noisy, cfg, task["ablate"])
    else:
        result = denoise(noisy, cfg)
    record = {
        "image": task["path1"],
        "std_measured": None,
        "psnr_noisy": None,
        "psnr_denoised": None,
        "ssim_noisy": None,
        "ssim_denoised": None,
        "wall_seconds": result.elapsed,
        "iterations": cfg.iterations,
        "seed": cfg.seed,
    }
    if clean is not None:
        record["std_measured"] = measure_noise_std(noisy, clean)
        record["psnr_noisy"] = psnr(noisy, clean)
        record["psnr_denoised"] = psnr(result.denoised, clean)
        record["ssim_noisy"] = ssim(noisy, clean)
        record["ssim_denoised"] = ssim(result.denoised, clean)
    return record


def cmd_bench(args) -> int:
    rows = read_manifest(args.manifest)
    cfg = build_train_config(args)
    noise_std = parse_std(args.std) if args.noise else None
    tasks = [
        {
            "index": i,
            "path1": p1,
            "path2": p2,
            "cfg": cfg,
            "noise_kind": args.noise,
            "noise_std": noise_std,
            "corr_length": args.corr_length,
            "ablate": args.ablate,
        }
        for i, (p1, p2) in enumerate(rows)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(bench_one, tasks))
    else:
        records = [bench_one(t) for t in tasks]

    summary = {"image": "mean", "iterations": cfg.iterations, "seed": cfg.seed}
    for col in BENCH_COLUMNS[1:7]:
        values = [r[col] for r in records if r[col] is not None]
        summary[col] = sum(values) / len(values) if values else None

    flag_echo = (
        f"manifest={args.manifest} out={args.out} noise={args.noise} std={args.std} "
        f"corr_length={g9(args.corr_length)} ablate={args.ablate} jobs={args.jobs} "
        + train_flag_echo(args)
    )
    lines = [f"# {version_string()}", f"# flags: {flag_echo}", ",".join(BENCH_COLUMNS)]
    for record in records + [summary]:
        cells = [str(record["image"])]
        cells += [g9(record[col]) for col in BENCH_COLUMNS[1:7]]
        cells += [str(record["iterations"]), str(record["seed"])]
        lines.append(",".join(cells))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    denoised_mean = summary["psnr_denoised"]
    tail = f", mean denoised PSNR {g9(denoised_mean)} dB" if denoised_mean is not None else ""
    print(f"wrote {args.out} ({len(records)} images{tail})")
    return 0


def add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--fc", default="0.05,0.07,0.1", help="decomposition cutoffs f_c1,f_c2,f_c3")
    sub.add_argument("--fref", default="0.03,0.12", help="reference band cutoffs f_ref1,f_ref2")
    sub.add_argument("--weights", default="0.5,2,0.5", help="loss weights w1,w2,w3")
    sub.add_argument("--iters", type=int, default=1000, help="training iterations")
    sub.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    sub.add_argument("--seed", type=int, default=0, help="weight-init seed")
    sub.add_argument("--depth", type=int, default=2, choices=(2, 3, 5), help="network depth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfcdenoise",
        description="Zero-shot single-image denoising via cross-frequency consistency.",
    )
    parser.add_argument("--version", action="version", version=version_string())
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("denoise", help="denoise one PNG; writes image plus .loss.csv trace")
    p.add_argument("input")
    p.add_argument("output")
    add_train_flags(p)
    p.set_defaults(func=cmd_denoise)

    p = subs.add_parser("decompose", help="split a PNG into LFS1 + three HFS bands")
    p.add_argument("input")
    p.add_argument("outdir")
    p.add_argument("--fc", default="0.05,0.07,0.1", help="decomposition cutoffs f_c1,f_c2,f_c3")
    p.set_defaults(func=cmd_decompose)

    p = subs.add_parser("noise", help="add synthetic noise to a clean PNG")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--kind", default="white", choices=NOISE_KINDS)
    p.add_argument("--std", default="0.1", help="noise std, plain or NUM/DEN like 25/255")
    p.add_argument("--corr-length", type=float, default=1.0, dest="corr_length")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = subs.add_parser("metrics", help="PSNR/SSIM between two PNGs, as CSV")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    p.set_defaults(func=cmd_metrics)

    p = subs.add_parser("bench", help="denoise every image in a manifest; CSV of records + mean row")
    p.add_argument("manifest", help="text file, one 'noisy[,clean]' line per image, # comments")
    p.add_argument("out", help="output CSV path")
    p.add_argument(
        "--noise",
        default=None,
        choices=NOISE_KINDS,
        help="treat manifest paths as clean images and inject this noise (seed + index per image)",
    )
    p.add_argument("--std", default="0.1", help="injected noise std (with --noise)")
    p.add_argument("--corr-length", type=float, default=1.0, dest="corr_length")
    p.add_argument("--ablate", default=None, choices=("cons1", "cons2", "reg"))
    p.add_argument("--jobs", type=int, default=1, help="parallel image jobs")
    add_train_flags(p)
    p.set_defaults(func=cmd_bench)

    p = subs.add_parser("theory", help="cross-band correlation report for one image")
    p.add_argument("input")
    p.add_argument("--Lc", type=float, default=1.0, help="noise correlation length in pixels")
    p.add_argument(
        "--kind",
        default=None,
        choices=NOISE_KINDS,
        help="noise kind; defaults to correlated when --Lc is not 1, else white",
    )
    p.add_argument("--std", default="0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--band-a", default=f"{DEFAULT_BAND_A[0]},{DEFAULT_BAND_A[1]}", dest="band_a")
    p.add_argument("--band-b", default=f"{DEFAULT_BAND_B[0]},{DEFAULT_BAND_B[1]}", dest="band_b")
    p.add_argument("--out", default=None, help="CSV path; stdout when omitted")
    p.set_defaults(func=cmd_theory)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"cfcdenoise: training diverged: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, DimensionError) as exc:
        print(f"cfcdenoise: {exc}", file=sys.stderr)
        return 2
    except (FormatError, OSError) as exc:
        print(f"cfcdenoise: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
