"""jrc: command-line front end."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .codec import ContainerError, compress, decompress
from .evaluation import Checkpoint, CorpusManifest, load_jpegs, prepare_corpus, rd_sweep, write_csv
from .jpeg import JpegError, standard_tables
from .nn import CheckpointError
from .rd import TrainConfig, TrainState, TrainingDiverged, load_model, train

log = logging.getLogger("jrc")


def _model_arg(p):
    p.add_argument("--model", required=True, help="checkpoint file")


def _cmd_compress(args) -> int:
    model, tables = load_model(args.model)
    if args.mode == "lossy" and tables is None:
        raise SystemExit("lossy mode needs a checkpoint with learned tables")
    data = compress(Path(args.input).read_bytes(), model, tables if args.mode == "lossy" else None)
    Path(args.out).write_bytes(data)
    return 0


def _cmd_decompress(args) -> int:
    model, _ = load_model(args.model)
    Path(args.out).write_bytes(decompress(Path(args.input).read_bytes(), model))
    return 0


def _train_config(args) -> TrainConfig:
    config = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    changes = {}
    for name in ("lambda_r", "lambda_d", "seed", "scale", "corpus"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value
    return config.replace(**changes)


def _cmd_train(args) -> int:
    config = _train_config(args)
    init = TrainState.load(args.init) if args.init else None
    try:
        state = train(config, init=init)
    except TrainingDiverged as exc:
        exc.state.save(args.out)
        log.error("%s; last finite checkpoint written to %s", exc, args.out)
        return 2
    state.save(args.out)
    print(f"{args.out}: stage-1 epochs {state.stage1_epochs}, rounds {state.round_index}, "
          f"Q_t' rounding error {state.tables.rounding_error():.3f}")
    return 0


def _cmd_eval(args) -> int:
    checkpoints = []
    if args.model:
        model, _ = load_model(args.model)
        checkpoints.append(Checkpoint(model, None))
    for path in args.checkpoints:
        state = TrainState.load(path)
        checkpoints.append(Checkpoint(state.model, state.tables, state.config.lambda_r, state.config.lambda_d))
    if not checkpoints:
        raise SystemExit("nothing to evaluate: give --model and/or checkpoints")
    rows = rd_sweep(checkpoints, load_jpegs(args.corpus))
    write_csv(rows, args.out)
    for r in rows:
        print(f"lambda=({r.lambda_r:g},{r.lambda_d:g}) bpp {r.bpp:.4f} psnr {r.psnr_db:.2f} "
              f"ms-ssim {r.ms_ssim:.5f} lossless {r.lossless_bpp:.4f} jpeg {r.jpeg_bpp:.4f}")
    return 0


def _cmd_prepare(args) -> int:
    manifest = CorpusManifest.load(args.manifest)
    if args.seed is not None:
        manifest = CorpusManifest.from_dict({**manifest.to_dict(), "seed": args.seed})
    paths = prepare_corpus(manifest, args.out)
    for name, files in paths.items():
        print(f"{name}: {len(files)} tiles")
    return 0


def _cmd_tables(args) -> int:
    if args.model:
        _, tables = load_model(args.model)
        if tables is None:
            raise SystemExit("checkpoint holds no tables")
        rows = [("Q_t luma", tables.values("qt_luma")), ("Q_t chroma", tables.values("qt_chroma"))]
        rows += [(f"Q_t' {n}", t.natural) for n, t in zip(("luma", "chroma"), tables.decoder_tables())]
    else:
        luma, chroma = standard_tables(args.quality)
        rows = [(f"QP{args.quality} luma", luma.natural), (f"QP{args.quality} chroma", chroma.natural)]
    with np.printoptions(precision=2, suppress=True, linewidth=120):
        for name, values in rows:
            print(name)
            print(np.asarray(values, dtype=np.float64).reshape(8, 8))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jrc", description="Learned JPEG recompression.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="JPEG -> JRC1 container")
    p.add_argument("input")
    _model_arg(p)
    p.add_argument("--mode", choices=("lossless", "lossy"), default="lossless")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help="JRC1 container -> JPEG")
    p.add_argument("input")
    _model_arg(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("train", help="train a model and tables")
    p.add_argument("--config", help="key/value file with a [train] section")
    p.add_argument("--corpus", help="directory of training tiles")
    p.add_argument("--lambda-r", dest="lambda_r", type=float)
    p.add_argument("--lambda-d", dest="lambda_d", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--scale", type=int, help="divide every epoch count by this")
    p.add_argument("--init", help="resume from a checkpoint (skips stage 1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="rate-distortion sweep to CSV")
    p.add_argument("checkpoints", nargs="*")
    p.add_argument("--model", help="lossless model for the lossless row")
    p.add_argument("--corpus", required=True, help="directory of test tiles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("prepare-corpus", help="crop and encode tiles from a manifest")
    p.add_argument("manifest")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("tables", help="print quantization tables")
    p.add_argument("--model")
    p.add_argument("--quality", type=int, default=75)
    p.set_defaults(func=_cmd_tables)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (JpegError, ContainerError, CheckpointError, FileNotFoundError) as exc:
        print(f"jrc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
