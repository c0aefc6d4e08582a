"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or contract error,
3 gradient check failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..errors import DbAiatError
from ..model import ModelConfig, count_parameters, init_weights
from ..training import TrainingConfig, load_checkpoint, load_config, train
from .enhance import check_compatible, enhance_file, evaluate
from .gradsuite import run_gradient_suite

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GRADCHECK = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dbaiat", description="Dual-branch speech enhancement toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model from a key = value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--out", help="checkpoint path (overrides checkpoint_path in the config)")

    p = sub.add_parser("enhance", help="enhance one WAV file")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="in_wav", required=True)
    p.add_argument("--out", dest="out_wav", required=True)
    p.add_argument("--clean", help="clean reference; prints metrics when given")

    p = sub.add_parser("evaluate", help="enhance and score matched clean/noisy directories")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--clean-dir", required=True)
    p.add_argument("--noisy-dir", required=True)
    p.add_argument("--out-dir", help="also write enhanced WAVs here")

    p = sub.add_parser("gradcheck", help="finite-difference check of every differentiable op")
    p.add_argument("--tiny", action="store_true", help="use the smallest end-to-end model")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("info", help="describe a checkpoint or a config")
    p.add_argument("--ckpt")
    p.add_argument("--config")
    return parser


def _cmd_train(args) -> int:
    model_cfg, train_cfg = load_config(args.config)
    if args.out:
        train_cfg = TrainingConfig.from_dict({**train_cfg.to_dict(), "checkpoint_path": args.out})
    if not train_cfg.checkpoint_path:
        print("error: no checkpoint path; set checkpoint_path in the config or pass --out", file=sys.stderr)
        return EXIT_USAGE
    resume = load_checkpoint(args.resume) if args.resume else None

    def progress(step, value):
        if step % max(train_cfg.log_every, 1) == 0:
            print(f"step {step}\tloss {value:.6f}", flush=True)

    result = train(model_cfg, train_cfg, resume=resume, on_step=progress)
    losses = result.losses
    print(f"trained {len(losses)} steps in {result.seconds:.1f} s; checkpoint {train_cfg.checkpoint_path}")
    if losses.size:
        print(f"loss first {losses[0]:.6f} last {losses[-1]:.6f}")
    return EXIT_OK


def _cmd_enhance(args) -> int:
    entry = enhance_file(args.ckpt, args.in_wav, args.out_wav, clean_wav=args.clean)
    if entry is not None:
        print("file\tssnr\tsi_sdr\tsnr_in")
        print(entry.line())
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    report = evaluate(args.ckpt, args.clean_dir, args.noisy_dir, out_dir=args.out_dir)
    print("file\tssnr\tsi_sdr\tsnr_in")
    for line in report.lines():
        print(line)
    print(report.summary_table(), file=sys.stderr)
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    results = run_gradient_suite(tiny=args.tiny, seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}\t{r.name}\t{r.error:.3e}\t{r.seconds:.2f}s")
    failed = [r.name for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} passed in {total:.1f} s")
    return EXIT_GRADCHECK if failed else EXIT_OK


def _cmd_info(args) -> int:
    history = None
    if args.ckpt:
        ckpt = load_checkpoint(args.ckpt)
        check_compatible(ckpt)
        cfg = ckpt.model_config
        n_params = int(sum(v.size for v in ckpt.weights.values()))
        history = ckpt.loss_history
        print(f"checkpoint\t{args.ckpt}")
        print(f"format_version\t{ckpt.format_version}")
        print(f"step\t{ckpt.step}")
        print(f"epoch\t{ckpt.epoch}")
    else:
        cfg = load_config(args.config)[0] if args.config else ModelConfig()
        n_params = count_parameters(init_weights(cfg))
    for key, value in cfg.to_dict().items():
        print(f"{key}\t{value}")
    print(f"parameters\t{n_params}")
    if history is not None:
        if history.size:
            tail = history[-min(50, history.size):]
            print(f"loss_history\t{history.size} steps, first {history[0]:.6f}, "
                  f"last {history[-1]:.6f}, mean of last {tail.size} {np.mean(tail):.6f}")
        else:
            print("loss_history\tempty")
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "enhance": _cmd_enhance,
    "evaluate": _cmd_evaluate,
    "gradcheck": _cmd_gradcheck,
    "info": _cmd_info,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except DbAiatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
