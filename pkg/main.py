import argparse
import os
import sys

from models.config import BASE_PRESET_NAMES, PRESET_NAMES
from models.sharing import SharingConfig

RESULT_DIR = 'result'


def _scheme(text):
    try:
        return SharingConfig.parse(text).code
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Time-domain source separation with cross-layer parameter sharing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=False, checkpoint=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=RESULT_DIR)
        p.add_argument("--quiet", action="store_true", help="Only print errors.")
        if corpus:
            p.add_argument("--corpus", required=True, help="Corpus folder or manifest.tsv")
        if checkpoint:
            p.add_argument("--checkpoint", required=True)

    # --- train ---
    p = sub.add_parser("train", help="Train one model with PIT on a corpus.")
    common(p, corpus=True)
    p.add_argument("--preset", default="tiny", choices=PRESET_NAMES)
    p.add_argument("--base", default="convtasnet_base", help="Parent preset of simplified1/simplified2.")
    p.add_argument("--scheme", type=_scheme, default="ss")
    p.add_argument("--steps", type=int, default=3000)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--clip", type=float, default=5.0)
    p.add_argument("--segment", type=int, default=8000)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--max-time", type=float, default=None)
    p.add_argument("--log-every", type=int, default=100)
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--checkpoint", default=None, help="Default: <out-dir>/model.ckpt")
    p.add_argument("--resume", action="store_true")

    # --- ablate ---
    p = sub.add_parser("ablate", help="Train/evaluate all 16 sharing schemes plus simplified controls.")
    common(p, corpus=True)
    p.add_argument("--preset", default="tiny", choices=BASE_PRESET_NAMES, help="Base preset of the ablation.")
    p.add_argument("--steps", type=int, default=3000)
    p.add_argument("--segment", type=int, default=8000)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--variants", action="store_true", help="Add the H-doubled and extra-stack rows.")
    p.add_argument("--workers", type=int, default=1)

    # --- audit ---
    p = sub.add_parser("audit", help="Parameter count and compression of a preset.")
    common(p)
    p.add_argument("--preset", default="convtasnet_base", choices=PRESET_NAMES)
    p.add_argument("--base", default="convtasnet_base")
    p.add_argument("--scheme", type=_scheme, default="nn")
    p.add_argument("--variants", action="store_true")

    # --- separate ---
    p = sub.add_parser("separate", help="Separate a WAV file into C sources.")
    common(p, checkpoint=True)
    p.add_argument("--input", required=True)

    # --- eval ---
    p = sub.add_parser("eval", help="Per-utterance SI-SNRi/SDRi of a checkpoint on a corpus.")
    common(p, corpus=True, checkpoint=True)
    p.add_argument("--workers", type=int, default=1)

    # --- shift-test ---
    p = sub.add_parser("shift-test", help="SI-SNRi change when the input start point shifts.")
    common(p, corpus=True, checkpoint=True)
    p.add_argument("--record", type=int, default=0)
    p.add_argument("--shifts", type=int, nargs="+", default=list(range(0, 251, 25)))

    # --- noise-test ---
    p = sub.add_parser("noise-test", help="SI-SNRi under gaussian / recorded noise.")
    common(p, corpus=True)
    p.add_argument("--checkpoint", required=True, nargs="+")
    p.add_argument("--noise-dir", default=None)
    p.add_argument("--kinds", nargs="+", default=None, choices=["gaussian", "file"],
                   help="Noise kinds (default: gaussian, plus file when --noise-dir is given).")
    p.add_argument("--snr", type=float, nargs="+", default=[0, 3, 5])
    p.add_argument("--workers", type=int, default=1)

    # --- gen-corpus ---
    p = sub.add_parser("gen-corpus", help="Write the synthetic two-source corpus.")
    common(p)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)

    return parser


def run(args):
    # imported here so `--help` and argument errors stay fast
    from experiments import commands
    from optimization import TrainConfig

    verbose = not args.quiet
    out = args.out_dir

    if args.command == "train":
        config = TrainConfig(
            model=commands.resolve_config(args.preset, args.scheme, args.base),
            lr=args.lr,
            clip_norm=args.clip,
            segment=args.segment,
            batch_size=args.batch_size,
            max_steps=args.steps,
            seed=args.seed,
            checkpoint_path=args.checkpoint or os.path.join(out, "model.ckpt"),
            max_time=args.max_time,
            log_every=args.log_every,
            checkpoint_every=args.checkpoint_every,
            resume=args.resume,
        )
        commands.cmd_train(config, args.corpus, verbose=verbose)

    elif args.command == "ablate":
        commands.cmd_ablate(args.preset, args.corpus, args.steps, seed=args.seed, out_dir=out, variants=args.variants,
                            segment=args.segment, batch_size=args.batch_size, workers=args.workers, verbose=verbose)

    elif args.command == "audit":
        commands.cmd_audit(args.preset, args.scheme, args.base, out_path=os.path.join(out, "audit.csv"),
                           variants=args.variants, verbose=verbose)

    elif args.command == "separate":
        commands.cmd_separate(args.checkpoint, args.input, out, verbose=verbose)

    elif args.command == "eval":
        commands.cmd_eval(args.checkpoint, args.corpus, os.path.join(out, "eval.csv"), args.workers, verbose=verbose)

    elif args.command == "shift-test":
        commands.cmd_shift_test(args.checkpoint, args.corpus, args.record, args.shifts,
                                os.path.join(out, "shift_test.csv"), verbose=verbose)

    elif args.command == "noise-test":
        commands.cmd_noise_test(args.checkpoint, args.corpus, args.kinds, args.snr, args.noise_dir, args.seed,
                                os.path.join(out, "noise_test.csv"), args.workers, verbose=verbose)

    elif args.command == "gen-corpus":
        commands.cmd_gen_corpus(args.count, args.duration, args.seed, out, args.workers, verbose=verbose)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
