"""Write procedural test scenes or a planted-loop sequence as PGM files.

    python3 tools/make_synthetic_corpus.py scenes OUT_DIR --count 200 --seed 0
    python3 tools/make_synthetic_corpus.py loop OUT_DIR --seed 5

The loop mode also writes ``ground_truth.csv`` (frame_index,source_frame)
for the revisited segment.
"""
import argparse
import os

from deeploop import synthetic
from deeploop.image import save_pgm


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=("scenes", "loop"))
    ap.add_argument("out")
    ap.add_argument("--count", type=int, default=200, help="scenes to write (scenes mode)")
    ap.add_argument("--frames", type=int, default=700, help="sequence length (loop mode)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    if args.mode == "scenes":
        images = synthetic.corpus(args.count, args.seed)
    else:
        span = args.frames // 10  # the default 700 frames revisit 70..139 at the end
        seq = synthetic.planted_loop_sequence(args.seed, n_frames=args.frames, revisit_len=span, revisit_of=span)
        images = seq.frames
        with open(os.path.join(args.out, "ground_truth.csv"), "w") as fh:
            fh.write("frame_index,source_frame\n")
            for f, s in sorted(seq.source.items()):
                fh.write(f"{f},{s}\n")
    width = len(str(len(images) - 1))
    for i, im in enumerate(images):
        save_pgm(im, os.path.join(args.out, f"{i:0{width}d}.pgm"))
    print(f"wrote {len(images)} images to {args.out}")


if __name__ == "__main__":
    main()
