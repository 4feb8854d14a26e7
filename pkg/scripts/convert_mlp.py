"""Convert a plain-text layer dump into an MLP1 weight file.

    python3 scripts/convert_mlp.py weights.txt model.bin

The dump holds one block per layer: ``layer <rows> <cols> <relu|identity>``,
then ``rows`` lines of weights and one line of biases. Use ``--random`` to
write an untrained network of the canonical 15-puzzle shape instead.
"""

import argparse
from pathlib import Path

from focalpolicy.mlp import CANONICAL_15PUZZLE, model_from_text, random_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", nargs="?")
    ap.add_argument("output")
    ap.add_argument("--random", type=int, metavar="SEED", help="write a random canonical network")
    args = ap.parse_args()
    if args.random is not None:
        model = random_model(CANONICAL_15PUZZLE, seed=args.random)
    elif args.source:
        model = model_from_text(Path(args.source).read_text())
    else:
        ap.error("give a source dump or --random SEED")
    model.save(args.output)
    print(f"{args.output}: shape {'-'.join(map(str, model.shape))}, {model.parameter_count()} parameters")


if __name__ == "__main__":
    main()
