"""Command line entry point: ``emocomb <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import socketserver
import sys
from pathlib import Path

from . import formats
from .corpus import (DEFAULT_DICT_SIZE, DEFAULT_K, DEFAULT_MAX_LEN, build_samples,
                     build_vocabulary, mine_candidates, preprocess, split_samples)
from .emoji_text import default_table, load_emoji_table
from .errors import DataError
from .evaluation import STRATEGY_GRID, StrategyConfig, compare_strategies, format_table, report_csv
from .model import BowModel, TrainConfig, load_external, train_bow
from .strategies import predict_one

log = logging.getLogger("emocomb")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", type=Path, help="JSON file of flag defaults; flags win")
    p.add_argument("--emoji-table", type=Path, help="emoji table TSV (default: bundled v11.0)")
    p.add_argument("--vocab", type=Path)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--max-target-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")


def _strategy_flags(p, default="retrieval"):
    p.add_argument("--strategy", choices=("naive", "greedy", "retrieval"), default=default)
    p.add_argument("--thr", type=float, default=0.3)
    p.add_argument("--pen", type=float, default=0.0)


def _model_flags(p):
    p.add_argument("--model", type=Path, help="bag-of-words checkpoint")
    p.add_argument("--external", type=Path,
                   help="CSV of precomputed distributions aligned with --dataset")


def build_parser():
    ap = _Parser(prog="emocomb", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-dataset", help="corpus -> vocabulary + samples")
    _common(p)
    p.add_argument("--corpus", type=Path)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--test-dataset", type=Path, help="write a held-out split here")
    p.add_argument("--test-fraction", type=float, default=0.0)

    p = sub.add_parser("mine-candidates", help="samples -> candidate dictionary")
    _common(p)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--dict", type=Path)
    p.add_argument("--dict-size", type=int, default=DEFAULT_DICT_SIZE)

    p = sub.add_parser("train", help="fit the bag-of-words softmax model")
    _common(p)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--model", type=Path)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--lr", type=float, default=TrainConfig.lr)
    p.add_argument("--n-features", type=int, default=TrainConfig.n_features)

    p = sub.add_parser("predict", help="predict combinations for every dataset context")
    _common(p)
    _model_flags(p)
    _strategy_flags(p)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--dict", type=Path)
    p.add_argument("--predictions", type=Path, help="output JSON-lines (default stdout)")

    p = sub.add_parser("evaluate", help="strategy comparison report")
    _common(p)
    _model_flags(p)
    p.add_argument("--dataset", type=Path)
    p.add_argument("--dict", type=Path)
    p.add_argument("--report", type=Path)
    p.add_argument("--strategy", choices=("naive", "greedy", "retrieval"),
                   help="evaluate a single configuration instead of the full grid")
    p.add_argument("--thr", type=float, default=0.3)
    p.add_argument("--pen", type=float, default=0.0)

    p = sub.add_parser("serve", help="JSON-lines predict loop on stdin or TCP")
    _common(p)
    _strategy_flags(p)
    p.add_argument("--model", type=Path)
    p.add_argument("--dict", type=Path)
    p.add_argument("--serve-port", type=int)
    p.add_argument("--serve-host", default="127.0.0.1")
    return ap


def parse_args(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            ap.exit(EXIT_USAGE, f"emocomb: error: cannot read config {args.config}: {exc}\n")
        if not isinstance(cfg, dict):
            ap.exit(EXIT_USAGE, "emocomb: error: config must be a JSON object\n")
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - known
        if unknown:
            ap.exit(EXIT_USAGE, f"emocomb: error: unknown config keys {sorted(unknown)}\n")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = ap.parse_args(argv)
        for action in sub._actions:
            v = getattr(args, action.dest, None)
            if isinstance(v, str) and action.type is Path:
                setattr(args, action.dest, Path(v))
    return args


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + n.replace("_", "-") for n in missing))


def _need_files(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise DataError(f"{p}: no such file")


def _table(args):
    if args.emoji_table is not None:
        _need_files(args.emoji_table)
        return load_emoji_table(args.emoji_table)
    return default_table()


def _load_model(args, samples, vocab, table):
    if (args.model is None) == (getattr(args, "external", None) is None):
        raise UsageError("give exactly one of --model / --external")
    if args.model is not None:
        _need_files(args.model)
        model = BowModel.load(args.model, table=table)
        if model.vocab_checksum != vocab.checksum:
            raise DataError(
                f"{args.model}: checkpoint was trained against vocabulary "
                f"{model.vocab_checksum[:12]}..., but {args.vocab} is {vocab.checksum[:12]}...; "
                "retrain or pass the matching vocabulary")
        if model.n_classes != len(vocab):
            raise DataError(f"{args.model}: K={model.n_classes} but vocabulary has {len(vocab)}")
        return model
    _need_files(args.external)
    return load_external(args.external, samples, len(vocab))


def cmd_build_dataset(args):
    _need(args, "corpus", "vocab", "dataset")
    if args.test_fraction and args.test_dataset is None:
        raise UsageError("--test-fraction needs --test-dataset")
    _need_files(args.corpus)
    table = _table(args)
    posts = [preprocess(t) for t in formats.read_corpus(args.corpus)]
    vocab = build_vocabulary(posts, args.k, table)
    samples = build_samples(posts, vocab, table, args.max_target_len)
    if not samples:
        raise DataError("corpus yields no samples")
    train, test = split_samples(samples, args.test_fraction, args.seed)
    outputs = [(args.vocab, formats.vocabulary_text(vocab)),
               (args.dataset, formats.dataset_text(train, vocab))]
    if args.test_dataset is not None:
        if not test:
            raise DataError("test split is empty; raise --test-fraction")
        outputs.append((args.test_dataset, formats.dataset_text(test, vocab)))
    for path, text in outputs:
        formats.atomic_write(path, text)
    print(f"posts={len(posts)} vocab={len(vocab)} samples={len(samples)} "
          f"train={len(train)} test={len(test)}")


def cmd_mine_candidates(args):
    _need(args, "dataset", "vocab", "dict")
    _need_files(args.vocab, args.dataset)
    vocab = formats.read_vocabulary(args.vocab)
    samples = formats.read_dataset(args.dataset, vocab, args.max_target_len)
    d = mine_candidates(samples, args.dict_size, len(vocab), args.max_target_len, vocab.checksum)
    formats.write_dictionary(args.dict, d, vocab)
    mined = sum(1 for _, f in d if f > 0)
    print(f"candidates={len(d)} mined={mined} backfilled={len(d) - mined}")


def cmd_train(args):
    _need(args, "dataset", "vocab", "model")
    _need_files(args.vocab, args.dataset)
    vocab = formats.read_vocabulary(args.vocab)
    samples = formats.read_dataset(args.dataset, vocab, args.max_target_len)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                      seed=args.seed, n_features=args.n_features)
    model = train_bow(samples, len(vocab), cfg, _table(args), vocab.checksum)
    tmp = Path(str(args.model) + ".partial")
    model.save(tmp)
    tmp.replace(args.model)
    final = model.history[-1] if model.history else float("nan")
    print(f"samples={len(samples)} epochs={cfg.epochs} final_loss={final:.6f}")


def _predictor(args, vocab, table, dictionary):
    def run(p, strategy=None, params=None):
        params = params or {}
        strategy = strategy or args.strategy
        pred = predict_one(p, strategy, thr=float(params.get("thr", args.thr)),
                           pen=float(params.get("pen", args.pen)),
                           dictionary=dictionary, max_len=args.max_target_len)
        return {"prediction": vocab.render(pred.combination), "score": pred.score}
    return run


def _load_dict(args, vocab, required):
    if args.dict is None:
        if required:
            raise UsageError("retrieval needs --dict")
        return None
    _need_files(args.dict)
    return formats.read_dictionary(args.dict, vocab)


def cmd_predict(args):
    _need(args, "dataset", "vocab")
    _need_files(args.vocab, args.dataset)
    table = _table(args)
    vocab = formats.read_vocabulary(args.vocab)
    samples = formats.read_dataset(args.dataset, vocab, args.max_target_len)
    dictionary = _load_dict(args, vocab, args.strategy == "retrieval")
    model = _load_model(args, samples, vocab, table)
    probs = model.predict_batch([s.context for s in samples])
    run = _predictor(args, vocab, table, dictionary)
    lines = [json.dumps({"vocab_checksum": vocab.checksum, "strategy": args.strategy,
                         "thr": args.thr, "pen": args.pen}) + "\n"]
    for s, p in zip(samples, probs):
        rec = {"context": s.context, **run(p)}
        lines.append(json.dumps(rec, ensure_ascii=False) + "\n")
    if args.predictions is None:
        sys.stdout.writelines(lines)
    else:
        formats.atomic_write(args.predictions, "".join(lines))


def cmd_evaluate(args):
    _need(args, "dataset", "vocab", "report")
    _need_files(args.vocab, args.dataset)
    table = _table(args)
    vocab = formats.read_vocabulary(args.vocab)
    samples = formats.read_dataset(args.dataset, vocab, args.max_target_len)
    if args.strategy is None:
        grid = STRATEGY_GRID
    else:
        grid = [StrategyConfig(args.strategy,
                               thr=args.thr if args.strategy == "greedy" else None,
                               pen=args.pen if args.strategy == "retrieval" else None)]
    needs_dict = any(c.strategy == "retrieval" for c in grid)
    dictionary = _load_dict(args, vocab, needs_dict)
    model = _load_model(args, samples, vocab, table)
    reports = compare_strategies(model, samples, dictionary, grid, args.max_target_len)
    formats.atomic_write(args.report, report_csv(reports))
    print(format_table(reports))


def serve_lines(lines, out, run):
    """Answer each JSON request line with exactly one JSON response line, in order."""
    for line in lines:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        if not line.strip():
            continue
        try:
            req = json.loads(line)
        except ValueError as exc:
            resp = {"error": "parse", "message": str(exc)}
        else:
            resp = _answer(req, run)
        out.write(json.dumps(resp, ensure_ascii=False) + "\n")
        out.flush()


def _answer(req, run):
    if not isinstance(req, dict) or not isinstance(req.get("context"), str):
        return {"error": "request", "message": 'expected an object with string "context"'}
    params = req.get("params") or {}
    if not isinstance(params, dict):
        return {"error": "request", "message": '"params" must be an object'}
    try:
        return run(req["context"], req.get("strategy"), params)
    except (ValueError, TypeError) as exc:
        return {"error": "request", "message": str(exc)}


def make_server_runner(args):
    _need(args, "model", "vocab")
    _need_files(args.vocab, args.model)
    table = _table(args)
    vocab = formats.read_vocabulary(args.vocab)
    dictionary = _load_dict(args, vocab, args.strategy == "retrieval")
    model = _load_model(args, [], vocab, table)
    predict = _predictor(args, vocab, table, dictionary)

    def run(context, strategy=None, params=None):
        if (strategy or args.strategy) == "retrieval" and dictionary is None:
            raise ValueError("server started without --dict; retrieval unavailable")
        return predict(model.predict(context), strategy, params)
    return run


def cmd_serve(args):
    run = make_server_runner(args)
    if args.serve_port is None:
        serve_lines(sys.stdin, sys.stdout, run)
        return

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            out = _SocketWriter(self.wfile)
            serve_lines(self.rfile, out, run)

    with socketserver.TCPServer((args.serve_host, args.serve_port), Handler) as srv:
        log.info("serving on %s:%d", *srv.server_address)
        srv.serve_forever()


class _SocketWriter:
    def __init__(self, wfile):
        self.wfile = wfile

    def write(self, s):
        self.wfile.write(s.encode("utf-8"))

    def flush(self):
        self.wfile.flush()


COMMANDS = {
    "build-dataset": cmd_build_dataset,
    "mine-candidates": cmd_mine_candidates,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
}


def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"emocomb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except (DataError, OSError) as exc:
        print(f"emocomb: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
