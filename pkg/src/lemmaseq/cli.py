"""Command-line interface: ``lemmaseq <subcommand> ...``.

Every subcommand also reads a flat ``key=value`` config file (``--config``);
keys are the long option names with dashes or underscores, and explicit
flags win over the file. Log lines use a ``metric=value`` grammar. Failures
print one ``error=<Type> message=<json string>`` line and exit with 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import MODEL_FORMAT_VERSION, __version__
from .ambiguity import compute_ambiguity, pool_treebanks, reports_csv, skew_csv, top_ambiguous_skew
from .augmentation import PRESETS, AugmentationPlan, augment
from .cache import build_cache, load_cache, save_cache
from .codec import encode_example, example_to_tsv
from .conllu import Treebank, emit_conllu, parse_conllu, read_conllu, replace_lemma_column, write_conllu
from .evaluation import evaluate, macro_average, results_csv
from .inference import attention_csv, predict_treebank
from .lexicon import FrequencyList, coverage_and_recall, load_frequencies, load_lexicon, save_frequencies, save_lexicon
from .model import HyperParams, load_model, save_model

log = logging.getLogger("lemmaseq")

HYPER_FLAGS = {
    "embedding_dim": int,
    "hidden_dim": int,
    "dropout": float,
    "lr": float,
    "lr_decay": float,
    "decay_start_epoch": int,
    "epochs": int,
    "batch_size": int,
    "beam_size": int,
    "min_frequency": int,
    "max_grad_norm": float,
    "init_scale": float,
}


class CliError(Exception):
    pass


def load_config(path) -> dict:
    """Parse a ``key=value`` file; blank lines and ``#`` comments are skipped."""
    out = {}
    path = Path(path)
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise CliError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _config_defaults(parser: argparse.ArgumentParser, path, command: str) -> dict:
    """Config values converted with each option's type, keyed by dest."""
    actions = {a.dest: a for a in parser._actions}
    out = {}
    for key, raw in load_config(path).items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise CliError(f"{path}: unknown config key {key!r} for '{command}'")
        if isinstance(action, argparse._StoreTrueAction):
            out[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*"):
            out[key] = [action.type(v) if action.type else v for v in raw.split()]
        else:
            out[key] = action.type(raw) if action.type else raw
    return out


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, []):
            raise CliError(f"missing required setting --{name.replace('_', '-')}")


def _write_text(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ------------------------------------------------------------------ commands


def cmd_stats(args):
    _require(args, "treebanks")
    tbs = [read_conllu(p) for p in args.treebanks]
    if args.pool:
        tbs = [pool_treebanks(tbs, args.pool_name)]
    reports = [compute_ambiguity(tb) for tb in tbs]
    for r in reports:
        log.info(f"treebank={r.name} tokens={r.total_tokens} token_rate={r.token_rate:.4f} tokentag_rate={r.tokentag_rate:.4f}")
    _write_text(args.output, reports_csv(reports))
    if args.skew_output:
        entries = [e for tb in tbs for e in top_ambiguous_skew(tb, args.top_k)]
        _write_text(args.skew_output, skew_csv(entries))


def _hyper_from_args(args) -> HyperParams:
    values = {k: getattr(args, k) for k in HYPER_FLAGS if getattr(args, k) is not None}
    values["seed"] = args.seed
    return HyperParams(**values)


def _augmented_examples(args, train_tb):
    gold = [encode_example(t) for t in train_tb.tokens()]
    ae, tr = PRESETS[args.augment] if args.augment else (0, 0)
    ae = args.autoencoder if args.autoencoder is not None else ae
    tr = args.transducer if args.transducer is not None else tr
    plan = AugmentationPlan(ae, tr, args.seed)
    if not (ae or tr):
        return gold, plan
    lexicon, freq = [], None
    if tr:
        _require(args, "lexicon", "freq")
        lexicon, freq = load_lexicon(args.lexicon), load_frequencies(args.freq)
    return augment(gold, plan, lexicon=lexicon, freq=freq, train=train_tb), plan


def cmd_train(args):
    from .training import new_model, train  # keeps 'stats' and 'eval' light

    _require(args, "train", "model")
    train_tb = read_conllu(args.train)
    dev_tb = read_conllu(args.dev) if args.dev else None
    examples, plan = _augmented_examples(args, train_tb)
    hyper = _hyper_from_args(args)
    log.info(
        f"train_tokens={train_tb.n_tokens} examples={len(examples)} autoencoder={plan.autoencoder_count} "
        f"transducer={plan.transducer_count} seed={hyper.seed}"
    )
    dev = [encode_example(t) for t in dev_tb.tokens()] if dev_tb else []
    model = new_model(examples, hyper)
    sink = open(args.log, "w", encoding="utf-8") if args.log else None
    try:

        def on_epoch(rec):
            if sink:
                sink.write(rec.as_line() + "\n")
                sink.flush()

        result = train(model, examples, dev, hyper, n_sentences=len(train_tb), on_epoch=on_epoch)
    finally:
        if sink:
            sink.close()
    save_model(model, args.model)
    log.info(f"best_epoch={result.best_epoch} batch_size={result.batch_size} seconds={result.seconds:.1f} model={args.model}")


def cmd_predict(args):
    _require(args, "input")
    if not args.model and not args.cache:
        raise CliError("predict needs --model, --cache, or both")
    text = Path(args.input).read_bytes().decode("utf-8")  # no newline translation
    tb = parse_conllu(text, Path(args.input).stem, source=args.input)
    model = load_model(args.model) if args.model else None
    cache = load_cache(args.cache) if args.cache else None
    dumps = []
    on_pred = None
    if args.attention_dir:

        def on_pred(key, symbols, pred):
            dumps.append((key, symbols, pred))

    out_tb, stats = predict_treebank(model, tb, cache, args.beam_size, args.workers, on_pred)
    data = replace_lemma_column(text, (t.lemma for t in out_tb.tokens())).encode("utf-8")
    if args.output is None or args.output == "-":
        sys.stdout.flush()
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(args.output).write_bytes(data)
    if args.attention_dir:
        d = Path(args.attention_dir)
        d.mkdir(parents=True, exist_ok=True)
        index = ["file\tform\tupos\txpos\tfeats\tlemma\tused_copy\tfailed"]
        for n, (key, symbols, pred) in enumerate(dumps, start=1):
            name = f"{n:06d}.csv"
            (d / name).write_text(attention_csv(pred, symbols, model.output_vocab), encoding="utf-8")
            form, upos, xpos, feats = key
            index.append(f"{name}\t{form}\t{upos or '_'}\t{xpos or '_'}\t{feats}\t{pred.lemma}\t{int(pred.used_copy)}\t{int(pred.failed)}")
        (d / "index.tsv").write_text("\n".join(index) + "\n", encoding="utf-8")
    log.info(stats.as_line())


def cmd_eval(args):
    _require(args, "pred", "gold")
    if len(args.pred) != len(args.gold):
        raise CliError(f"{len(args.pred)} prediction files but {len(args.gold)} gold files")
    results = []
    for p, g in zip(args.pred, args.gold):
        r = evaluate(read_conllu(p), read_conllu(g))
        log.info(f"treebank={r.name} tokens={r.total} correct={r.correct} accuracy={r.accuracy:.4f} excluded={r.excluded}")
        results.append(r)
    summaries = [macro_average(results, args.group)] if len(results) > 1 else []
    for s in summaries:
        log.info(f"group={s.name} macro_error_rate={100 * s.macro_error_rate:.2f}")
    _write_text(args.output, results_csv(results, summaries))


def cmd_augment(args):
    _require(args, "train")
    train_tb = read_conllu(args.train)
    examples, plan = _augmented_examples(args, train_tb)
    log.info(f"examples={len(examples)} autoencoder={plan.autoencoder_count} transducer={plan.transducer_count}")
    _write_text(args.output, "".join(example_to_tsv(ex) + "\n" for ex in examples))


def cmd_cache_build(args):
    _require(args, "train", "output")
    cache = build_cache(read_conllu(args.train), exclude_ambiguous=args.no_cache_ambiguous)
    save_cache(cache, args.output)
    log.info(f"cache_entries={len(cache)} output={args.output}")


def cmd_lexicon_eval(args):
    _require(args, "lexicon", "test")
    lexicon = load_lexicon(args.lexicon)
    rows = ["treebank,tokens,coverage,recall"]
    for path in args.test:
        tb = read_conllu(path)
        cov, rec = coverage_and_recall(lexicon, tb)
        log.info(f"treebank={tb.name} coverage={cov:.4f} recall={rec:.4f}")
        rows.append(f"{tb.name},{tb.n_tokens},{cov:.4f},{rec:.4f}")
    _write_text(args.output, "\n".join(rows) + "\n")


def cmd_synth(args):
    from .synthetic import make_split

    _require(args, "output_dir")
    sp = make_split(seed=args.split_seed)
    d = Path(args.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, tb in (("train", sp.train), ("dev", sp.dev), ("test", sp.test)):
        write_conllu(tb, d / f"{name}.conllu")
    blind = emit_conllu(Treebank(tuple(s.with_lemmas(None for _ in s.tokens) for s in sp.test.sentences)))
    (d / "test-blind.conllu").write_text(blind, encoding="utf-8")
    save_lexicon(sp.lexicon, d / "lexicon.tsv")
    save_frequencies(FrequencyList(sp.frequencies.counts), d / "freq.tsv")
    log.info(f"train_tokens={sp.train.n_tokens} dev_tokens={sp.dev.n_tokens} test_tokens={sp.test.n_tokens} output_dir={d}")


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lemmaseq", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"lemmaseq {__version__} (model format {MODEL_FORMAT_VERSION})"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value run-config file; flags override it")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 1)")
    common.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common], help="lemma ambiguity rates as CSV")
    p.add_argument("treebanks", nargs="*", help="CoNLL-U files")
    p.add_argument("--pool", action="store_true", help="report the union of all treebanks")
    p.add_argument("--pool-name", default="pooled")
    p.add_argument("--top-k", type=int, default=100, help="rows in the skew report")
    p.add_argument("--skew-output", help="write the top-k skew CSV here")
    p.add_argument("-o", "--output", help="rates CSV (default stdout)")
    p.set_defaults(func=cmd_stats)

    def add_augmentation(p):
        p.add_argument("--augment", choices=sorted(PRESETS), help="augmentation preset")
        p.add_argument("--autoencoder", type=int, help="number of autoencoder examples")
        p.add_argument("--transducer", type=int, help="number of lexicon-derived forms")
        p.add_argument("--lexicon", help="lexicon TSV for transducer examples")
        p.add_argument("--freq", help="frequency list for transducer examples")

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--train", help="training CoNLL-U")
    p.add_argument("--dev", help="dev CoNLL-U for model selection")
    p.add_argument("--model", help="output model file")
    p.add_argument("--log", help="also write epoch lines here")
    add_augmentation(p)
    for name, kind in HYPER_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), type=kind, dest=name)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="fill the LEMMA column")
    p.add_argument("input", nargs="?", help="CoNLL-U with tags")
    p.add_argument("--model")
    p.add_argument("--cache", help="lemma cache TSV consulted first")
    p.add_argument("--beam-size", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--attention-dir", help="dump one attention CSV per decoded key")
    p.add_argument("-o", "--output", help="default stdout")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", parents=[common], help="lemma accuracy CSV")
    p.add_argument("--pred", nargs="+", help="predicted CoNLL-U files")
    p.add_argument("--gold", nargs="+", help="gold CoNLL-U files, same order")
    p.add_argument("--group", default="all", help="name of the macro-average row")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", parents=[common], help="dump the augmented training set as TSV")
    p.add_argument("--train")
    add_augmentation(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("cache-build", parents=[common], help="build a lemma cache from training data")
    p.add_argument("train", nargs="?")
    p.add_argument("--no-cache-ambiguous", action="store_true", help="skip keys seen with two or more lemmas")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_cache_build)

    p = sub.add_parser("lexicon-eval", parents=[common], help="lexicon coverage and recall CSV")
    p.add_argument("--lexicon")
    p.add_argument("test", nargs="*")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lexicon_eval)

    p = sub.add_parser("synth", parents=[common], help="write the toy-language data set")
    p.add_argument("output_dir", nargs="?")
    p.add_argument("--split-seed", type=int, default=7)
    p.set_defaults(func=cmd_synth)
    return parser


def _error_line(err: BaseException) -> str:
    return f"error={type(err).__name__} message={json.dumps(str(err), ensure_ascii=False)}"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(format="%(message)s", stream=sys.stderr, force=True)
    try:
        if args.config:
            # config values become defaults, so explicit flags still win
            sub = parser._subparsers._group_actions[0].choices[args.command]
            sub.set_defaults(**_config_defaults(sub, args.config, args.command))
            args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = 1
        log.setLevel(logging.WARNING if args.quiet else logging.INFO)
        logging.getLogger("lemmaseq").setLevel(log.level)
        args.func(args)
    except (CliError, OSError, ValueError, KeyError) as err:
        print(_error_line(err), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
