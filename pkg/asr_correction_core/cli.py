"""
Command line interface for the correction toolkit.

Usage:
    phoco normalize "Quiero 2 kg de queso"
    phoco correct --context context.txt --threshold 0.45 < hypotheses.txt
    phoco synth --utterances 320 --output corpus.jsonl
    phoco augment --corpus corpus.jsonl --output candidates.jsonl
    phoco train --candidates candidates.jsonl --model-out gate.npz --splits-dir splits
    phoco evaluate --model gate.npz --candidates splits/test.jsonl
    phoco report --model gate.npz --candidates candidates.jsonl --output-dir report
"""

import os
import sys
import json
import logging
import argparse
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional

from marshmallow import ValidationError

from asr_correction_core import __version__
from asr_correction_core.core.config import CorrectionFrameworkConfig, OptionNames, get_config, set_config_file
from asr_correction_core.core.errors import PhocoError
from asr_correction_core.core.normalizer import load_norm_rules, normalize
from asr_correction_core.core.phonetics import Phonemizer, Representation
from asr_correction_core.core.phoco import Context, PhocoConfig, Selector, correct
from asr_correction_core.core import dataset
from asr_correction_core.core import neural_gate
from asr_correction_core.core import hybrid_eval

logger = logging.getLogger('asr_correction_core.cli')


def setup_logging(config: CorrectionFrameworkConfig, component: str, level: Optional[str] = None):
    """Install stderr and optional file handlers for one CLI run."""
    log_level = getattr(logging, config.logging.level.upper(), logging.INFO)

    # Check for environment variable override
    if os.getenv('REDUCE_LOGGING', 'false').lower() == 'true':
        log_level = logging.WARNING
    elif os.getenv('LOG_LEVEL'):
        log_level = getattr(logging, os.getenv('LOG_LEVEL').upper(), log_level)
    if level:
        log_level = getattr(logging, level.upper(), log_level)

    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = config.get_log_file_path(component)
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=log_level, format=config.logging.format, handlers=handlers, force=True)


def packaged_file(name: str) -> str:
    return str(resources.files('asr_correction_core.data').joinpath(name))


def _input_lines(texts: List[str]) -> Iterable[str]:
    if texts:
        yield " ".join(texts)
    else:
        for line in sys.stdin:
            yield line.rstrip('\n')


def _phonemizer(config: CorrectionFrameworkConfig) -> Phonemizer:
    return Phonemizer(config.phonetics.ipa_rules_path, config.phonetics.wbet_rules_path)


def _load_context(path: str, config: CorrectionFrameworkConfig) -> Context:
    return Context.from_file(path, load_norm_rules(config.normalizer.abbreviations_path), _phonemizer(config),
                             window_slack=config.corrector.window_slack, let_slack=config.corrector.let_slack)


def cmd_normalize(args, config: CorrectionFrameworkConfig) -> int:
    rules = load_norm_rules(args.abbreviations or config.normalizer.abbreviations_path)
    for line in _input_lines(args.text):
        print(normalize(line, rules))
    return 0


def cmd_phonemize(args, config: CorrectionFrameworkConfig) -> int:
    rules = load_norm_rules(config.normalizer.abbreviations_path)
    phonemizer = _phonemizer(config)
    for line in _input_lines(args.text):
        print(phonemizer.phonemize(normalize(line, rules), Representation(args.rep)))
    return 0


def cmd_correct(args, config: CorrectionFrameworkConfig) -> int:
    rules = load_norm_rules(config.normalizer.abbreviations_path)
    ctx = _load_context(args.context, config)
    cfg = PhocoConfig(threshold=args.threshold, rep=args.rep, selector=args.selector)
    model = vocab = None
    if args.model:
        model, vocab = neural_gate.load_model(args.model)

    for line in _input_lines(args.text):
        hypothesis = normalize(line, rules)
        if model is not None:
            decision = hybrid_eval.hybrid_decide(hypothesis, ctx, cfg, model, vocab)
            text, candidate, replacements = decision.text, decision.candidate, decision.replacements
        else:
            text, replacements = correct(hypothesis, ctx, cfg)
            candidate = text
        print(text)
        if args.show_replacements:
            details = {'candidate': candidate, 'replacements': [vars(r) for r in replacements]}
            if model is not None:
                details['probability'] = decision.probability
            print(json.dumps(details, ensure_ascii=False))
    return 0


def cmd_synth(args, config: CorrectionFrameworkConfig) -> int:
    sentences = dataset.load_sentences(args.sentences)
    if not sentences:
        logger.error(f"No sentences in {args.sentences}")
        return 1
    if args.utterances:
        sentences = [sentences[i % len(sentences)] for i in range(args.utterances)]
    ctx = _load_context(args.context, config)
    utterances = dataset.synthesize_corpus(
        sentences, ctx, noise_rate=args.noise_rate, seed=args.seed,
        rules=load_norm_rules(config.normalizer.abbreviations_path),
        max_confusion_distance=config.synth.max_confusion_distance,
    )
    dataset.save_corpus(utterances, args.output)
    logger.info(f"Wrote {len(utterances)} utterances to {args.output}")
    return 0


def cmd_augment(args, config: CorrectionFrameworkConfig) -> int:
    utterances = dataset.load_corpus(args.corpus)
    ctx = _load_context(args.context, config)
    candidates = dataset.augment(utterances, ctx)
    dataset.save_candidates(candidates, args.output)
    logger.info(f"Wrote {len(candidates)} candidates to {args.output}")
    return 0


def cmd_train(args, config: CorrectionFrameworkConfig) -> int:
    cfg = neural_gate.TrainConfig.from_config(
        config.training, seed=args.seed, epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.learning_rate, dropout=args.dropout,
    )
    candidates = dataset.load_candidates(args.candidates)
    train_set, val_set, test_set = dataset.split(candidates, cfg.seed)
    logger.info(f"Split {len(candidates)} candidates into {len(train_set)} train, "
                f"{len(val_set)} validation and {len(test_set)} test")

    if args.splits_dir:
        Path(args.splits_dir).mkdir(parents=True, exist_ok=True)
        for name, part in (('train', train_set), ('validation', val_set), ('test', test_set)):
            dataset.save_candidates(part, os.path.join(args.splits_dir, f"{name}.jsonl"))

    result = neural_gate.train(train_set, val_set, cfg)
    neural_gate.save_model(result.model, result.vocab, args.model_out)

    if args.curves:
        result.history.save(args.curves)
        html_path = str(Path(args.curves).with_suffix('.html'))
        with open(html_path, 'w', encoding='utf-8') as f:
            f.write(neural_gate.plot_training_curves(result.history))
        logger.info(f"Wrote training curves to {args.curves} and {html_path}")

    if test_set:
        metrics = neural_gate.evaluate(result.model, result.vocab, test_set)
        print(metrics.to_table())
    return 0


def cmd_evaluate(args, config: CorrectionFrameworkConfig) -> int:
    from asr_correction_core.core.schemas import GateMetricsSchema

    model, vocab = neural_gate.load_model(args.model)
    candidates = dataset.load_candidates(args.candidates)
    metrics = neural_gate.evaluate(model, vocab, candidates)
    print(metrics.to_table())
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            json.dump(GateMetricsSchema().dump(metrics), f, indent=2)
    return 0


def cmd_report(args, config: CorrectionFrameworkConfig) -> int:
    if args.gate == 'model':
        if not args.model:
            logger.error("--model is required with --gate model")
            return 1
        gate = hybrid_eval.NeuralGate(*neural_gate.load_model(args.model))
    elif args.gate == 'oracle':
        gate = hybrid_eval.OracleGate()
    else:
        gate = hybrid_eval.ConstantGate(args.gate == 'accept')

    candidates = dataset.load_candidates(args.candidates)
    report = hybrid_eval.build_report(candidates, gate)
    text = report.to_text()
    print(text, end='')

    if args.output_dir:
        out_dir = Path(args.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / 'report.txt').write_text(text, encoding='utf-8')
        with open(out_dir / 'report.jsonl', 'w', encoding='utf-8') as f:
            for record in report.to_records():
                f.write(json.dumps(record, sort_keys=True) + "\n")
        logger.info(f"Wrote report.txt and report.jsonl to {out_dir}")
    return 0


COMMANDS = {
    'normalize': cmd_normalize,
    'phonemize': cmd_phonemize,
    'correct': cmd_correct,
    'synth': cmd_synth,
    'augment': cmd_augment,
    'train': cmd_train,
    'evaluate': cmd_evaluate,
    'report': cmd_report,
}


def build_parser(config: CorrectionFrameworkConfig) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='phoco', description='Phonetic and neural ASR transcript correction')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--config', help='Path to a JSON configuration file')
    parser.add_argument('--log-level', help='Override the configured log level')
    sub = parser.add_subparsers(dest='command', required=True)

    reps = [OptionNames.REP_PLAIN, OptionNames.REP_IPA, OptionNames.REP_WBET]
    selectors = [OptionNames.SEL_WIN, OptionNames.SEL_LET]
    default_context = packaged_file('telesales_context.txt')

    p = sub.add_parser('normalize', help='Normalize raw text (arguments or stdin lines)')
    p.add_argument('text', nargs='*')
    p.add_argument('--abbreviations', help='Abbreviation table (key<TAB>expansion)')

    p = sub.add_parser('phonemize', help='Normalize and transcribe text phonetically')
    p.add_argument('text', nargs='*')
    p.add_argument('--rep', choices=reps, default=OptionNames.REP_IPA)

    corrector = config.corrector
    p = sub.add_parser('correct', help='Correct hypotheses with PhoCo, or the hybrid model with --model')
    p.add_argument('text', nargs='*')
    p.add_argument('--context', default=default_context, help='Context phrase file, one per line')
    p.add_argument('--rep', choices=reps, default=corrector.rep)
    p.add_argument('--selector', choices=selectors, default=corrector.selector)
    p.add_argument('--threshold', type=float, default=corrector.threshold)
    p.add_argument('--model', help='Gate model; enables the hybrid decision rule')
    p.add_argument('--show-replacements', action='store_true', help='Print a JSON line of details after each line')

    p = sub.add_parser('synth', help='Generate a synthetic noisy corpus')
    p.add_argument('--sentences', default=packaged_file('telesales_sentences.txt'))
    p.add_argument('--context', default=default_context)
    p.add_argument('--noise-rate', type=float, default=config.synth.noise_rate)
    p.add_argument('--seed', type=int, default=config.synth.seed)
    p.add_argument('--utterances', type=int, help='Cycle through the sentences to produce this many utterances')
    p.add_argument('--output', required=True)

    p = sub.add_parser('augment', help='Expand a corpus into labeled correction candidates')
    p.add_argument('--corpus', required=True)
    p.add_argument('--context', default=default_context)
    p.add_argument('--output', required=True)

    p = sub.add_parser('train', help='Train the neural gate on an 80/10/10 split')
    p.add_argument('--candidates', required=True)
    p.add_argument('--seed', type=int)
    p.add_argument('--epochs', type=int)
    p.add_argument('--batch-size', type=int)
    p.add_argument('--learning-rate', type=float)
    p.add_argument('--dropout', type=float)
    p.add_argument('--model-out', required=True)
    p.add_argument('--splits-dir', help='Write train/validation/test candidate files here')
    p.add_argument('--curves', help='Write per-batch curves as JSON (and an .html plot next to it)')

    p = sub.add_parser('evaluate', help='Classification metrics of a gate on labeled candidates')
    p.add_argument('--model', required=True)
    p.add_argument('--candidates', required=True)
    p.add_argument('--output', help='Write the metrics as JSON')

    p = sub.add_parser('report', help='Per-threshold PhoCo vs hybrid WER report')
    p.add_argument('--model')
    p.add_argument('--candidates', required=True)
    p.add_argument('--gate', choices=['model', 'oracle', 'accept', 'reject'], default='model')
    p.add_argument('--output-dir')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv

    # --config must be applied before the parser reads defaults from the config
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)
    if known.config:
        set_config_file(known.config)
    config = get_config()

    args = build_parser(config).parse_args(argv)
    setup_logging(config, args.command, args.log_level)
    if not config.validate():
        logger.error("Configuration is invalid")
        return 1

    try:
        return COMMANDS[args.command](args, config)
    except (PhocoError, ValidationError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
