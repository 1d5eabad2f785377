"""Command-line entry point: ``pathfair {ingest,train,score,audit,synth,calibrate}``.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines; keys are
flag names without the leading dashes. Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from . import __version__
from .data_ingest import ADULT_DROPPED, EncodingSchema, build_schema, encode
from .errors import ConfigError, PathFairError
from .report import AuditConfig, load_table, render_tables, run_audit
from .scorer import LogisticModel, fit_logistic, predict, save_scores
from .synth import SynthSpec, calibration_trial, generate, write_csv


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path} line {lineno}: expected 'key = value'")
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def _data_flags(p: argparse.ArgumentParser, test: bool = True) -> None:
    p.add_argument("--train", help="training CSV")
    if test:
        p.add_argument("--test", help="test CSV (optional)")
    p.add_argument("--format", dest="data_format", choices=("adult", "csv"), default="adult")
    p.add_argument("--protected", default="sex")
    p.add_argument("--target", default="income")
    p.add_argument("--positive-label", default=">50K")
    p.add_argument("--group1-label", default="Male")
    p.add_argument("--drop", default=",".join(ADULT_DROPPED), help="comma-separated columns to ignore")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathfair", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key = value defaults file")
        return p

    p = add("ingest", "load and encode data, write the schema")
    _data_flags(p)
    p.add_argument("--out", required=False)

    p = add("train", "fit the reference logistic scorer")
    _data_flags(p, test=False)
    p.add_argument("--out")

    p = add("score", "score a data file with a saved model")
    p.add_argument("--model")
    p.add_argument("--schema")
    p.add_argument("--data")
    p.add_argument("--variant", choices=("train", "test"), default="train")
    p.add_argument("--format", dest="data_format", choices=("adult", "csv"), default="adult")
    p.add_argument("--out")

    p = add("audit", "full pipeline: score, test, mitigate, evaluate")
    _data_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--external-scores")
    p.add_argument("--external-test-scores")
    p.add_argument("--round-coefficient", type=int)
    p.add_argument("--rank-basis", choices=("all", "valid"), default="all")
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)

    p = add("synth", "write a synthetic dataset drawn from the path model")
    _synth_flags(p)
    p.add_argument("--out")

    p = add("calibrate", "Monte-Carlo rejection rate of the bias test")
    _synth_flags(p, null=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.05)
    return parser


def _synth_flags(p, null=False):
    d = SynthSpec()
    p.add_argument("--n", type=int, default=d.n)
    p.add_argument("--p-a", type=float, default=d.p_a)
    p.add_argument("--beta-0-y", type=float, default=d.beta_0_y)
    p.add_argument("--beta-a-y", type=float, default=d.beta_a_y)
    p.add_argument("--beta-0-yhat", type=float, default=d.beta_0_yhat)
    p.add_argument("--beta-a-yhat", type=float, default=0.0 if null else d.beta_a_yhat)
    p.add_argument("--beta-y-yhat", type=float, default=d.beta_y_yhat)
    p.add_argument("--noise-sd", type=float, default=0.1 if null else d.noise_sd)
    p.add_argument("--seed", type=int, default=d.seed)


def _spec(args) -> SynthSpec:
    return SynthSpec(
        n=args.n,
        p_a=args.p_a,
        beta_0_y=args.beta_0_y,
        beta_a_y=args.beta_a_y,
        beta_0_yhat=args.beta_0_yhat,
        beta_a_yhat=args.beta_a_yhat,
        beta_y_yhat=args.beta_y_yhat,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        # re-parse with file values as defaults so explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        known.update({o.lstrip("-").replace("-", "_"): a for a in sub._actions for o in a.option_strings})
        defaults = {}
        for key, value in read_config_file(args.config).items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} for {args.command}")
            conv = known[key].type or str
            try:
                defaults[known[key].dest] = conv(value)
            except ValueError:
                raise ConfigError(f"config key {key!r}: bad value {value!r}") from None
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    missing = [n for n in names if not getattr(args, n, None)]
    if missing:
        raise ConfigError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _audit_config(args) -> AuditConfig:
    return AuditConfig(
        train=args.train,
        test=args.test,
        protected=args.protected,
        target=args.target,
        positive_label=args.positive_label,
        group1_label=args.group1_label,
        drop=tuple(c for c in args.drop.split(",") if c),
        data_format=args.data_format,
        alpha=args.alpha,
        external_scores=args.external_scores,
        external_test_scores=args.external_test_scores,
        round_coefficient=args.round_coefficient,
        rank_basis=args.rank_basis,
        out=args.out,
        seed=args.seed,
    )


def cmd_ingest(args) -> int:
    _require(args, "train")
    cfg = AuditConfig(
        train=args.train,
        test=args.test,
        protected=args.protected,
        target=args.target,
        positive_label=args.positive_label,
        group1_label=args.group1_label,
        drop=tuple(c for c in args.drop.split(",") if c),
        data_format=args.data_format,
    )
    table = load_table(cfg.train, cfg.data_format, "train", cfg.target)
    schema = build_schema(table, cfg.schema_config)
    splits = [("train", table)]
    if cfg.test:
        splits.append(("test", load_table(cfg.test, cfg.data_format, "test", cfg.target)))
    for name, t in splits:
        data = encode(t, schema)
        print(f"{name}: {len(t)} rows, {data.n_valid} valid, {data.n - data.n_valid} masked, p = {data.p}")
    print(f"schema fingerprint {schema.fingerprint}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "schema.txt").write_text(schema.dumps())
    return 0


def cmd_train(args) -> int:
    _require(args, "train", "out")
    cfg = AuditConfig(
        train=args.train,
        protected=args.protected,
        target=args.target,
        positive_label=args.positive_label,
        group1_label=args.group1_label,
        drop=tuple(c for c in args.drop.split(",") if c),
        data_format=args.data_format,
    )
    table = load_table(cfg.train, cfg.data_format, "train", cfg.target)
    schema = build_schema(table, cfg.schema_config)
    model = fit_logistic(encode(table, schema))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "schema.txt").write_text(schema.dumps())
    (out / "model.txt").write_text(model.dumps())
    print(f"fitted {len(model.coefficients)} coefficients in {model.iterations} iterations, deviance {model.deviance:.6f}")
    return 0


def cmd_score(args) -> int:
    _require(args, "model", "schema", "data", "out")
    try:
        schema = EncodingSchema.loads(Path(args.schema).read_text())
        model = LogisticModel.loads(Path(args.model).read_text())
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    data = encode(load_table(args.data, args.data_format, args.variant, schema.target.name), schema)
    save_scores(predict(model, data), args.out)
    print(f"wrote {data.n_valid} scores to {args.out}")
    return 0


def cmd_audit(args) -> int:
    _require(args, "train")
    report = run_audit(_audit_config(args))
    print(render_tables(report))
    if args.out:
        print(f"report written to {args.out}")
    return 0


def cmd_synth(args) -> int:
    _require(args, "out")
    data, scores = generate(_spec(args))
    d, s = write_csv(data, scores, args.out)
    print(f"wrote {d} and {s}")
    return 0


def cmd_calibrate(args) -> int:
    if not 0.0 < args.alpha <= 1.0:
        raise ConfigError("alpha must lie in (0, 1]")
    rate = calibration_trial(_spec(args), args.trials, args.alpha)
    print(f"rejection rate {rate:.4f} over {args.trials} trials at alpha = {args.alpha}")
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "score": cmd_score,
    "audit": cmd_audit,
    "synth": cmd_synth,
    "calibrate": cmd_calibrate,
}


def _origin(exc: BaseException) -> str:
    frames = traceback.extract_tb(exc.__traceback__)
    for fr in reversed(frames):
        path = Path(fr.filename)
        if path.parent.name == "pathfair":
            return path.stem
    return "pathfair"


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except PathFairError as exc:
        print(f"pathfair: {_origin(exc)}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
