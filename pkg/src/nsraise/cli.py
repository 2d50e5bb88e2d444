"""Batch command line: ``nsraise {synth,fit,evaluate,diagnose}``.

Exit codes: 0 success, 2 input error, 3 calibration failure, 4 evaluation
unavailable.  Errors are also reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .basis import Model, build_design_matrix
from .calibration import CalibrationConfig, EstimationSeries, estimate_series, grid_search_shape
from .diagnostics import collinearity_report
from .errors import NSRaiseError, QuoteParseError
from .evaluation import build_report, write_report
from .market_data import build_panel, parse_quotes, swap_rate_from_curve, write_quotes
from .regression import Method
from .synth import generate_panel, write_truth

log = logging.getLogger("nsraise")

EXIT_OK, EXIT_INPUT, EXIT_CALIBRATION, EXIT_EVALUATION = 0, 2, 3, 4

DEFAULTS = {
    "model": "ns",
    "methods": "all",
    "grid_min": 0.05,
    "grid_max": 10.0,
    "grid_step": 0.05,
    "cn_threshold": 20.0,
    "unit": None,
    "seed": 0,
    "lags": None,
    "days": 2719,
    "noise_bp": 1.0,
    "format": "both",
}

BETA_HEADER = [
    "date", "model", "method", "lambda1", "lambda2",
    "beta0", "beta1", "beta2", "beta3", "se0", "se1", "se2", "se3",
    "sse", "cn", "k", "raised_column", "mitigated", "boundary", "error",
]
DIAG_HEADER = [
    "date", "model", "lambda1", "lambda2", "cn", "severity", "xi_max", "xi_min",
    "vif1", "vif2", "vif3", "cv1", "cv2", "cv3", "boundary", "error",
]


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# --- argument handling ----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, needs_input=True):
    if needs_input:
        p.add_argument("--input", required=True, help="quote CSV (date,instrument,maturity,rate,unit)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON file of option defaults; flags override it")
    p.add_argument("--model", choices=["ns", "sv", "both"], default=None)
    p.add_argument("--methods", default=None, help="comma list of ols,ridge,raise or 'all'")
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--cn-threshold", type=float, default=None)
    p.add_argument("--unit", choices=["percent", "decimal"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lags", type=int, default=None, help="Newey-West lags (default: automatic)")
    p.add_argument("--format", choices=["csv", "json", "both"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsraise", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", help="estimate daily curves and write coefficient series")
    _add_common(fit)
    ev = sub.add_parser("evaluate", help="estimate and write report tables and plot data")
    _add_common(ev)
    dg = sub.add_parser("diagnose", help="dump the collinearity report at each day's OLS optimum")
    _add_common(dg)
    sy = sub.add_parser("synth", help="write a synthetic quote panel and its ground truth")
    _add_common(sy, needs_input=False)
    sy.add_argument("--days", type=int, default=None)
    sy.add_argument("--noise-bp", type=float, default=None)
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge options: command-line flags > config file > defaults."""
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_opts = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CLIError(f"cannot read config {args.config}: {exc}", EXIT_INPUT) from None
        unknown = set(file_opts) - set(DEFAULTS)
        if unknown:
            raise CLIError(f"unknown config keys {sorted(unknown)}", EXIT_INPUT)
        opts.update(file_opts)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    opts["models"] = _parse_models(opts["model"])
    opts["method_list"] = _parse_methods(opts["methods"])
    return opts


def _parse_models(token) -> list[Model]:
    token = str(token).lower()
    if token == "both":
        return [Model.NS, Model.SV]
    if token in ("ns", "sv"):
        return [Model(token.upper())]
    raise CLIError(f"unknown model {token!r}", EXIT_INPUT)


def _parse_methods(token) -> tuple[Method, ...]:
    names = {"ols": Method.OLS, "ridge": Method.RIDGE, "raise": Method.RAISE}
    parts = [t.strip().lower() for t in str(token).split(",") if t.strip()]
    if parts == ["all"]:
        return (Method.OLS, Method.RIDGE, Method.RAISE)
    bad = [p for p in parts if p not in names]
    if bad or not parts:
        raise CLIError(f"unknown method(s) {bad or token!r}", EXIT_INPUT)
    chosen = {names[p] for p in parts} | {Method.OLS}
    return tuple(m for m in (Method.OLS, Method.RIDGE, Method.RAISE) if m in chosen)


def _config(opts, model: Model) -> CalibrationConfig:
    try:
        return CalibrationConfig(
            model=model,
            grid_min=float(opts["grid_min"]),
            grid_max=float(opts["grid_max"]),
            grid_step=float(opts["grid_step"]),
            cn_threshold=float(opts["cn_threshold"]),
            methods=opts["method_list"],
        )
    except NSRaiseError as exc:
        raise CLIError(str(exc), EXIT_INPUT) from None


# --- output helpers -------------------------------------------------------------


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "" if v != v else repr(v)
    return str(v)


class _Outputs:
    """Collects file contents and writes them only once everything has been computed."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) for v in r])
        self.files[name] = buf.getvalue()

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, text in self.files.items():
            dest = self.out_dir / name
            fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=".tmp_")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, dest)
            paths.append(dest)
        return paths


def _load_panel(path):
    try:
        quotes = parse_quotes(path)
    except FileNotFoundError:
        raise CLIError(f"input not found: {path}", EXIT_INPUT) from None
    except QuoteParseError as exc:
        raise CLIError(f"parse error: {exc}", EXIT_INPUT) from None
    if not quotes:
        raise CLIError("no data", EXIT_INPUT)
    snaps, flags = build_panel(quotes)
    if not snaps:
        raise CLIError("no data: every date was incomplete", EXIT_INPUT)
    return snaps, flags


def _estimate(snaps, opts) -> dict[Model, EstimationSeries]:
    out = {}
    for model in opts["models"]:
        series = estimate_series(snaps, _config(opts, model))
        if not series.successful:
            raise CLIError(f"calibration failed on every day for {model.value}", EXIT_CALIBRATION)
        out[model] = series
    return out


def _beta_rows(series: EstimationSeries, method: Method, scale: float):
    model = series.config.model
    p = model.n_params
    for d in series.days:
        if not d.ok:
            yield [d.date.isoformat(), model.value, method.value] + [None] * 16 + [d.error]
            continue
        f = d.fits[method]
        beta = [float(b) * scale for b in f.beta] + [None] * (4 - p)
        se = [float(s) * scale for s in f.std_errors] + [None] * (4 - p)
        yield [d.date.isoformat(), model.value, method.value, d.shape.lambda1, d.shape.lambda2,
               *beta, *se, f.sse * scale * scale, f.cn, f.k, f.raised_index, f.mitigated, d.boundary, None]


def _diag_row(date, model: Model, shape, report, boundary, error=None):
    if report is None:
        return [date.isoformat(), model.value] + [None] * 13 + [error]
    vif = list(report.vif) + [None] * (3 - report.vif.size)
    cv = list(report.cv) + [None] * (3 - report.cv.size)
    return [date.isoformat(), model.value, shape.lambda1, shape.lambda2, report.cn, report.severity.value,
            report.xi_max, report.xi_min, *vif, *cv, boundary, error]


def _output_scale(opts) -> float:
    return 100.0 if opts["unit"] == "percent" else 1.0


# --- commands -------------------------------------------------------------------


def cmd_synth(opts, out_dir) -> list[Path]:
    outputs = _Outputs(out_dir)
    model = opts["models"][0]
    panel = generate_panel(int(opts["days"]), seed=int(opts["seed"]), model=model,
                           noise_bp=float(opts["noise_bp"]), grid_step=float(opts["grid_step"]))
    unit = opts["unit"] or "percent"
    with tempfile.TemporaryDirectory() as tmp:
        write_quotes(panel.quotes, Path(tmp) / "q.csv", unit)
        write_truth(panel.truth, Path(tmp) / "t.csv")
        outputs.files["quotes.csv"] = (Path(tmp) / "q.csv").read_text(encoding="utf-8")
        outputs.files["truth.csv"] = (Path(tmp) / "t.csv").read_text(encoding="utf-8")
    return outputs.commit()


def cmd_fit(opts, input_path, out_dir) -> list[Path]:
    snaps, _ = _load_panel(input_path)
    series_by_model = _estimate(snaps, opts)
    outputs = _Outputs(out_dir)
    scale = _output_scale(opts)
    for model, series in series_by_model.items():
        tag = model.value.lower()
        for method in series.config.methods:
            outputs.csv(f"betas_{tag}_{method.value.lower()}.csv", BETA_HEADER, _beta_rows(series, method, scale))
        outputs.csv(f"diagnostics_{tag}.csv", DIAG_HEADER,
                    [_diag_row(d.date, model, d.shape, d.report, d.boundary, d.error) for d in series.days])
    return outputs.commit()


def cmd_diagnose(opts, input_path, out_dir) -> list[Path]:
    snaps, _ = _load_panel(input_path)
    outputs = _Outputs(out_dir)
    for model in opts["models"]:
        cfg = _config(opts, model)
        rows = []
        for s in snaps:
            try:
                shape, _ = grid_search_shape(s, cfg)
                report = collinearity_report(build_design_matrix(s.maturities, shape))
                rows.append(_diag_row(s.date, model, shape, report, max(shape.lambdas) >= cfg.grid()[-1]))
            except NSRaiseError as exc:
                rows.append(_diag_row(s.date, model, None, None, False, f"{type(exc).__name__}: {exc}"))
        outputs.csv(f"diagnostics_{model.value.lower()}.csv", DIAG_HEADER, rows)
    return outputs.commit()


def cmd_evaluate(opts, input_path, out_dir) -> list[Path]:
    snaps, _ = _load_panel(input_path)
    try:
        series_by_model = _estimate(snaps, opts)
    except CLIError as exc:
        raise CLIError(f"evaluation unavailable: {exc}", EXIT_EVALUATION) from None
    rep = build_report(snaps, {m.value: s for m, s in series_by_model.items()}, opts["lags"])
    outputs = _Outputs(out_dir)
    fmt = opts["format"]
    with tempfile.TemporaryDirectory() as tmp:
        for p in write_report(rep, tmp):
            if fmt == "both" or p.suffix == f".{fmt}":
                outputs.files[p.name] = p.read_text(encoding="utf-8")
    for model, series in series_by_model.items():
        tag = model.value.lower()
        methods = list(series.config.methods)
        good = series.successful
        head = ["date"] + [m.value for m in methods]
        outputs.csv(f"plot_long_rate_{tag}.csv", head,
                    [[d.date.isoformat()] + [d.fits[m].long_rate * 100 for m in methods] for d in good])
        outputs.csv(f"plot_short_rate_{tag}.csv", head,
                    [[d.date.isoformat()] + [d.fits[m].short_rate * 100 for m in methods] for d in good])
        outputs.csv(f"plot_se_beta0_{tag}.csv", head,
                    [[d.date.isoformat()] + [float(d.fits[m].std_errors[0]) * 100 for m in methods] for d in good])
        holdout = {s.date: s.holdout_30y for s in snaps}
        rows = []
        for d in good:
            if holdout.get(d.date) is None:
                continue
            rows.append([d.date.isoformat(), holdout[d.date] * 100]
                        + [swap_rate_from_curve(d.fits[m], d.shape) * 100 for m in methods])
        if rows:
            outputs.csv(f"plot_swap30_{tag}.csv", ["date", "actual"] + [m.value for m in methods], rows)
    return outputs.commit()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = resolve_options(args)
        if args.command == "synth":
            paths = cmd_synth(opts, args.out)
        elif args.command == "fit":
            paths = cmd_fit(opts, args.input, args.out)
        elif args.command == "diagnose":
            paths = cmd_diagnose(opts, args.input, args.out)
        else:
            paths = cmd_evaluate(opts, args.input, args.out)
    except CLIError as exc:
        print(json.dumps({"status": "error", "exit_code": exc.code, "error": str(exc)}), file=sys.stderr)
        return exc.code
    except NSRaiseError as exc:
        print(json.dumps({"status": "error", "exit_code": EXIT_CALIBRATION, "error": str(exc)}), file=sys.stderr)
        return EXIT_CALIBRATION
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
