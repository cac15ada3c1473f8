"""Command-line entry point: ``agroweather <command> ...``.

Pipeline order: synth (optional) -> ingest -> preprocess -> adf -> train ->
evaluate -> forecast -> recommend. Every command exits 0 on success and with
the error class's own code otherwise (see ``agroweather.errors``).
"""

import argparse
import csv
import json
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import store, synth
from .advisor import GRANULARITIES, KnowledgeBase, aggregate_forecast, recommend
from .config import RunConfig, load_config
from .errors import AgroWeatherError, ConfigError, MissingArtifact, UnknownStation
from .geo import GeoPoint, StationRegistry, nearest_station
from .ingest import RAW_VARIABLES, DailySeries, ingest_files, load_aliases, read_series_csv, station_key, write_series_csv
from .nn.model import BiLstmModel
from .pipeline import forecast_physical
from .preprocess import fit_normalizer, impute, load_stats, normalize, save_stats, split
from .stats import adf_test
from .training import evaluate, train
from .windowing import WindowSet, make_windows


def _config(args):
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _daily_dir(cfg):
    return Path(cfg.work_dir) / "daily"


def _processed_dir(cfg):
    return Path(cfg.work_dir) / "processed"


def _file_key(station):
    return station_key(station).replace(" ", "_")


def _load_daily(cfg, station):
    path = _daily_dir(cfg) / f"{_file_key(station)}.csv"
    if not path.exists():
        raise MissingArtifact(f"no ingested data for {station!r} at {path}; run ingest first")
    return read_series_csv(path)[station_key(station)]


def _stations(cfg):
    daily = _daily_dir(cfg)
    found = sorted(p.stem.replace("_", " ") for p in daily.glob("*.csv")) if daily.exists() else []
    if not found:
        raise MissingArtifact(f"no ingested stations in {daily}; run ingest first")
    if not cfg.stations:
        return found
    wanted = [station_key(s) for s in cfg.stations]
    for s in wanted:
        if s not in found:
            raise UnknownStation(f"station {s!r} has no ingested data")
    return wanted


# -- split files ----------------------------------------------------------------

def _write_split(path, series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("date",) + series.feature_names)
        for d, row in zip(series.dates.astype(str), series.values):
            w.writerow([d] + [repr(float(v)) for v in row])


def _read_split(path):
    if not path.exists():
        raise MissingArtifact(f"{path} missing; run preprocess first")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = tuple(rows[0][1:])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=np.float64)
    return DailySeries("", date.fromisoformat(rows[1][0]), values, names)


def _load_splits(cfg, station):
    d = _processed_dir(cfg)
    key = _file_key(station)
    parts = [_read_split(d / f"{key}_{p}.csv") for p in ("train", "val", "test")]
    stats_path = d / f"{key}.stats"
    if not stats_path.exists():
        raise MissingArtifact(f"{stats_path} missing; run preprocess first")
    return parts, load_stats(stats_path)


# -- commands -------------------------------------------------------------------

def cmd_synth(args):
    stations = tuple(s.strip() for s in args.stations.split(",")) if args.stations else synth.DEFAULT_STATIONS
    paths = synth.write_raw(args.out_dir, seed=args.seed, stations=stations, years=args.years)
    _emit({k: str(v) for k, v in paths.items()})


def cmd_ingest(args):
    cfg = _config(args)
    raw = Path(args.raw_dir or cfg.raw_dir)
    paths = {v: raw / f"{v}.csv" for v in RAW_VARIABLES if (raw / f"{v}.csv").exists()}
    if not paths:
        raise MissingArtifact(f"no raw variable files (<variable>.csv) in {raw}")
    series = ingest_files(paths, load_aliases())
    out = _daily_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for station, s in series.items():
        path = out / f"{_file_key(station)}.csv"
        write_series_csv(s, path)
        written[station] = {"path": str(path), "days": len(s), "missing": s.missing_count()}
    _emit(written)


def cmd_preprocess(args):
    cfg = _config(args)
    out = _processed_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    report = {}
    stations = _stations(cfg)
    if cfg.mode == "combined":
        # one normalizer over every station's training rows
        parts = {s: split(impute(_load_daily(cfg, s).select(cfg.features), cfg.impute)) for s in stations}
        stats = fit_normalizer(np.concatenate([p[0].values for p in parts.values()]), cfg.features)
    for station in stations:
        if cfg.mode == "combined":
            pieces, st = parts[station], stats
        else:
            pieces = split(impute(_load_daily(cfg, station).select(cfg.features), cfg.impute))
            st = fit_normalizer(pieces[0])
        key = _file_key(station)
        for name, piece in zip(("train", "val", "test"), pieces):
            _write_split(out / f"{key}_{name}.csv", normalize(piece, st))
        save_stats(st, out / f"{key}.stats")
        report[station] = {"train": len(pieces[0]), "val": len(pieces[1]), "test": len(pieces[2])}
    _emit(report)


def cmd_adf(args):
    cfg = _config(args)
    series = impute(_load_daily(cfg, args.station), cfg.impute)
    if args.feature not in series.feature_names:
        raise ValueError(f"unknown feature {args.feature!r}")
    result = adf_test(series.column(args.feature), max_lag=args.max_lag)
    if args.json:
        _emit(result.to_dict())
    else:
        print(result.format())


def _windows_for(cfg, station, stations):
    (tr, va, te), stats = _load_splits(cfg, station)
    spec = cfg.window_spec()
    n_feat = len(cfg.features)
    sets = []
    for part in (tr, va, te):
        values = part.values
        if cfg.mode == "combined":
            onehot = np.zeros((len(values), len(stations)))
            onehot[:, stations.index(station)] = 1.0
            values = np.hstack([values, onehot])
        sets.append(make_windows(values, spec, target_columns=range(n_feat)))
    return sets, stats


def cmd_train(args):
    cfg = _config(args)
    stations = _stations(cfg)
    model_dir = Path(cfg.model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    tcfg = cfg.train_config()
    report = {}
    if cfg.mode == "combined":
        sets = {s: _windows_for(cfg, s, stations) for s in stations}
        tr = _stack([sets[s][0][0] for s in stations])
        va = _stack([sets[s][0][1] for s in stations])
        stats = sets[stations[0]][1]
        groups = [("combined", tr, va, stats,
                   list(cfg.features) + [f"station={s}" for s in stations])]
    else:
        groups = []
        for s in stations:
            (tr, va, _), stats = _windows_for(cfg, s, stations)
            groups.append((s, tr, va, stats, list(cfg.features)))
    for name, tr, va, stats, inputs in groups:
        model = BiLstmModel(cfg.model_config(len(inputs), len(cfg.features)),
                            feature_names=inputs, target_names=list(cfg.features), stats=stats)
        log = model_dir / f"{_file_key(name)}_history.csv"
        model, hist = train(model, tr, va, tcfg, log_path=log, verbose=args.verbose)
        receipt = store.save(store.ModelBundle(model, name, tcfg.to_dict(),
                                               {"window": [cfg.input_width, cfg.label_width, cfg.shift]}),
                             store.bundle_path(model_dir, name))
        report[name] = {"bundle": receipt.path, "sha256": receipt.sha256,
                        "best_epoch": hist.best_epoch, "stopped_epoch": hist.stopped_epoch,
                        "best_val_loss": min(hist.val_loss)}
    _emit(report)


def _stack(sets):
    return WindowSet(np.concatenate([w.inputs for w in sets]), np.concatenate([w.labels for w in sets]))


def _load_bundle(cfg, name):
    path = store.bundle_path(cfg.model_dir, name)
    if not path.exists():
        raise MissingArtifact(f"no trained model at {path}; run train first")
    return store.load(path)


def cmd_evaluate(args):
    cfg = _config(args)
    stations = _stations(cfg)
    report = {}
    for s in stations:
        bundle = _load_bundle(cfg, "combined" if cfg.mode == "combined" else s)
        (_, _, te), stats = _windows_for(cfg, s, stations)
        report[s] = evaluate(bundle.model, te, stats).to_dict()
    out = Path(cfg.model_dir) / "metrics.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(report)


def _forecast(cfg, lat, lon, horizon):
    if cfg.mode == "combined":
        # rollout feeds predictions back as inputs, which the one-hot model cannot do
        raise ConfigError("forecast and recommend need per-station models (mode = per_station)")
    registry = StationRegistry.from_csv(cfg.registry)
    station, dist = nearest_station(GeoPoint(lat, lon), registry)
    bundle = _load_bundle(cfg, station.station)
    series = _load_daily(cfg, station.station)
    spec = cfg.window_spec()
    if horizon > spec.label_width:
        raise ValueError(f"horizon {horizon} exceeds the {spec.label_width}-day label window")
    pred = forecast_physical(bundle.model, series, spec, horizon, cfg.impute)
    start = series.end + timedelta(days=1)
    return station, dist, start, pred, list(bundle.model.target_names)


def cmd_forecast(args):
    cfg = _config(args)
    station, dist, start, pred, names = _forecast(cfg, args.lat, args.lon, args.horizon)
    rows = aggregate_forecast(start, pred, names, args.granularity)
    _emit({
        "station": station.station,
        "distance_km": round(dist, 3),
        "start": start.isoformat(),
        "horizon_days": args.horizon,
        "granularity": args.granularity,
        "rows": [r.to_dict() for r in rows],
    })


def cmd_recommend(args):
    cfg = _config(args)
    station, dist, start, pred, names = _forecast(cfg, args.lat, args.lon, args.horizon)
    on = date.fromisoformat(args.date) if args.date else start
    summary = aggregate_forecast(start, pred, names, "monthly")
    kb = KnowledgeBase.load(cfg.thresholds, cfg.hazards, cfg.crops)
    advisory = recommend(station.district, summary, on, kb,
                         location=f"{station.station} ({dist:.1f} km away)")
    if args.text:
        print(advisory.to_text())
    else:
        print(advisory.to_json())


def cmd_nearest(args):
    registry = StationRegistry.from_csv(args.registry)
    station, dist = nearest_station(GeoPoint(args.lat, args.lon), registry)
    _emit({"station": station.station, "district": station.district, "distance_km": dist})


def cmd_inspect(args):
    if not Path(args.bundle).exists():
        raise MissingArtifact(f"{args.bundle} does not exist")
    _emit(store.inspect(args.bundle))


# -- parser ---------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="agroweather", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="key = value run configuration file")
        return sp

    sp = sub.add_parser("synth", help="write deterministic synthetic raw files")
    sp.add_argument("--out-dir", default="raw")
    sp.add_argument("--seed", type=int, default=synth.DEFAULT_SEED)
    sp.add_argument("--stations", help="comma-separated names")
    sp.add_argument("--years", type=int, default=synth.DEFAULT_YEARS)
    sp.set_defaults(func=cmd_synth)

    sp = with_config(sub.add_parser("ingest", help="raw monthly matrices -> daily CSV per station"))
    sp.add_argument("--raw-dir")
    sp.set_defaults(func=cmd_ingest)

    sp = with_config(sub.add_parser("preprocess", help="impute, split, normalize"))
    sp.set_defaults(func=cmd_preprocess)

    sp = with_config(sub.add_parser("adf", help="Augmented Dickey-Fuller test"))
    sp.add_argument("station")
    sp.add_argument("feature")
    sp.add_argument("--max-lag", type=int)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_adf)

    sp = with_config(sub.add_parser("train", help="train and save model bundles"))
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = with_config(sub.add_parser("evaluate", help="test-set metrics per station"))
    sp.set_defaults(func=cmd_evaluate)

    for name, func, helptext in (("forecast", cmd_forecast, "forecast at a coordinate"),
                                 ("recommend", cmd_recommend, "crop advice at a coordinate")):
        sp = with_config(sub.add_parser(name, help=helptext))
        sp.add_argument("--lat", type=float, required=True)
        sp.add_argument("--lon", type=float, required=True)
        sp.add_argument("--horizon", type=int, default=365)
        if name == "forecast":
            sp.add_argument("--granularity", choices=GRANULARITIES, default="monthly")
        else:
            sp.add_argument("--date", help="ISO date for the season (default: forecast start)")
            sp.add_argument("--text", action="store_true", help="human-readable output")
        sp.set_defaults(func=func)

    sp = sub.add_parser("nearest", help="nearest weather station")
    sp.add_argument("--lat", type=float, required=True)
    sp.add_argument("--lon", type=float, required=True)
    sp.add_argument("--registry")
    sp.set_defaults(func=cmd_nearest)

    sp = sub.add_parser("inspect", help="print a bundle's topology and checksum")
    sp.add_argument("bundle")
    sp.set_defaults(func=cmd_inspect)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except AgroWeatherError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
