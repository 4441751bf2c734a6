"""Command-line front end.

Exit status: 0 on success, 2 when a blowup is certified (or the pressureless
scan reports blowup), 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import envelopes as env
from .certify import CertifyOptions, certify, regime_of, GAMMA2
from .fields import PRESSURELESS, PhysicalParams, VortexData, read_grid_csv
from .functionals import compute_functionals, monte_carlo_functionals
from .pressureless import BLOWUP, bisect_threshold, scan_criterion
from .quadrature import QuadratureError

COMMANDS = ("functionals", "envelopes", "certify", "scan-pressureless", "threshold",
            "example1", "example2")

_CONFIG_KEYS = {"data", "params", "quad_tol", "t_max", "grid_n", "samples", "seed",
                "threshold", "monte_carlo"}
_VORTEX_KEYS = {"type", "mode", "b", "epsilon", "gamma", "l", "C", "Pi_bar"}
_GRID_KEYS = {"type", "path"}
_PARAM_KEYS = {"gamma", "l", "rho_bar", "p_bar", "R", "C"}
_THRESHOLD_KEYS = {"parameter", "fixed", "predicate", "bracket"}

EXAMPLE1 = {"b": -4.0, "C": 0.25, "Pi_bar": 1.0, "gamma": 2.0, "l": 1.0}
EXAMPLE2 = {"b": -0.05, "l": 1.0}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    data: dict | None = None
    params: dict | None = None
    quad_tol: float = 1e-10
    t_max: float | None = None
    grid_n: int = 512
    samples: int = 1001
    seed: int = 0
    threshold: dict | None = None
    monte_carlo: int = 0
    out: Path | None = None
    paper_literal: bool = False
    base_dir: Path = field(default_factory=Path.cwd)


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return None


def _check_keys(obj, allowed, where, text):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    for key in obj:
        if key not in allowed:
            line = _line_of(text, key)
            at = f" (line {line})" if line else ""
            raise ConfigError(f"unknown key {key!r} in {where}{at}")


def _check_finite(obj, where):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            raise ConfigError(f"non-finite number in {where}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")


def load_config(path, command):
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config: {exc.msg} at line {exc.lineno}") from None
    _check_keys(raw, _CONFIG_KEYS, "config", text)
    _check_finite(raw, "config")
    data = raw.get("data")
    if data is not None:
        kind = data.get("type") if isinstance(data, dict) else None
        if kind == "vortex":
            _check_keys(data, _VORTEX_KEYS, "data", text)
        elif kind == "grid":
            _check_keys(data, _GRID_KEYS, "data", text)
        else:
            raise ConfigError(f"data.type must be 'vortex' or 'grid', got {kind!r}")
    if raw.get("params") is not None:
        _check_keys(raw["params"], _PARAM_KEYS, "params", text)
    if raw.get("threshold") is not None:
        _check_keys(raw["threshold"], _THRESHOLD_KEYS, "threshold", text)
    cfg = RunConfig(command=command, base_dir=Path(path).resolve().parent)
    for key, value in raw.items():
        setattr(cfg, key, value)
    return cfg


def build_data(cfg):
    desc = cfg.data
    if desc is None:
        raise ConfigError("this command needs a 'data' descriptor")
    if desc["type"] == "vortex":
        kw = {k: float(v) for k, v in desc.items() if k not in ("type", "mode")}
        mode = desc.get("mode", "isentropic")
        if "b" not in kw or "epsilon" not in kw:
            raise ConfigError("vortex descriptor needs 'b' and 'epsilon'")
        try:
            return VortexData(mode=mode, **kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.params is None:
        raise ConfigError("grid data needs a 'params' object")
    p = dict(cfg.params)
    try:
        params = PhysicalParams(
            float(p["gamma"]), float(p["l"]), float(p["rho_bar"]), float(p["p_bar"]),
            float(p["R"]), None if p.get("C") is None else float(p["C"]),
        )
    except KeyError as exc:
        raise ConfigError(f"params missing {exc.args[0]!r}") from None
    path = Path(desc["path"])
    if not path.is_absolute():
        path = cfg.base_dir / path
    return read_grid_csv(path, params)


def clean(obj):
    """JSON-ready copy with floats rounded to 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.15g}")
    return obj


def dumps(obj):
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(columns):
    names = list(columns)
    rows = zip(*(np.asarray(columns[n], dtype=float) for n in names))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in rows:
        w.writerow([f"{v:.15g}" for v in row])
    return buf.getvalue()


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(cfg, name, text, stdout=True):
    if cfg.out is not None:
        write_atomic(Path(cfg.out) / name, text)
    if stdout:
        sys.stdout.write(text)


def _certificate_csv(cert):
    c = cert.curves
    cols = {"t": c["t"]}
    if "central" in c:
        cols["central"] = c["central"]
        lower = upper = c["central"]
    else:
        if "lower" in c:
            cols["lower"] = c["lower"]
        if "upper" in c:
            cols["upper"] = c["upper"]
        lower, upper = c.get("lower"), c.get("upper")
    cols["phi_minus"] = c["phi_minus"]
    cols["phi_plus"] = c["phi_plus"]
    if upper is not None:
        cols["margin_lower"] = upper - c["phi_minus"]
    if lower is not None:
        cols["margin_upper"] = c["phi_plus"] - lower
    return csv_text(cols)


def cmd_functionals(cfg):
    data = build_data(cfg)
    fs = compute_functionals(data, cfg.quad_tol)
    out = {"functionals": fs.to_dict(), "params": data.params.__dict__ | {"sigma": data.params.sigma}}
    if cfg.monte_carlo:
        mean, se = monte_carlo_functionals(data, int(cfg.monte_carlo), int(cfg.seed))
        out["monte_carlo"] = {"seed": cfg.seed, "samples": cfg.monte_carlo,
                              "mean": mean, "standard_error": se}
    _emit(cfg, "functionals.json", dumps(out))
    return 0


def envelope_columns(fs, params, t, literal):
    cols = {"t": t, "phi_minus": env.phi_minus(fs, params, t),
            "phi_plus": env.phi_plus(fs, params, t)}
    regime = regime_of(params)
    if params.pressureless:
        if params.l > 0:
            cols["central"] = env.G_exact_pressureless(fs, params, t)
        else:
            cols["central"] = env.G_polynomial_l0(fs, t)
    elif regime == GAMMA2:
        cols["central"] = env.make_envelope("G_exact_gamma2", fs, params)(t)
        if literal and params.l > 0:
            cols["central_literal"] = env.G_exact_gamma2(fs, params, t, literal=True)
    else:
        lo, hi = env.one_sided_bounds(fs, params, t)
        if lo is not None:
            cols["lower"] = lo
        if hi is not None:
            cols["upper"] = hi
        if literal:
            lo_l, hi_l = env.one_sided_bounds(fs, params, t, literal=True)
            if lo_l is not None:
                cols["lower_literal"] = lo_l
            if hi_l is not None:
                cols["upper_literal"] = hi_l
    if literal:
        cols["phi_minus_literal"] = env.phi_minus(fs, params, t, literal=True)
    return cols


def cmd_envelopes(cfg):
    data = build_data(cfg)
    fs = compute_functionals(data, cfg.quad_tol)
    from .certify import default_t_max

    t_max = cfg.t_max if cfg.t_max is not None else default_t_max(data.params)
    t = np.linspace(0.0, t_max, int(cfg.samples))
    _emit(cfg, "envelopes.csv", csv_text(envelope_columns(fs, data.params, t, cfg.paper_literal)))
    return 0


def _options(cfg):
    return CertifyOptions(t_max=cfg.t_max, n_scan=int(cfg.grid_n), quad_tol=cfg.quad_tol,
                          literal=cfg.paper_literal, samples=int(cfg.samples))


def cmd_certify(cfg):
    data = build_data(cfg)
    cert = certify(data, _options(cfg))
    _emit(cfg, "certificate.json", dumps(cert.to_dict()))
    if cfg.out is not None:
        write_atomic(Path(cfg.out) / "margins.csv", _certificate_csv(cert))
    return 2 if cert.certified else 0


def cmd_scan(cfg):
    data = build_data(cfg)
    n = data.n if hasattr(data, "gradients") else int(cfg.grid_n)
    field_ = scan_criterion(data, n)
    if cfg.out is not None:
        X1, X2 = np.meshgrid(field_.x1, field_.x2, indexing="xy")
        write_atomic(Path(cfg.out) / "criterion.csv",
                     csv_text({"x1": X1.ravel(), "x2": X2.ravel(), "value": field_.values.ravel()}))
    _emit(cfg, "criterion.json", dumps(field_.summary()))
    return 2 if field_.verdict == BLOWUP else 0


def cmd_threshold(cfg):
    th = cfg.threshold
    if th is None:
        raise ConfigError("threshold command needs a 'threshold' object")
    result = bisect_threshold(th["parameter"], th.get("fixed", EXAMPLE2),
                              th.get("predicate", "criterion-smooth"),
                              tuple(th.get("bracket", (0.0, 10.0))), n=int(cfg.grid_n),
                              rtol=cfg.quad_tol)
    _emit(cfg, "threshold.json", dumps(result))
    return 0


def cmd_example1(cfg):
    certified = False
    summary = {}
    for eps in (10.0, -10.0):
        data = VortexData(epsilon=eps, **EXAMPLE1)
        cert = certify(data, _options(cfg))
        certified |= cert.certified
        tag = f"eps{eps:+g}"
        summary[tag] = {
            "certified": cert.certified,
            "T_star": cert.T_star,
            "mechanisms": cert.mechanisms,
            "radial_sign": data.radial_sign,
            "horizon": 2.0 * math.pi / data.l,
        }
        if cfg.out is not None:
            write_atomic(Path(cfg.out) / f"example1_{tag}.json", dumps(cert.to_dict()))
            write_atomic(Path(cfg.out) / f"example1_{tag}.csv", _certificate_csv(cert))
    _emit(cfg, "example1.json", dumps(summary))
    return 2 if certified else 0


def example2_summary(n=512, quad_tol=1e-10):
    """Criterion and certificate thresholds for the pressureless vortex."""
    b_fixed = {"epsilon": 0.0, "l": 1.0}
    runs = {
        "b_lower": bisect_threshold("b", b_fixed, "criterion-smooth", (-0.5, 0.0), n=n),
        "b_upper": bisect_threshold("b", b_fixed, "criterion-smooth", (0.0, 1.0), n=n),
        "epsilon_lower": bisect_threshold("epsilon", EXAMPLE2, "criterion-smooth", (-10.0, 0.0), n=n),
        "epsilon_upper": bisect_threshold("epsilon", EXAMPLE2, "criterion-smooth", (0.0, 10.0), n=n),
        "certificate_lower": bisect_threshold("epsilon", EXAMPLE2, "certificate-issued",
                                              (-60.0, -10.0), rtol=quad_tol),
        "certificate_upper": bisect_threshold("epsilon", EXAMPLE2, "certificate-issued",
                                              (10.0, 60.0), rtol=quad_tol),
    }
    table = {
        "criterion_b_interval": [runs["b_lower"]["value"], runs["b_upper"]["value"]],
        "criterion_epsilon_interval": [runs["epsilon_lower"]["value"],
                                       runs["epsilon_upper"]["value"]],
        "certificate_epsilon_thresholds": [runs["certificate_lower"]["value"],
                                           runs["certificate_upper"]["value"]],
        "energy_free_amplitude_threshold": energy_free_amplitude_threshold(),
    }
    return {"summary": table, "runs": runs}


def energy_free_amplitude_threshold(b=-0.05, l=1.0, bracket=(10.0, 60.0), tol=1e-3):
    """Smallest epsilon where either amplitude condition fires with ``l^2 G0 - l F20`` for A.

    Dropping the energy term from the constant is not a valid bound; this
    figure is reported for comparison only.
    """
    from .certify import quick_test_amplitude

    def fires(eps):
        data = VortexData(b, eps, mode=PRESSURELESS, l=l)
        fs = compute_functionals(data)
        A = l * l * fs.G0 - l * fs.F20
        res = quick_test_amplitude(fs, data.params, A=A)
        return res["lower"] or res["upper"]

    lo, hi = bracket
    if fires(lo) == fires(hi):
        return None
    f_lo = fires(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fires(mid) == f_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cmd_example2(cfg):
    result = example2_summary(int(cfg.grid_n), cfg.quad_tol)
    _emit(cfg, "example2.json", dumps(result["summary"]))
    if cfg.out is not None:
        write_atomic(Path(cfg.out) / "example2_runs.json", dumps(result["runs"]))
    return 0


HANDLERS = {
    "functionals": cmd_functionals,
    "envelopes": cmd_envelopes,
    "certify": cmd_certify,
    "scan-pressureless": cmd_scan,
    "threshold": cmd_threshold,
    "example1": cmd_example1,
    "example2": cmd_example2,
}


def build_parser():
    p = argparse.ArgumentParser(prog="rotgas", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--t-max", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--quad-tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-literal", action="store_true",
                   help="also evaluate the uncorrected formula variants for comparison")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command) if args.config else RunConfig(args.command)
        for flag, attr in (("t_max", "t_max"), ("samples", "samples"), ("grid_n", "grid_n"),
                           ("quad_tol", "quad_tol"), ("seed", "seed")):
            value = getattr(args, flag)
            if value is not None:
                if not math.isfinite(value):
                    raise ConfigError(f"--{flag.replace('_', '-')} must be finite")
                setattr(cfg, attr, value)
        cfg.out = args.out
        cfg.paper_literal = args.paper_literal
        return HANDLERS[args.command](cfg)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
