"""Config-driven experiment harness.

``ssfkit <subcommand> --config <path> [--out <dir>] [--ell ...] [--phi ...]
[--R a,b,c,d]`` reads an INI-style experiment description with sections
``[potential]``, ``[boundary]``, ``[experiment]``, runs one of the
experiment families, and emits a deterministic CSV plus a JSON sidecar
with the fully resolved configuration.  Re-running a config reproduces
the CSV byte for byte.
"""

import argparse
import configparser
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, SsfkitError
from .krein import krein_identity_residual, krein_matrix, krein_matrix_free
from .model import (BoundaryData, Potential, bc_constants, gaussian,
                    piecewise_constant, poschl_teller, square_well,
                    zero_potential)
from .spectrum import eigenvalues_coupled, eigenvalues_dirichlet
from .ssf import (TestFunction, make_test_function, pairing, ssf_finite,
                  ssf_line, trace_formula_report)
from .trace_ideals import diagnostic_series

SUBCOMMANDS = ("constants", "spectrum", "ssf", "krein-check", "converge", "trace-ideals")

_DEFAULTS = {
    "ell_list": (4.0, 8.0, 16.0, 32.0),
    "lambda_max": 400.0,
    "test_functions": ("bump:-1:9", "const_one", "indicator:0:10"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    potential: Potential
    bc: BoundaryData
    ell_list: tuple
    lambda_max: float
    z_list: tuple
    test_functions: tuple  # of TestFunction
    output_dir: str | None
    resolved: dict  # fully materialized, for the JSON sidecar


@dataclass
class ResultTable:
    """CSV-serializable result rows with a fixed column order."""

    name: str
    columns: tuple
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row arity {len(row)} != columns {len(self.columns)}")
        clean = tuple(
            float(v) if isinstance(v, np.floating)
            else int(v) if isinstance(v, np.integer)
            else v
            for v in row
        )
        self.rows.append(clean)

    def finalize(self):
        self.rows.sort(key=lambda r: tuple(repr(v) for v in r))

    def to_csv(self) -> str:
        def fmt(v):
            if isinstance(v, float):
                return repr(v)
            return str(v)

        lines = [",".join(self.columns)]
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{self.name}.csv").write_text(self.to_csv())
        (out / f"{self.name}.config.json").write_text(
            json.dumps(self.config, sort_keys=True, indent=2) + "\n"
        )


def _floats_list(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated float list, got {text!r}") from exc


def _build_potential(sec) -> tuple[Potential, dict]:
    kind = sec.get("kind", "").strip()
    try:
        if kind == "square_well":
            spec = {"kind": kind, "depth": sec.getfloat("depth"),
                    "halfwidth": sec.getfloat("halfwidth")}
            return square_well(spec["depth"], spec["halfwidth"]), spec
        if kind == "gaussian":
            spec = {"kind": kind, "amplitude": sec.getfloat("amplitude"),
                    "sigma": sec.getfloat("sigma"), "cutoff": sec.getfloat("cutoff")}
            return gaussian(spec["amplitude"], spec["sigma"], spec["cutoff"]), spec
        if kind == "poschl_teller":
            spec = {"kind": kind, "strength": sec.getfloat("strength"),
                    "scale": sec.getfloat("scale"), "cutoff": sec.getfloat("cutoff")}
            return poschl_teller(spec["strength"], spec["scale"], spec["cutoff"]), spec
        if kind == "piecewise_constant":
            bps = _floats_list(sec.get("breakpoints", ""))
            vals = _floats_list(sec.get("values", ""))
            spec = {"kind": kind, "breakpoints": list(bps), "values": list(vals)}
            return piecewise_constant(bps, vals), spec
        if kind == "zero":
            hw = sec.getfloat("halfwidth", fallback=1.0)
            return zero_potential(hw), {"kind": kind, "halfwidth": hw}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[potential] {kind}: {exc}") from exc
    raise ConfigError(
        f"[potential] kind must be one of square_well, gaussian, poschl_teller, "
        f"piecewise_constant, zero (got {kind!r})"
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate the key-value tree; defaults are materialized.

    Violations of the model hypotheses (det R = 1, R_{1,2} != 0,
    phi in [0, pi)) are rejected with the constraint named.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section in ("potential", "boundary"):
        if section not in parser:
            raise ConfigError(f"missing [{section}] section")
    potential, pot_spec = _build_potential(parser["potential"])

    bsec = parser["boundary"]
    try:
        phi = bsec.getfloat("phi", fallback=0.0)
        r_entries = _floats_list(bsec.get("r", fallback="1, 1, 0, 1"))
    except ValueError as exc:
        raise ConfigError(f"[boundary]: {exc}") from exc
    if len(r_entries) != 4:
        raise ConfigError(f"[boundary] r needs 4 entries r11,r12,r21,r22 (got {len(r_entries)})")
    try:
        bc = BoundaryData(phi=phi, r=((r_entries[0], r_entries[1]),
                                      (r_entries[2], r_entries[3])))
    except DomainError as exc:
        raise ConfigError(f"[boundary] violates the admissibility hypothesis: {exc}") from exc

    esec = parser["experiment"] if "experiment" in parser else {}

    def get(key, default):
        return esec.get(key, default) if hasattr(esec, "get") else default

    ell_list = _floats_list(get("ell_list", "")) or _DEFAULTS["ell_list"]
    lambda_max = float(get("lambda_max", _DEFAULTS["lambda_max"]))
    cc = bc_constants(potential, bc)
    default_z = -((cc.k_r_max + 1.0) ** 2)
    z_text = get("z_list", "")
    z_list = _floats_list(z_text) if z_text else (default_z,)
    tf_text = get("test_functions", "")
    tf_specs = tuple(p.strip() for p in tf_text.split(",") if p.strip()) or \
        _DEFAULTS["test_functions"]
    try:
        test_functions = tuple(make_test_function(s) for s in tf_specs)
    except DomainError as exc:
        raise ConfigError(f"[experiment] test_functions: {exc}") from exc
    output_dir = get("output_dir", None)

    resolved = {
        "potential": pot_spec,
        "boundary": {"phi": phi, "r": [list(r) for r in bc.r]},
        "experiment": {
            "ell_list": list(ell_list),
            "lambda_max": lambda_max,
            "z_list": list(z_list),
            "test_functions": [tf.name for tf in test_functions],
            "output_dir": output_dir,
            "derived_constants": {
                "m_v": cc.m_v, "n_r": cc.n_r, "k_r0": cc.k_r0,
                "k_r_max": cc.k_r_max,
                "lower_bound_line": cc.lower_bound_line,
                "lower_bound_interval": cc.lower_bound_interval,
            },
        },
    }
    return ExperimentConfig(potential=potential, bc=bc, ell_list=ell_list,
                            lambda_max=lambda_max, z_list=z_list,
                            test_functions=test_functions,
                            output_dir=output_dir, resolved=resolved)


def _run_constants(cfg: ExperimentConfig) -> ResultTable:
    cc = bc_constants(cfg.potential, cfg.bc)
    t = ResultTable("constants", ("quantity", "value", "error_bound"),
                    config=cfg.resolved)
    quad = 1e-10  # negative-part mass quadrature target
    t.add("k_r0", cc.k_r0, 0.0)
    t.add("k_r_max", cc.k_r_max, 0.0)
    t.add("lower_bound_interval", cc.lower_bound_interval, quad)
    t.add("lower_bound_line", cc.lower_bound_line, (1.0 + 2.0 * cc.m_v) * quad)
    t.add("m_v", cc.m_v, quad)
    t.add("n_r", cc.n_r, 0.0)
    t.finalize()
    return t


def _run_spectrum(cfg: ExperimentConfig) -> ResultTable:
    t = ResultTable("spectrum", ("ell", "lambda", "multiplicity", "kind", "error_bound"),
                    config=cfg.resolved)
    for ell in cfg.ell_list:
        dir_eigs = eigenvalues_dirichlet(cfg.potential, ell, cfg.lambda_max)
        for lam, mult in zip(dir_eigs.values, dir_eigs.multiplicities):
            t.add(ell, lam, mult, "dirichlet", 1e-12 * max(1.0, abs(lam)))
        cpl = eigenvalues_coupled(cfg.potential, cfg.bc, ell, cfg.lambda_max)
        for lam, mult in zip(cpl.values, cpl.multiplicities):
            t.add(ell, lam, mult, "coupled", 1e-12 * max(1.0, abs(lam)))
    t.finalize()
    return t


def _run_ssf(cfg: ExperimentConfig) -> ResultTable:
    t = ResultTable("ssf", ("kind", "ell", "lambda", "xi", "error_bound"),
                    config=cfg.resolved)
    hi = min(cfg.lambda_max, 50.0)
    cc = bc_constants(cfg.potential, cfg.bc)
    lams = np.linspace(cc.lower_bound_interval, hi, 201)
    for ell in cfg.ell_list:
        s = ssf_finite(cfg.potential, cfg.bc, ell, cfg.lambda_max)
        for lam, xi in zip(lams, s(lams)):
            t.add("finite", ell, float(lam), float(xi), 0.0)
    line = ssf_line(cfg.potential)
    for lam in lams:
        t.add("line", math.inf, float(lam), float(line(float(lam))), 1e-6)
    t.finalize()
    return t


def _run_krein_check(cfg: ExperimentConfig) -> ResultTable:
    t = ResultTable("krein_check",
                    ("check", "ell", "parameter", "value", "error_bound"),
                    config=cfg.resolved)
    cc = bc_constants(cfg.potential, cfg.bc)
    for ell in cfg.ell_list:
        for z in cfg.z_list:
            res = krein_identity_residual(cfg.potential, cfg.bc, z, ell)
            t.add("identity_residual", ell, z, res, 0.0)
            km = krein_matrix(cfg.potential, cfg.bc, z, ell)
            t.add("abs_det_k", ell, z, abs(km.det), 0.0)
        # det K0 sweep toward the polynomial limit.
        for k in (cc.k_r_max + 1.0, cc.k_r_max + 2.0, 10.0, 100.0, 1000.0):
            if k <= math.sqrt(1.0 + cc.n_r):
                continue
            kf = krein_matrix_free(cfg.bc, k, ell)
            t.add("abs_det_free_minus_p", ell, k, abs(kf.det - kf.p_r0), 0.0)
    t.finalize()
    return t


def _run_converge(cfg: ExperimentConfig) -> ResultTable:
    t = ResultTable(
        "converge",
        ("test_function", "weighted", "ell", "value_finite", "value_line",
         "gap", "error_bound"),
        config=cfg.resolved,
    )
    line = ssf_line(cfg.potential)
    for tf in cfg.test_functions:
        modes = [True] if tf.support is None else [True, False]
        for weighted in modes:
            i_line = pairing(line, tf, weighted, lambda_cutoff=cfg.lambda_max)
            for ell in cfg.ell_list:
                s = ssf_finite(cfg.potential, cfg.bc, ell, cfg.lambda_max)
                i_fin = pairing(s, tf, weighted)
                gap = abs(i_fin.value - i_line.value)
                err = (i_fin.quadrature_error + i_fin.tail_bound
                       + i_line.quadrature_error + i_line.tail_bound)
                t.add(tf.name, int(weighted), ell, i_fin.value, i_line.value,
                      gap, err)
    t.finalize()
    return t


def _run_trace_ideals(cfg: ExperimentConfig) -> ResultTable:
    t = ResultTable("trace_ideals",
                    ("mode", "kind", "parameter", "p", "norm", "n_nodes", "error_bound"),
                    config=cfg.resolved)
    ell0 = min(cfg.ell_list)
    rows = diagnostic_series(cfg.potential, cfg.bc, "z_to_minus_infinity", ell=ell0)
    rows += diagnostic_series(cfg.potential, cfg.bc, "ell_to_infinity",
                              z=cfg.z_list[0], ells=cfg.ell_list)
    for r in rows:
        t.add(r.mode, r.kind, r.parameter, r.p, r.norm, r.n_nodes, 1e-8)
    t.finalize()
    return t


_RUNNERS = {
    "constants": _run_constants,
    "spectrum": _run_spectrum,
    "ssf": _run_ssf,
    "krein-check": _run_krein_check,
    "converge": _run_converge,
    "trace-ideals": _run_trace_ideals,
}


def run(config: ExperimentConfig, subcommand: str) -> ResultTable:
    """Execute one experiment family against a resolved configuration."""
    if subcommand not in _RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {SUBCOMMANDS}")
    return _RUNNERS[subcommand](config)


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    text_parts = []
    if args.ell:
        text_parts.append(("experiment", "ell_list", args.ell))
    if args.phi is not None:
        text_parts.append(("boundary", "phi", repr(args.phi)))
    if args.R:
        text_parts.append(("boundary", "r", args.R))
    if not text_parts:
        return cfg
    # Rebuild from the resolved dict plus overrides; keeps validation in
    # one place.
    parser = configparser.ConfigParser()
    res = cfg.resolved
    parser["potential"] = {k: str(v) for k, v in res["potential"].items()
                           if not isinstance(v, list)}
    if res["potential"]["kind"] == "piecewise_constant":
        parser["potential"]["breakpoints"] = ", ".join(map(repr, res["potential"]["breakpoints"]))
        parser["potential"]["values"] = ", ".join(map(repr, res["potential"]["values"]))
    parser["boundary"] = {
        "phi": repr(res["boundary"]["phi"]),
        "r": ", ".join(repr(v) for row in res["boundary"]["r"] for v in row),
    }
    exp = res["experiment"]
    parser["experiment"] = {
        "ell_list": ", ".join(map(repr, exp["ell_list"])),
        "lambda_max": repr(exp["lambda_max"]),
        "z_list": ", ".join(map(repr, exp["z_list"])),
        "test_functions": ", ".join(exp["test_functions"]),
    }
    if exp["output_dir"]:
        parser["experiment"]["output_dir"] = exp["output_dir"]
    for section, key, value in text_parts:
        parser[section][key] = value
    import io
    buf = io.StringIO()
    parser.write(buf)
    return parse_config(buf.getvalue())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ssfkit",
        description="Spectral-shift experiments for interval Schrodinger "
                    "operators with coupled boundary conditions.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--ell", default=None, help="comma-separated interval half-lengths")
        p.add_argument("--phi", type=float, default=None, help="boundary phase in [0, pi)")
        p.add_argument("--R", default=None, help="boundary matrix as r11,r12,r21,r22")
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text())
        cfg = _apply_overrides(cfg, args)
        table = run(cfg, args.subcommand)
    except (SsfkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or cfg.output_dir
    if out_dir:
        table.write(out_dir)
        print(f"wrote {out_dir}/{table.name}.csv", file=sys.stderr)
    sys.stdout.write(table.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
