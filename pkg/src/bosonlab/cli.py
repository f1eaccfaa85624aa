"""Command-line front end.

One subcommand per claim cluster: normal-order, quantize, spectrum,
trace-check, lattice-check, incompressibility, boltzmann, invariance,
dual-check.  Reports are structured (json or csv) with every pass/fail
accompanied by the measured value and its threshold; --dump writes the
intermediate artifacts in the owning module's text formats and --plot-dir
renders diagnostic figures.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage/config error,
3 numerical precondition failure (e.g. truncation inadequate).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import (
    BlowUpError,
    BosonLabError,
    ConfigError,
    DimensionLimitError,
    ExpressionError,
    TruncationError,
    ValidationError,
)
from .expressions import (
    parse_classical,
    parse_expression,
    parse_operator_words,
    parse_phase_space,
)
from . import plots
from .ensemble_dynamics import (
    FlowEnsemble,
    OdeSystem,
    boltzmann_sample,
    divergence_polynomial,
    dual_operator,
    gaussian_oracle_moments,
    invariance_test,
    is_statistically_incompressible,
    snapshot_from_text,
    snapshot_to_text,
)
from .fock_numerics import (
    FockBasis,
    build_matrix,
    matrix_to_text,
    trace_product,
)
from .lattice_field import (
    LatticeModel,
    ModeTransform,
    classical_hamiltonian,
    field_energy,
    load_model,
    mode_variables,
    normal_hamiltonian,
    random_configuration,
)
from .operator_algebra import (
    ClassicalState,
    OperatorPolynomial,
    evaluate_classical,
    format_classical_polynomial,
    format_operator_polynomial,
    normal_product,
    polynomial_to_records,
    quantize_raw,
)
from .pmap import (
    WeightedEnsemble,
    adequate_basis,
    ensemble_from_text,
    ensemble_to_text,
    phase_quadrature,
    rho_of_state,
    trace_theorem_check,
)
from .scalars import RationalComplex
from .spectral import analyze, build_M, level_set_sampler

USAGE_ERROR = 2
NUMERICAL_ERROR = 3


def _exact_or_float(text: str):
    """Numeric CLI values stay exact rationals when the literal allows it."""
    try:
        return RationalComplex(Fraction(Decimal(text)))
    except (InvalidOperation, ValueError, ArithmeticError):
        return float(text)


def _format_poly(p) -> str:
    if isinstance(p, OperatorPolynomial):
        return format_operator_polynomial(p)
    return format_classical_polynomial(p)


def _infer_mode_names(*texts, override=None):
    if override is not None:
        return [str(i) for i in range(override)]
    indices = set()
    for text in texts:
        for m in re.finditer(r"\b(?:ad|al|a)([0-9]+)", text or ""):
            indices.add(int(m.group(1)))
    count = max(indices) + 1 if indices else 1
    return [str(i) for i in range(count)]


def _infer_pairs(*texts, override=None):
    if override is not None:
        return override
    indices = set()
    for text in texts:
        for m in re.finditer(r"\b(?:phi|pi)([0-9]+)", text or ""):
            indices.add(int(m.group(1)))
    return max(indices) + 1 if indices else 1


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--param expects NAME=VALUE, got {item!r}")
        name, _, value = item.partition("=")
        params[name.strip()] = value.strip()
    return params


def _cutoffs_for(n_modes: int, cutoff_args) -> FockBasis:
    if len(cutoff_args) == 1:
        return FockBasis([cutoff_args[0]] * n_modes)
    if len(cutoff_args) != n_modes:
        raise ConfigError(
            f"--cutoff needs one value or one per mode ({n_modes}), got {len(cutoff_args)}"
        )
    return FockBasis(cutoff_args)


def _parse_ensemble_spec(spec: str, n_modes: int, h=None, default_seed: int = 0) -> WeightedEnsemble:
    """Built-in ensemble constructors addressable from the command line.

    point:<re>,<im>[,...];<re>,<im>[,...]   equally weighted point masses
    phase:<K>:<radius>                      uniform phase quadrature (mode 0)
    levelset:<E>:<count>:<seed>             level-set sampler for --h
    file:<path>                             ensemble text file
    """
    kind, _, rest = spec.partition(":")
    if kind == "point":
        states = []
        for member in rest.split(";"):
            vals = [float(x) for x in member.split(",") if x.strip() != ""]
            if len(vals) != 2 * n_modes:
                raise ConfigError(
                    f"point member {member!r} needs {2 * n_modes} numbers (re,im per mode)"
                )
            states.append(ClassicalState(
                [complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]
            ))
        return WeightedEnsemble.uniform(states)
    if kind == "phase":
        parts = rest.split(":")
        if len(parts) != 2:
            raise ConfigError("phase ensemble spec is phase:<K>:<radius>")
        return phase_quadrature(float(parts[1]), int(parts[0]), n_modes=n_modes)
    if kind == "levelset":
        parts = rest.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError("levelset ensemble spec is levelset:<E>:<count>:<seed>")
        if h is None:
            raise ConfigError("levelset ensembles need a classical Hamiltonian (--h)")
        seed = int(parts[2]) if len(parts) == 3 else default_seed
        return level_set_sampler(h, float(parts[0]), int(parts[1]), seed)
    if kind == "file":
        return ensemble_from_text(Path(rest).read_text())
    raise ConfigError(f"unknown ensemble spec {spec!r}")


def _check(name: str, value, tolerance, passed) -> dict:
    return {"name": name, "value": value, "tolerance": tolerance, "passed": bool(passed)}


def _dump(args, name: str, text: str):
    if args.dump:
        directory = Path(args.dump)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / name).write_text(text)


def _plot_path(args, name: str):
    if not args.plot_dir:
        return None
    directory = Path(args.plot_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (config, results, checks, text_lines)
# ---------------------------------------------------------------------------

def cmd_normal_order(args):
    mode_names = _infer_mode_names(args.expr, override=args.modes)
    params = _parse_params(args.param)
    poly = parse_expression(args.expr, mode_names, params)
    if isinstance(poly, OperatorPolynomial):
        words = parse_operator_words(args.expr, mode_names, params)
        reordered = normal_product(words)
        kind = "operator"
    else:
        reordered = normal_product(poly)
        kind = "classical"
    canonical = _format_poly(poly)
    config = {"expr": args.expr, "modes": len(mode_names), "seed": None}
    results = {
        "kind": kind,
        "canonical": canonical,
        "normal_product": format_operator_polynomial(reordered),
    }
    _dump(args, "canonical.poly.txt", polynomial_to_records(poly))
    _dump(args, "normal_product.poly.txt", polynomial_to_records(reordered))
    return config, results, [], [canonical]


def cmd_quantize(args):
    mode_names = _infer_mode_names(args.g, override=args.modes)
    params = _parse_params(args.param)
    g = parse_classical(args.g, mode_names, params)
    gn = normal_product(g)
    gr = quantize_raw(g)
    diff = gr - gn
    checks = []
    if g.is_real_valued():
        checks.append(_check("normal_quantization_hermitian", gn.is_hermitian(), None, gn.is_hermitian()))
    config = {"g": args.g, "modes": len(mode_names), "seed": None}
    results = {
        "normal": format_operator_polynomial(gn),
        "raw": format_operator_polynomial(gr),
        "raw_minus_normal": format_operator_polynomial(diff),
    }
    _dump(args, "normal.poly.txt", polynomial_to_records(gn))
    _dump(args, "raw.poly.txt", polynomial_to_records(gr))
    text = [f"normal: {results['normal']}", f"raw: {results['raw']}",
            f"raw - normal: {results['raw_minus_normal']}"]
    return config, results, checks, text


def cmd_spectrum(args):
    mode_names = _infer_mode_names(args.h, override=args.modes)
    params = _parse_params(args.param)
    h = parse_classical(args.h, mode_names, params)
    energy = _exact_or_float(args.energy)
    basis = _cutoffs_for(h.n_modes, args.cutoff)
    ensemble = None
    if args.ensemble:
        ensemble = _parse_ensemble_spec(args.ensemble, h.n_modes, h=h, default_seed=args.seed)
    report = analyze(h, energy, ensemble, basis, tol=args.zero_tol, tail_tol=args.tail_tol)
    checks = []
    if ensemble is not None:
        checks.append(_check("ensemble_residual_small", report.ensemble_residual,
                             args.residual_tol, abs(report.ensemble_residual) <= args.residual_tol))
    config = {
        "h": args.h, "energy": args.energy, "cutoffs": list(basis.cutoffs),
        "ensemble": args.ensemble, "zero_tol": args.zero_tol,
        "residual_tol": args.residual_tol, "seed": args.seed,
    }
    results = report.as_dict()
    m_poly = build_M(h, energy)
    results["operator"] = format_operator_polynomial(m_poly)
    _dump(args, "spectral_operator.poly.txt", polynomial_to_records(m_poly))
    _dump(args, "spectral_operator.matrix.txt", matrix_to_text(build_matrix(m_poly, basis)))
    if ensemble is not None:
        _dump(args, "ensemble.txt", ensemble_to_text(ensemble))
    path = _plot_path(args, "spectrum.png")
    if path:
        plots.save_spectrum_plot(report, path)
    if ensemble is not None:
        path = _plot_path(args, "ensemble.png")
        if path:
            plots.save_ensemble_plot(ensemble, path)
    text = [
        f"operator: {results['operator']}",
        f"zero eigenspace dimension: {report.zero_space_dimension} "
        f"(tol {report.zero_tolerance:.3e})",
        "zero modes (dominant occupation): "
        + (", ".join(str(list(z)) for z in report.zero_modes) if report.zero_modes else "none"),
        f"min eigenvalue: {report.min_eigenvalue:.6g}",
    ]
    if ensemble is not None:
        text.append(f"ensemble residual: {report.ensemble_residual:.3e}")
        text.append(f"projection deficit: {report.ensemble_projection_deficit:.6g}")
    return config, results, checks, text


def cmd_trace_check(args):
    mode_names = _infer_mode_names(args.g, args.h, override=args.modes)
    params = _parse_params(args.param)
    g = parse_classical(args.g, mode_names, params)
    h = parse_classical(args.h, mode_names, params) if args.h else None
    ensemble = _parse_ensemble_spec(args.ensemble, g.n_modes, h=h, default_seed=args.seed)
    if args.cutoff:
        basis = _cutoffs_for(g.n_modes, args.cutoff)
    else:
        basis = adequate_basis(ensemble, degree=g.degree(), tail_tol=args.tail_tol)
    report = trace_theorem_check(g, ensemble, basis, max_degree=args.max_degree,
                                 tail_tol=args.tail_tol)
    checks = [_check("trace_residual", report.residual, args.tol, report.residual <= args.tol)]
    config = {
        "g": args.g, "ensemble": args.ensemble, "cutoffs": list(basis.cutoffs),
        "tol": args.tol, "tail_tol": args.tail_tol, "seed": args.seed,
    }
    results = report.as_dict()
    _dump(args, "observable.poly.txt", polynomial_to_records(g))
    _dump(args, "quantized.poly.txt", polynomial_to_records(normal_product(g)))
    _dump(args, "ensemble.txt", ensemble_to_text(ensemble))
    path = _plot_path(args, "trace_check.png")
    if path:
        plots.save_trace_check_plot(report, path)
    path = _plot_path(args, "ensemble.png")
    if path:
        plots.save_ensemble_plot(ensemble, path)
    text = [
        f"classical expectation: {report.classical_expectation:.12g}",
        f"quantum trace: {report.quantum_trace:.12g}",
        f"residual: {report.residual:.3e} (tol {args.tol:.3e})",
    ]
    return config, results, checks, text


def cmd_lattice_check(args):
    if args.model:
        model, file_cutoffs = load_model(Path(args.model).read_text())
    else:
        interaction = None
        if args.interaction:
            interaction = parse_phase_space(args.interaction, len(args.mass))
        model = LatticeModel(sites=args.sites, masses=tuple(args.mass),
                             spacing=args.spacing, interaction=interaction)
        file_cutoffs = None
    cutoff_args = args.cutoff or file_cutoffs or [8]
    basis = _cutoffs_for(model.n_modes, cutoff_args)

    h = classical_hamiltonian(model)
    hn = normal_hamiltonian(model)
    hn_matrix = build_matrix(hn, basis)
    rng = np.random.default_rng(args.seed)

    energy_errors = []
    trace_residuals = []
    for _ in range(args.samples):
        cfg = random_configuration(model, rng, scale=args.scale)
        s = mode_variables(cfg, model)
        direct = field_energy(cfg, model)
        via_modes = evaluate_classical(h, s).real
        energy_errors.append(abs(via_modes - direct))
        rho = rho_of_state(s, basis, tail_tol=args.tail_tol)
        trace_residuals.append(abs(trace_product(hn_matrix, rho).real - direct))

    frequencies = classical_frequencies(model)
    checks = [
        _check("energy_consistency", max(energy_errors), args.energy_tol,
               max(energy_errors) <= args.energy_tol),
        _check("trace_theorem", max(trace_residuals), args.trace_tol,
               max(trace_residuals) <= args.trace_tol),
    ]
    results = {
        "modes": model.n_modes,
        "frequencies": [[float(w) for w in row] for row in frequencies],
        "energy_errors": energy_errors,
        "trace_residuals": trace_residuals,
    }
    if model.interaction is None:
        vacuum = float(trace_product(hn_matrix, rho_of_state(
            ClassicalState([0j] * model.n_modes), basis)).real)
        checks.append(_check("vacuum_energy_zero", vacuum, 0.0, vacuum == 0.0))
        diag = np.real(np.diag(hn_matrix.data))
        off = float(np.max(np.abs(hn_matrix.data - np.diag(np.diag(hn_matrix.data)))))
        expected = _free_spectrum(model, basis)
        match = bool(off == 0.0 and np.array_equal(np.sort(diag), np.sort(expected)))
        checks.append(_check("free_spectrum_exact", match, None, match))
        results["free_spectrum"] = sorted(float(x) for x in diag)
    config = {
        "model": args.model, "sites": model.sites, "masses": list(model.masses),
        "spacing": model.spacing,
        "interaction": args.interaction if not args.model else None,
        "cutoffs": list(basis.cutoffs), "samples": args.samples,
        "scale": args.scale, "seed": args.seed,
    }
    _dump(args, "hamiltonian.poly.txt", polynomial_to_records(h))
    _dump(args, "quantized_hamiltonian.poly.txt", polynomial_to_records(hn))
    path = _plot_path(args, "lattice_check.png")
    if path:
        plots.save_lattice_plot(frequencies, trace_residuals, path)
    text = [
        f"modes: {model.n_modes}",
        f"max energy-consistency error: {max(energy_errors):.3e}",
        f"max trace residual: {max(trace_residuals):.3e}",
    ]
    return config, results, checks, text


def classical_frequencies(model: LatticeModel) -> np.ndarray:
    return ModeTransform(model).frequencies


def _free_spectrum(model: LatticeModel, basis: FockBasis) -> np.ndarray:
    freqs = classical_frequencies(model).ravel()
    values = np.zeros(basis.total_dimension)
    for idx in range(basis.total_dimension):
        occ = basis.occupation_of(idx)
        total = 0.0
        for n, w in zip(occ, freqs):
            total += n * w
        values[idx] = total
    return values


def _build_system(args):
    pairs = _infer_pairs(args.h, args.field, override=args.pairs)
    if args.h:
        return OdeSystem.from_hamiltonian(parse_phase_space(args.h, pairs)), pairs
    if args.field:
        comps = [parse_phase_space(c, pairs) for c in args.field.split(";")]
        return OdeSystem.from_field_polynomials(comps), pairs
    raise ConfigError("supply --h (Hamiltonian) or --field (vector-field components)")


def cmd_incompressibility(args):
    sys_, pairs = _build_system(args)
    rng = np.random.default_rng(args.seed)
    points = [
        (rng.normal(0.0, args.scale, pairs), rng.normal(0.0, args.scale, pairs))
        for _ in range(args.samples)
    ]
    flag, worst = is_statistically_incompressible(sys_, points)
    div_poly = divergence_polynomial(sys_)
    checks = []
    if args.expect:
        want = args.expect == "incompressible"
        checks.append(_check("expected_incompressibility", flag, None, flag == want))
    config = {
        "h": args.h, "field": args.field, "pairs": pairs,
        "samples": args.samples, "scale": args.scale, "seed": args.seed,
    }
    results = {
        "incompressible": flag,
        "max_abs_divergence": worst,
        "symbolic_divergence_zero": div_poly.is_zero,
    }
    _dump(args, "sample_points.txt", snapshot_to_text(FlowEnsemble(
        np.array([p[0] for p in points]), np.array([p[1] for p in points])
    )))
    text = [
        f"incompressible: {flag}",
        f"max |divergence| over samples: {worst:.3e}",
        f"symbolic divergence identically zero: {div_poly.is_zero}",
    ]
    return config, results, checks, text


def cmd_boltzmann(args):
    pairs = _infer_pairs(args.h, override=args.pairs)
    h = parse_phase_space(args.h, pairs)
    sys_ = OdeSystem.from_hamiltonian(h)
    k = float(_exact_or_float(args.k))
    ens = boltzmann_sample(sys_, k, args.count, args.seed,
                           burn_in=args.burn_in, thin=args.thin)
    energies = np.asarray(h.evaluate(ens.phi, ens.pi), dtype=float)
    n = ens.size

    moments = {"mean_energy": (float(np.mean(energies)),
                               float(np.std(energies, ddof=1) / math.sqrt(n)))}
    for i in range(pairs):
        for label, arr in ((f"phi{i}^2", ens.phi[:, i]), (f"pi{i}^2", ens.pi[:, i])):
            sq = arr**2
            moments[label] = (float(np.mean(sq)), float(np.std(sq, ddof=1) / math.sqrt(n)))

    oracle = gaussian_oracle_moments(h, k)
    checks = []
    if oracle is not None:
        for name, target in oracle.items():
            est, se = moments[name]
            tol = args.se_factor * se
            checks.append(_check(f"{name}_matches_oracle", abs(est - target), tol,
                                 abs(est - target) <= tol))
    config = {
        "h": args.h, "pairs": pairs, "k": args.k, "count": args.count,
        "burn_in": args.burn_in, "thin": args.thin, "seed": args.seed,
        "se_factor": args.se_factor,
    }
    results = {
        "moments": {name: {"estimate": est, "standard_error": se}
                    for name, (est, se) in moments.items()},
        "oracle": oracle,
    }
    _dump(args, "samples.txt", snapshot_to_text(ens))
    path = _plot_path(args, "boltzmann.png")
    if path:
        plots.save_boltzmann_plot(ens, energies,
                                  oracle["mean_energy"] if oracle else None, path)
    text = [f"{name}: {est:.6g} +/- {se:.2g}" for name, (est, se) in moments.items()]
    return config, results, checks, text


def cmd_invariance(args):
    pairs = _infer_pairs(args.h, override=args.pairs)
    h = parse_phase_space(args.h, pairs)
    sys_ = OdeSystem.from_hamiltonian(h)
    if args.snapshot:
        ens = snapshot_from_text(Path(args.snapshot).read_text())
    else:
        k = float(_exact_or_float(args.k))
        ens = boltzmann_sample(sys_, k, args.count, args.seed,
                               burn_in=args.burn_in, thin=args.thin)
    report = invariance_test(sys_, ens, args.horizon, dt=args.dt)
    checks = []
    for m in report.moments:
        checks.append(_check(f"drift_{m.name}", abs(m.drift), 3.0 * m.standard_error,
                             not m.significant))
    config = {
        "h": args.h, "pairs": pairs, "k": args.k, "count": args.count,
        "horizon": args.horizon, "dt": args.dt, "snapshot": args.snapshot,
        "burn_in": args.burn_in, "thin": args.thin, "seed": args.seed,
    }
    results = report.as_dict()
    _dump(args, "samples_initial.txt", snapshot_to_text(ens))
    path = _plot_path(args, "invariance.png")
    if path:
        plots.save_invariance_plot(report, path)
    text = [
        f"{m.name}: drift {m.drift:+.4g} (3 SE = {3 * m.standard_error:.4g})"
        f"{'  <-- significant' if m.significant else ''}"
        for m in report.moments
    ] + [report.note]
    return config, results, checks, text


def cmd_dual_check(args):
    mode_names = _infer_mode_names(args.h, override=args.modes)
    params = _parse_params(args.param)
    h = parse_classical(args.h, mode_names, params)
    k_exact = _exact_or_float(args.k)
    k = float(k_exact)
    vals = [float(x) for x in args.state.split(",")]
    if len(vals) != 2 * h.n_modes:
        raise ConfigError(f"--state needs {2 * h.n_modes} numbers (re,im per mode)")
    state = ClassicalState([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    basis = _cutoffs_for(h.n_modes, args.cutoff)
    rho = rho_of_state(state, basis, tail_tol=args.tail_tol)

    hs = evaluate_classical(h, state).real
    exact = math.exp(-k * hs)
    orders = list(range(args.order + 1))
    errors = []
    for order in orders:
        f_op = dual_operator(k_exact, h, order)
        tr = trace_product(build_matrix(f_op, basis), rho).real
        errors.append(abs(tr - exact))
    trace = trace_product(build_matrix(dual_operator(k_exact, h, args.order), basis), rho).real
    x = k * hs
    bound = abs(x) ** (args.order + 1) / math.factorial(args.order + 1) if hs >= 0 else float("inf")
    error = abs(trace - exact)
    checks = [_check("series_agreement", error, bound + args.tol, error <= bound + args.tol)]
    config = {
        "h": args.h, "k": args.k, "order": args.order, "state": args.state,
        "cutoffs": list(basis.cutoffs), "tol": args.tol, "seed": None,
    }
    results = {
        "trace": trace,
        "exact": exact,
        "error": error,
        "remainder_bound": bound,
        "per_order_errors": errors,
        "operator": format_operator_polynomial(dual_operator(k_exact, h, min(args.order, 4))),
    }
    _dump(args, "dual_operator.poly.txt",
          polynomial_to_records(dual_operator(k_exact, h, args.order)))
    path = _plot_path(args, "dual_check.png")
    if path:
        plots.save_dual_plot(orders, errors, bound, path)
    text = [
        f"trace: {trace:.12g}",
        f"exact: {exact:.12g}",
        f"error: {error:.3e} (remainder bound {bound:.3e})",
    ]
    return config, results, checks, text


# ---------------------------------------------------------------------------
# Wiring
# ---------------------------------------------------------------------------

def _add_common(p, default_format):
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["text", "json", "csv"], default=default_format)
    p.add_argument("--dump", metavar="DIR", help="write intermediate artifacts to DIR")
    p.add_argument("--plot-dir", metavar="DIR", help="render diagnostic figures to DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonlab",
        description="Coherent-state ensembles, normal ordering and spectral checks "
        "for finite-mode bosonic systems.",
    )
    parser.add_argument("--version", action="version", version=f"bosonlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normal-order", help="canonicalize a ladder/classical expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--modes", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    _add_common(p, "text")
    p.set_defaults(handler=cmd_normal_order)

    p = sub.add_parser("quantize", help="normal-product vs raw quantization of a classical polynomial")
    p.add_argument("--g", required=True)
    p.add_argument("--modes", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    _add_common(p, "text")
    p.set_defaults(handler=cmd_quantize)

    p = sub.add_parser("spectrum", help="eigenstructure of the quadratic spectral operator")
    p.add_argument("--h", required=True, help="classical Hamiltonian (alJ symbols)")
    p.add_argument("--energy", required=True)
    p.add_argument("--cutoff", type=int, nargs="+", required=True)
    p.add_argument("--ensemble", help="point:..., phase:K:r, levelset:E:n:seed, file:path")
    p.add_argument("--modes", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--zero-tol", type=float, default=None)
    p.add_argument("--residual-tol", type=float, default=1e-7)
    p.add_argument("--tail-tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("trace-check", help="quantum trace vs classical expectation")
    p.add_argument("--g", required=True, help="classical observable (alJ symbols)")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--h", help="classical Hamiltonian for levelset ensembles")
    p.add_argument("--cutoff", type=int, nargs="+")
    p.add_argument("--modes", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--tail-tol", type=float, default=1e-10)
    p.add_argument("--max-degree", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_trace_check)

    p = sub.add_parser("lattice-check", help="lattice mode map, energy consistency and trace theorem")
    p.add_argument("--model", help="model config file")
    p.add_argument("--sites", type=int, default=2)
    p.add_argument("--mass", type=float, nargs="+", default=[1.0])
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--interaction", help="local polynomial in phiJ/piJ")
    p.add_argument("--cutoff", type=int, nargs="+")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--scale", type=float, default=0.3)
    p.add_argument("--energy-tol", type=float, default=1e-10)
    p.add_argument("--trace-tol", type=float, default=1e-6)
    p.add_argument("--tail-tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_lattice_check)

    p = sub.add_parser("incompressibility", help="phase-space divergence of a flow")
    p.add_argument("--h", help="Hamiltonian (phiJ/piJ symbols)")
    p.add_argument("--field", help="semicolon-separated phi-dot then pi-dot components")
    p.add_argument("--pairs", type=int)
    p.add_argument("--samples", type=int, default=16)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--expect", choices=["incompressible", "compressible"])
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_incompressibility)

    p = sub.add_parser("boltzmann", help="Metropolis sampling of exp(-k H)")
    p.add_argument("--h", required=True, help="Hamiltonian (phiJ/piJ symbols)")
    p.add_argument("--pairs", type=int)
    p.add_argument("--k", required=True)
    p.add_argument("--count", type=int, default=20000)
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--se-factor", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_boltzmann)

    p = sub.add_parser("invariance", help="moment drift of an ensemble under the flow")
    p.add_argument("--h", required=True, help="Hamiltonian (phiJ/piJ symbols)")
    p.add_argument("--pairs", type=int)
    p.add_argument("--k", default="1")
    p.add_argument("--count", type=int, default=4000)
    p.add_argument("--horizon", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--snapshot", help="load the ensemble from a snapshot file")
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_invariance)

    p = sub.add_parser("dual-check", help="trace of the exponential dual operator vs exp(-k h)")
    p.add_argument("--h", required=True, help="classical Hamiltonian (alJ symbols)")
    p.add_argument("--k", required=True)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--state", default="0.5,0")
    p.add_argument("--cutoff", type=int, nargs="+", default=[24])
    p.add_argument("--modes", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--tail-tol", type=float, default=1e-6)
    _add_common(p, "json")
    p.set_defaults(handler=cmd_dual_check)

    return parser


def _emit(report: dict, text_lines: list, args) -> None:
    if args.format == "json":
        payload = json.dumps(report, indent=2) + "\n"
    elif args.format == "csv":
        lines = ["name,value,tolerance,passed"]
        for c in report["checks"]:
            lines.append(f"{c['name']},{c['value']},{c['tolerance']},{c['passed']}")
        payload = "\n".join(lines) + "\n"
    else:
        payload = "\n".join(text_lines) + "\n"
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config, results, checks, text_lines = args.handler(args)
    except (ExpressionError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (TruncationError, DimensionLimitError, BlowUpError, ValidationError) as exc:
        print(f"numerical precondition failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except BosonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    elapsed = time.perf_counter() - start
    report = {
        "command": args.command,
        "config": config,
        "checks": checks,
        "results": results,
        "versions": {
            "bosonlab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timing": {"elapsed_seconds": elapsed},
    }
    _emit(report, text_lines, args)
    return 0 if all(c["passed"] for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
