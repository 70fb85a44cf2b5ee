"""Command-line front end: load system files, run checks, emit reports.

Exit codes: 0 when every requested check passes, 1 on a verification
failure, 2 on usage or file errors.  ``--out`` writes the machine-readable
document: a report for verification subcommands, a loadable system file
for producing subcommands (random, parseval, dual, dsum, transform).
Machine output is canonical JSON and contains no timing, so identical
inputs and seeds give byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

import numpy as np

from .atomic import (
    atomic_equiv_check,
    atomic_wrt_frame_operator,
    transform_combined,
    transform_shift,
)
from .direct_sum import canonical_dual, direct_sum_system, parsevalize
from .errors import (
    DegenerateKError,
    GFusionError,
    HypothesisNotMetError,
    ParameterError,
    SystemFileError,
)
from .measure import WeightProfile, validate_nodes
from .operators import Operator, opnorm, symmetrize
from .pair import (
    PairSystem,
    bounded_below_analysis,
    pair_adjoint_and_norm,
    pair_frame_operator,
    perturbation_bound,
    symmetric_perturbation,
)
from .random_systems import (
    random_operator,
    random_pair,
    random_positive_operator,
    random_shared_weight_frames,
    random_system,
)
from .report import SAMPLED, VerificationReport, build_report, dumps_canonical
from .resolution import (
    canonical_resolution,
    energy_lower_check,
    frame_from_resolution,
    verify_resolution,
)
from .systems import (
    adjoint_consistency,
    analysis,
    assemble_frame_operator,
    frame_bounds,
    kgf_check,
    kgf_lower_bound,
    synthesis,
)
from .sysio import (
    SCHEMA_VERSION,
    has_secondary_weights,
    load_document,
    load_operator,
    operators_from_document,
    system_from_document,
    system_to_document,
)

DEFAULT_TOL = 1e-9
TOL_ENV_VAR = "CGFUSION_TOL"

PASS, FAIL, USAGE = 0, 1, 2

_FRAME_LABELS = ("frame", "tight", "parseval")


def _resolve_tol(args) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get(TOL_ENV_VAR)
    if env is not None:
        try:
            return float(env)
        except ValueError:
            raise SystemFileError(f"{TOL_ENV_VAR} is not a float: {env!r}")
    return DEFAULT_TOL


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=None,
                        help=f"tolerance (default {DEFAULT_TOL:g}, or ${TOL_ENV_VAR})")
    parser.add_argument("--trials", type=int, default=100, help="sampling trials")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--out", default=None, help="write the machine-readable output here")
    parser.add_argument("--parallel", action="store_true",
                        help="run independent checks concurrently")


def _named_operator(flag_value, doc_operators, name, required=False) -> Operator | None:
    if flag_value:
        return load_operator(flag_value)
    if name in doc_operators:
        return doc_operators[name]
    if required:
        raise SystemFileError(
            f"operator {name} required: pass --{name} or add operators.{name} to the file"
        )
    return None


def _timed(fn, *args, **kwargs) -> VerificationReport:
    start = time.perf_counter()
    report = fn(*args, **kwargs)
    return dataclasses.replace(report, wall_time_s=time.perf_counter() - start)


def _report_document(command: str, parameters: dict, reports: list[VerificationReport]) -> dict:
    ordered = sorted(reports, key=lambda r: r.name)
    return {
        "version": SCHEMA_VERSION,
        "kind": "report",
        "command": command,
        "parameters": parameters,
        "passed": all(r.passed for r in ordered),
        "reports": [r.to_dict() for r in ordered],
    }


def _print_reports(reports: list[VerificationReport]) -> None:
    for rep in sorted(reports, key=lambda r: r.name):
        status = "PASS" if rep.passed else "FAIL"
        timing = f"  [{rep.wall_time_s * 1e3:.1f} ms]" if rep.wall_time_s is not None else ""
        print(f"[{status}] {rep.name}{timing}")
        for key in sorted(rep.residuals):
            print(f"    {key} = {rep.residuals[key]:.6g} (tol {rep.tolerance_for(key):.6g})")
        for key in sorted(rep.constants):
            print(f"    {key} = {rep.constants[key]:.6g}")
        if rep.provenance != "exact spectral":
            print(f"    provenance: {rep.provenance}")
        for note in rep.notes:
            print(f"    note: {note}")


def _write_out(path: str, document: dict) -> None:
    text = dumps_canonical(document)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


# --- subcommand handlers ------------------------------------------------

def _cmd_check(args):
    tol = _resolve_tol(args)
    system = system_from_document(load_document(args.system), args.system)
    bounds = frame_bounds(system, tol)
    reports = [
        _timed(validate_nodes, system.nodes, WeightProfile(system.weights)),
        build_report(
            name="frame_bounds",
            residuals={},
            tolerances={"tol": tol},
            constants={"lower": bounds.lower, "upper": bounds.upper},
            notes=(f"classification: {bounds.classification}",),
            force_fail=bounds.classification not in _FRAME_LABELS,
        ),
        _timed(adjoint_consistency, system, args.trials, args.seed),
    ]
    params = {"tol": tol, "trials": args.trials, "seed": args.seed, "system": args.system}
    return reports, _report_document("check", params, reports)


def _cmd_kgf(args):
    tol = _resolve_tol(args)
    doc = load_document(args.system)
    system = system_from_document(doc, args.system)
    k = _named_operator(args.K, operators_from_document(doc, args.system), "K", required=True)
    reports = []
    if args.A is not None:
        cert = kgf_check(system, k, args.A, tol)
        reports.append(build_report(
            name="kgf_check",
            residuals={"order_defect": max(0.0, -(cert.gap + tol))},
            tolerances={"order_defect": 0.0},
            constants={"gap": cert.gap, "lower": args.A},
        ))
    else:
        try:
            a_star = kgf_lower_bound(system, k, tol)
        except DegenerateKError as err:
            reports.append(build_report(
                name="kgf_lower_bound",
                residuals={},
                tolerances={"tol": tol},
                notes=(str(err),),
                force_fail=True,
            ))
        else:
            cert = kgf_check(system, k, a_star, tol)
            reports.append(build_report(
                name="kgf_lower_bound",
                residuals={"order_defect": max(0.0, -(cert.gap + 10 * tol))},
                tolerances={"order_defect": 0.0},
                constants={"a_star": a_star, "gap": cert.gap},
            ))
    params = {"tol": tol, "system": args.system, "K": args.K or "operators.K"}
    if args.A is not None:
        params["A"] = args.A
    return reports, _report_document("kgf", params, reports)


def _cmd_resolve(args):
    tol = _resolve_tol(args)
    system = system_from_document(load_document(args.system), args.system)
    rng = np.random.default_rng(args.seed)
    reports = []
    bounds = frame_bounds(system, tol)
    if bounds.lower <= tol:
        reports.append(build_report(
            name="canonical_resolution",
            residuals={},
            tolerances={"tol": tol},
            notes=("not a frame; the canonical resolution is undefined",),
            force_fail=True,
        ))
    else:
        family = canonical_resolution(system, tol)
        identity_tol = max(tol, 1e-8)
        inner = verify_resolution(family, identity_tol)
        lower_violation = 0.0
        upper_violation = 0.0
        for _ in range(max(args.trials, 1)):
            f = rng.standard_normal(system.ambient_dim)
            norm_sq = float(f @ f)
            if norm_sq == 0.0:
                continue
            energy = sum(
                float(mass) * float(w) ** 2 * float(np.sum((t.entries @ f) ** 2))
                for mass, w, t in zip(system.nodes.mu, system.weights, family.factors)
            )
            ratio = energy / norm_sq
            lower_violation = max(lower_violation, bounds.lower / bounds.upper**2 - ratio)
            upper_violation = max(upper_violation, ratio - bounds.upper / bounds.lower**2)
        reports.append(build_report(
            name="canonical_resolution",
            residuals={
                "identity_residual": inner.residuals["identity_residual"],
                "energy_lower_violation": max(0.0, lower_violation),
                "energy_upper_violation": max(0.0, upper_violation),
            },
            tolerances={"tol": identity_tol},
            constants={"lower": bounds.lower, "upper": bounds.upper},
            provenance=SAMPLED,
        ))
    worst = 0.0
    families = max(1, args.trials // 10)
    for _ in range(families):
        factors = [
            rng.standard_normal((m, system.ambient_dim))
            for m in system.codomain_dims
        ]
        for _ in range(10):
            f = rng.standard_normal(system.ambient_dim)
            rep = energy_lower_check(system, factors, f, tol)
            worst = max(worst, rep.residuals["lower_energy_violation"])
    reports.append(build_report(
        name="energy_lower_random_families",
        residuals={"lower_energy_violation": worst},
        tolerances={"tol": max(tol, 1e-9)},
        constants={"families": float(families)},
        provenance=SAMPLED,
    ))
    unweighted = np.zeros((system.ambient_dim, system.ambient_dim))
    for mass, lam in zip(system.nodes.mu, system.effective_maps):
        unweighted += float(mass) * (lam.T @ lam)
    top = float(np.linalg.eigvalsh(symmetrize(unweighted))[-1])
    if top <= 0:
        reports.append(build_report(
            name="frame_from_resolution",
            residuals={}, tolerances={"tol": tol},
            notes=("skipped: zero energy operator",),
        ))
    else:
        try:
            certified = frame_from_resolution(system, 1.0 / top, tol)
        except HypothesisNotMetError as err:
            reports.append(build_report(
                name="frame_from_resolution",
                residuals={}, tolerances={"tol": tol},
                notes=(f"hypotheses not met ({err.condition}); skipped",),
            ))
        else:
            reports.append(build_report(
                name="frame_from_resolution",
                residuals={}, tolerances={"tol": tol},
                constants={"certified_lower": certified.lower,
                           "certified_upper": certified.upper},
                notes=(f"classification: {certified.classification}",),
            ))
    params = {"tol": tol, "trials": args.trials, "seed": args.seed, "system": args.system}
    return reports, _report_document("resolve", params, reports)


def _cmd_atomic(args):
    tol = _resolve_tol(args)
    doc = load_document(args.system)
    system = system_from_document(doc, args.system)
    k = _named_operator(args.K, operators_from_document(doc, args.system), "K")
    if k is None:
        reports = [_timed(atomic_wrt_frame_operator, system, tol)]
    else:
        reports = [_timed(atomic_equiv_check, system, k, tol)]
    params = {"tol": tol, "system": args.system, "K": args.K or "frame-operator"}
    return reports, _report_document("atomic", params, reports)


def _cmd_transform(args):
    tol = _resolve_tol(args)
    doc = load_document(args.system)
    system = system_from_document(doc, args.system)
    doc_ops = operators_from_document(doc, args.system)
    l_op = _named_operator(args.L, doc_ops, "L", required=True)
    if args.xi:
        xi = system_from_document(load_document(args.xi), args.xi)
        g_op = _named_operator(args.G, doc_ops, "G", required=True)
        k_op = _named_operator(args.K, doc_ops, "K") or Operator.identity(system.ambient_dim)
        combined = transform_combined(system, xi, l_op, g_op, k_op, tol)
        m = l_op.entries + g_op.entries
        sigma_min = float(np.linalg.svd(m, compute_uv=False)[-1])
        try:
            a_chi = kgf_lower_bound(system, k_op, tol)
            a_new = kgf_lower_bound(combined, k_op, tol)
        except DegenerateKError as err:
            raise SystemFileError(f"transform: {err}")
        reports = [build_report(
            name="combined_transform_bound",
            residuals={"bound_defect": max(0.0, a_chi * sigma_min**2 - a_new)},
            tolerances={"tol": tol},
            constants={"a_chi": a_chi, "a_new": a_new, "sigma_min": sigma_min},
        )]
        produced = combined
    else:
        produced, rep = transform_shift(system, l_op, tol)
        reports = [rep]
    return reports, system_to_document(produced)


def _pair_from_args(args) -> PairSystem:
    doc = load_document(args.system)
    chi = system_from_document(doc, args.system)
    if args.xi:
        xi = system_from_document(load_document(args.xi), args.xi)
    elif has_secondary_weights(doc):
        xi = system_from_document(doc, args.system, use_secondary=True)
    else:
        raise SystemFileError(
            "pair needs --xi FILE or per-node secondary weights 's' in the system file"
        )
    return PairSystem(chi, xi)


def _cmd_pair(args):
    tol = _resolve_tol(args)
    pair = _pair_from_args(args)
    reports = [
        _timed(pair_adjoint_and_norm, pair, tol),
        _timed(bounded_below_analysis, pair, tol),
    ]
    mixed = pair_frame_operator(pair).entries
    deviation = opnorm(np.eye(pair.ambient_dim) - mixed)
    lam1 = args.lambda1 if args.lambda1 is not None else deviation
    lam2 = args.lambda2 if args.lambda2 is not None else 0.0
    if lam1 < 1.0 and lam2 > -1.0:
        reports.append(_timed(perturbation_bound, pair, lam1, lam2,
                              args.trials, args.seed, tol))
    else:
        reports.append(build_report(
            name="perturbation_bound", residuals={}, tolerances={"tol": tol},
            notes=(f"skipped: deviation {deviation:.3g} leaves no admissible lambda1 < 1",),
        ))
    lam = args.lam if args.lam is not None else deviation
    if 0.0 <= lam < 1.0:
        reports.append(_timed(symmetric_perturbation, pair, lam,
                              args.trials, args.seed, tol))
    else:
        reports.append(build_report(
            name="symmetric_perturbation", residuals={}, tolerances={"tol": tol},
            notes=(f"skipped: ||I - S|| = {deviation:.3g} is not below 1",),
        ))
    params = {
        "tol": tol, "trials": args.trials, "seed": args.seed,
        "system": args.system, "xi": args.xi or "secondary-weights",
    }
    return reports, _report_document("pair", params, reports)


def _cmd_dsum(args):
    tol = _resolve_tol(args)
    chi = system_from_document(load_document(args.system), args.system)
    xi = system_from_document(load_document(args.xi), args.xi)
    ds = direct_sum_system(chi, xi)
    s_combined = assemble_frame_operator(ds.system).entries
    s_chi = assemble_frame_operator(chi).entries
    s_xi = assemble_frame_operator(xi).entries
    block = np.zeros_like(s_combined)
    block[: chi.ambient_dim, : chi.ambient_dim] = s_chi
    block[chi.ambient_dim :, chi.ambient_dim :] = s_xi
    b_chi = frame_bounds(chi, tol)
    b_xi = frame_bounds(xi, tol)
    b_sum = frame_bounds(ds.system, tol)
    reports = [build_report(
        name="direct_sum_laws",
        residuals={
            "blockdiag_residual": opnorm(s_combined - block),
            "lower_bound_mismatch": abs(b_sum.lower - min(b_chi.lower, b_xi.lower)),
            "upper_bound_mismatch": abs(b_sum.upper - max(b_chi.upper, b_xi.upper)),
        },
        tolerances={"tol": tol},
        constants={"lower": b_sum.lower, "upper": b_sum.upper},
    )]
    return reports, system_to_document(ds.system)


def _cmd_parseval(args):
    tol = _resolve_tol(args)
    system = system_from_document(load_document(args.system), args.system)
    flat = parsevalize(system, tol)
    residual = opnorm(assemble_frame_operator(flat).entries - np.eye(flat.ambient_dim))
    reports = [build_report(
        name="parseval_identity",
        residuals={"identity_residual": residual},
        tolerances={"tol": max(tol, 1e-8)},
    )]
    return reports, system_to_document(flat)


def _cmd_dual(args):
    tol = _resolve_tol(args)
    system = system_from_document(load_document(args.system), args.system)
    dual, report = canonical_dual(system, tol)
    return [report], system_to_document(dual)


def _cmd_random(args):
    system = random_system(np.random.default_rng(args.seed), args.dim, args.nodes)
    reports = [validate_nodes(system.nodes, WeightProfile(system.weights))]
    return reports, system_to_document(system)


def _cmd_selftest(args):
    tol = _resolve_tol(args)
    reports = run_selftest(seed=args.seed, trials=args.trials, tol=tol,
                           parallel=args.parallel)
    params = {"tol": tol, "trials": args.trials, "seed": args.seed}
    return reports, _report_document("selftest", params, reports)


# --- selftest campaign --------------------------------------------------

def _selftest_corpus(seed: int, trials: int):
    rng = np.random.default_rng(seed)
    dims = [int(rng.integers(2, 9)) for _ in range(20)]
    systems = [random_system(rng, d, int(rng.integers(1, 6))) for d in dims]
    frames = [random_system(rng, int(rng.integers(2, 7)), int(rng.integers(2, 6)),
                            ensure_frame=True) for _ in range(10)]
    pairs = [random_pair(rng, int(rng.integers(2, 6)), int(rng.integers(2, 5)),
                         ensure_frames=True) for _ in range(12)]
    sum_parts = [random_shared_weight_frames(rng, int(rng.integers(2, 5)),
                                             int(rng.integers(2, 5)),
                                             int(rng.integers(2, 5))) for _ in range(8)]
    shifts = [(frames[i % len(frames)],
               random_positive_operator(rng, frames[i % len(frames)].ambient_dim))
              for i in range(10)]
    atomic_rand = [(frames[i % len(frames)],
                    random_operator(rng, frames[i % len(frames)].ambient_dim,
                                    frames[i % len(frames)].ambient_dim))
                   for i in range(10)]
    sample_count = max(5, trials // 10)
    vectors = {id(s): [rng.standard_normal(s.ambient_dim) for _ in range(sample_count)]
               for s in systems + frames}
    return systems, frames, pairs, sum_parts, shifts, atomic_rand, vectors


def _check_composition(systems, vectors, tol):
    worst_comp = 0.0
    worst_sym = 0.0
    for system in systems:
        s = assemble_frame_operator(system).entries
        worst_sym = max(worst_sym, float(np.abs(s - s.T).max()))
        for f in vectors[id(system)]:
            composed = synthesis(system, analysis(system, f))
            scale = max(1.0, float(np.linalg.norm(f)))
            worst_comp = max(worst_comp, float(np.linalg.norm(s @ f - composed)) / scale)
    return build_report(
        name="selftest_frame_operator_composition",
        residuals={"composition_residual": worst_comp, "symmetry_residual": worst_sym},
        tolerances={"tol": tol},
        constants={"systems": float(len(systems))},
        provenance=SAMPLED,
    )


def _check_bounds(systems, vectors, tol):
    worst_attain = 0.0
    worst_range = 0.0
    for system in systems:
        s = assemble_frame_operator(system).entries
        bounds = frame_bounds(system)
        values, basis = np.linalg.eigh(s)
        for picked, target in ((basis[:, 0], bounds.lower), (basis[:, -1], bounds.upper)):
            rayleigh = float(picked @ (s @ picked))
            worst_attain = max(worst_attain, abs(rayleigh - target))
        for f in vectors[id(system)]:
            norm_sq = float(f @ f)
            if norm_sq == 0.0:
                continue
            rayleigh = float(f @ (s @ f)) / norm_sq
            worst_range = max(worst_range, bounds.lower - rayleigh, rayleigh - bounds.upper)
    return build_report(
        name="selftest_bound_attainment",
        residuals={"attainment_residual": worst_attain,
                   "rayleigh_range_violation": max(0.0, worst_range)},
        tolerances={"tol": tol},
        provenance=SAMPLED,
    )


def _check_scaling(systems, tol):
    worst = 0.0
    factor = 1.7
    for system in systems:
        scaled = system.with_weights(system.weights * factor)
        s = assemble_frame_operator(system).entries
        s_scaled = assemble_frame_operator(scaled).entries
        scale = max(1.0, opnorm(s))
        worst = max(worst, opnorm(s_scaled - factor**2 * s) / scale)
    return build_report(
        name="selftest_weight_scaling",
        residuals={"scaling_residual": worst},
        tolerances={"tol": tol},
    )


def _check_canonical(frames, vectors, tol):
    worst_identity = 0.0
    worst_energy = 0.0
    for system in frames:
        family = canonical_resolution(system)
        report = verify_resolution(family, 1e-8)
        worst_identity = max(worst_identity, report.residuals["identity_residual"])
        bounds = frame_bounds(system)
        for f in vectors[id(system)]:
            norm_sq = float(f @ f)
            if norm_sq == 0.0:
                continue
            energy = sum(
                float(mass) * float(w) ** 2 * float(np.sum((t.entries @ f) ** 2))
                for mass, w, t in zip(system.nodes.mu, system.weights, family.factors)
            )
            ratio = energy / norm_sq
            worst_energy = max(worst_energy,
                               bounds.lower / bounds.upper**2 - ratio,
                               ratio - bounds.upper / bounds.lower**2)
    return build_report(
        name="selftest_canonical_resolution",
        residuals={"identity_residual": worst_identity,
                   "energy_bound_violation": max(0.0, worst_energy)},
        tolerances={"tol": max(tol, 1e-8)},
        provenance=SAMPLED,
    )


def _check_energy_lower(frames, vectors, seed, tol):
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for system in frames:
        factors = [rng.standard_normal((m, system.ambient_dim))
                   for m in system.codomain_dims]
        for f in vectors[id(system)]:
            rep = energy_lower_check(system, factors, f, tol)
            worst = max(worst, rep.residuals["lower_energy_violation"])
    return build_report(
        name="selftest_energy_lower",
        residuals={"lower_energy_violation": worst},
        tolerances={"tol": tol},
        provenance=SAMPLED,
    )


def _check_atomic(frames, atomic_rand, tol):
    worst_recon = 0.0
    worst_link = 0.0
    mismatches = 0.0
    for system, r_op in atomic_rand:
        s = assemble_frame_operator(system)
        k = Operator(s.entries @ r_op.entries)
        rep = atomic_equiv_check(system, k, tol)
        mismatches += rep.residuals["equivalence_mismatch"]
        worst_link = max(worst_link, rep.residuals.get("quantitative_link_violation", 0.0))
        worst_recon = max(worst_recon, rep.constants["worst_reconstruction"])
    return build_report(
        name="selftest_atomic_equivalence",
        residuals={"equivalence_mismatch": mismatches,
                   "quantitative_link_violation": worst_link,
                   "worst_reconstruction": worst_recon},
        tolerances={"tol": max(tol, 1e-7), "equivalence_mismatch": 0.0},
        provenance=SAMPLED,
    )


def _check_shift(shifts, tol):
    worst = 0.0
    for system, l_op in shifts:
        _, rep = transform_shift(system, l_op, max(tol, 1e-8))
        worst = max(worst, rep.residuals["conjugation_residual"])
    return build_report(
        name="selftest_shift_transform",
        residuals={"conjugation_residual": worst},
        tolerances={"tol": max(tol, 1e-8)},
    )


def _check_pairs(pairs, tol):
    worst_adjoint = 0.0
    worst_norm = 0.0
    worst_roundtrip = 0.0
    for pair in pairs:
        rep = pair_adjoint_and_norm(pair, tol)
        worst_adjoint = max(worst_adjoint, rep.residuals["adjoint_mismatch"])
        worst_norm = max(worst_norm, rep.residuals["norm_excess"])
        analysis_rep = bounded_below_analysis(pair, 1e-6)
        if "identity_residual" in analysis_rep.residuals:
            worst_roundtrip = max(worst_roundtrip,
                                  analysis_rep.residuals["identity_residual"],
                                  analysis_rep.residuals["inverse_identity"],
                                  analysis_rep.residuals["lower_bound_excess"])
    return build_report(
        name="selftest_pair_laws",
        residuals={"adjoint_mismatch": worst_adjoint,
                   "norm_excess": worst_norm,
                   "roundtrip_residual": worst_roundtrip},
        tolerances={"tol": max(tol, 1e-8)},
    )


def _check_direct_sums(sum_parts, tol):
    worst_block = 0.0
    worst_bounds = 0.0
    worst_parseval = 0.0
    worst_dual = 0.0
    for chi, xi in sum_parts:
        ds = direct_sum_system(chi, xi)
        s = assemble_frame_operator(ds.system).entries
        block = np.zeros_like(s)
        block[: chi.ambient_dim, : chi.ambient_dim] = assemble_frame_operator(chi).entries
        block[chi.ambient_dim :, chi.ambient_dim :] = assemble_frame_operator(xi).entries
        worst_block = max(worst_block, opnorm(s - block))
        b_chi, b_xi, b_sum = frame_bounds(chi), frame_bounds(xi), frame_bounds(ds.system)
        worst_bounds = max(worst_bounds,
                           abs(b_sum.lower - min(b_chi.lower, b_xi.lower)),
                           abs(b_sum.upper - max(b_chi.upper, b_xi.upper)))
        flat = parsevalize(ds.system)
        worst_parseval = max(worst_parseval, opnorm(
            assemble_frame_operator(flat).entries - np.eye(flat.ambient_dim)))
        _, dual_rep = canonical_dual(ds.system)
        worst_dual = max(worst_dual, dual_rep.residuals["dual_operator_residual"])
    return build_report(
        name="selftest_direct_sum_parseval_dual",
        residuals={"blockdiag_residual": worst_block,
                   "bound_mismatch": worst_bounds,
                   "parseval_residual": worst_parseval,
                   "dual_residual": worst_dual},
        tolerances={"tol": max(tol, 1e-8)},
    )


def run_selftest(seed: int = 0, trials: int = 100, tol: float = DEFAULT_TOL,
                 parallel: bool = False) -> list[VerificationReport]:
    """Seeded property campaign across every subsystem.

    All randomness is drawn up front from one generator, so the reports
    are identical for identical seeds regardless of ``parallel``.
    """
    systems, frames, pairs, sum_parts, shifts, atomic_rand, vectors = \
        _selftest_corpus(seed, trials)
    checks = [
        lambda: _check_composition(systems + frames, vectors, tol),
        lambda: _check_bounds(systems + frames, vectors, tol),
        lambda: _check_scaling(systems, tol),
        lambda: _check_canonical(frames, vectors, tol),
        lambda: _check_energy_lower(frames, vectors, seed, tol),
        lambda: _check_atomic(frames, atomic_rand, tol),
        lambda: _check_shift(shifts, tol),
        lambda: _check_pairs(pairs, tol),
        lambda: _check_direct_sums(sum_parts, tol),
    ]
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=4) as pool:
            reports = list(pool.map(lambda fn: fn(), checks))
    else:
        reports = [fn() for fn in checks]
    return reports


# --- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgfusion",
        description="Verify and transform weighted-subspace measurement systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="frame bounds and classification")
    p.add_argument("system")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("kgf", help="lower-bound certificate against an operator")
    p.add_argument("system")
    p.add_argument("--K", default=None, help="operator file (default: operators.K)")
    p.add_argument("--A", type=float, default=None, help="lower bound to certify")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_kgf)

    p = sub.add_parser("resolve", help="resolution-of-identity suite")
    p.add_argument("system")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_resolve)

    p = sub.add_parser("atomic", help="atomic decomposition checks")
    p.add_argument("system")
    p.add_argument("--K", default=None, help="operator file (default: frame operator)")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_atomic)

    p = sub.add_parser("transform", help="shift or combined system transform")
    p.add_argument("system")
    p.add_argument("--L", default=None, help="operator file (default: operators.L)")
    p.add_argument("--G", default=None, help="operator file (combined transform)")
    p.add_argument("--K", default=None, help="operator file (combined transform)")
    p.add_argument("--xi", default=None, help="second system file (combined transform)")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser("pair", help="mixed-operator laws and perturbation bounds")
    p.add_argument("system")
    p.add_argument("--xi", default=None, help="second system file")
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--lam", type=float, default=None)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_pair)

    p = sub.add_parser("dsum", help="direct sum of two systems")
    p.add_argument("system")
    p.add_argument("--xi", required=True, help="second system file")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_dsum)

    p = sub.add_parser("parseval", help="canonical Parseval version")
    p.add_argument("system")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_parseval)

    p = sub.add_parser("dual", help="canonical dual system")
    p.add_argument("system")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_dual)

    p = sub.add_parser("random", help="generate a seeded random system")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--nodes", type=int, default=3)
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_random)

    p = sub.add_parser("selftest", help="full seeded property campaign")
    _add_common_flags(p)
    p.set_defaults(handler=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        reports, document = args.handler(args)
    except SystemFileError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE
    except ParameterError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE
    except GFusionError as err:
        print(f"verification failed: {err}", file=sys.stderr)
        return FAIL
    _print_reports(reports)
    if args.out and document is not None:
        _write_out(args.out, document)
        print(f"wrote {args.out}")
    return PASS if all(r.passed for r in reports) else FAIL


if __name__ == "__main__":
    sys.exit(main())
