"""Batch command-line entry point.

Subcommands: fci, cas-fci, select-cas, tcc, verify. A Hamiltonian comes
either from an FCIDUMP file (--fcidump) or a built-in model
(--model KIND:ARGS, e.g. hubbard:2,1.0,4.0 or pairing:4,0.5,1.0). The
CAS boundary comes from --k or from entropy-based selection. Outputs
are deterministic JSON/TSV documents stamped with the tool version and
a configuration hash.

Exit codes: 1 input error, 2 solver failure, 3 size limit exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import serialize
from .determinants import BasisSplit, OrbitalBasis, SPACE_CAS
from .diagnostics import (
    assumption_b_report,
    error_decomposition,
    error_representation_check,
    gap_report,
    linear_limit_scaling_study,
    quadratic_scaling_study,
    solve_dual,
)
from .entropy import MODE_JUMP, MODE_THRESHOLD, mutual_information, select_cas
from .errors import (
    GapViolationError,
    InputError,
    SingularJacobianError,
    SizeLimitError,
    SolverFailureError,
    TccBenchError,
)
from .exact import cas_fci_solve, ci_to_cluster, fci_solve
from .hamiltonian import (
    canonicalize_core,
    fock_matrix,
    hubbard_model,
    pairing_model,
    parse_fcidump,
)
from .tcc import MODE_FOI, MODE_FULL, MODE_RANK, TccConfig, TruncationScheme, solve_tcc

EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_LIMIT = 3


def _load_integrals(args):
    if bool(args.fcidump) == bool(args.model):
        raise InputError("exactly one of --fcidump and --model is required")
    if args.fcidump:
        path = Path(args.fcidump)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        ints = parse_fcidump(path.read_text())
    else:
        kind, _, argstr = args.model.partition(":")
        parts = [p for p in argstr.split(",") if p] if argstr else []
        try:
            if kind.lower() == "hubbard":
                l, t, u = int(parts[0]), float(parts[1]), float(parts[2])
                nelec = int(parts[3]) if len(parts) > 3 else None
                ints = hubbard_model(l, t, u, nelec)
            elif kind.lower() == "pairing":
                l, g = int(parts[0]), float(parts[1])
                sp = float(parts[2]) if len(parts) > 2 else 1.0
                nelec = int(parts[3]) if len(parts) > 3 else None
                ints = pairing_model(l, g, sp, nelec)
            else:
                raise InputError(f"unknown model kind {kind!r}")
        except (IndexError, ValueError) as exc:
            raise InputError(f"bad model spec {args.model!r}: {exc}") from exc
    if getattr(args, "mo", False):
        ints, _ = canonicalize_core(ints)
    basis = OrbitalBasis(ints.n_spin_orbitals, ints.n_electrons)
    return ints, basis


def _parse_trunc(spec: str) -> TruncationScheme:
    if spec == "full":
        return TruncationScheme(MODE_FULL)
    if spec == "sd":
        return TruncationScheme(MODE_RANK, 2)
    mode, _, n = spec.partition(":")
    if mode in (MODE_RANK, MODE_FOI) and n.isdigit():
        return TruncationScheme(mode, int(n))
    raise InputError(f"bad truncation spec {spec!r} (want sd|rank:N|foi:N|full)")


def _emit(args, name: str, payload, config: dict, tsv=None):
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / f"{name}.json", "w") as fh:
            serialize.dump_document(payload, config, fh)
        if tsv is not None:
            tsv_name, writer, obj = tsv
            with open(outdir / tsv_name, "w") as fh:
                writer(obj, fh)
    else:
        serialize.dump_document(payload, config, sys.stdout)


def _config_dict(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_fci(args) -> int:
    ints, basis = _load_integrals(args)
    summary, states = fci_solve(ints, basis, n_states=args.n_states)
    payload = {"summary": summary, "states": states}
    _emit(args, "fci", payload, _config_dict(args, ["fcidump", "model", "mo", "seed", "n_states"]))
    return 0


def cmd_cas_fci(args) -> int:
    ints, basis = _load_integrals(args)
    if args.k is None:
        raise InputError("cas-fci requires --k")
    split = BasisSplit(basis, args.k)
    summary, states = cas_fci_solve(ints, basis, split, n_states=args.n_states)
    payload = {"summary": summary, "states": states, "k": args.k}
    _emit(args, "cas_fci", payload, _config_dict(args, ["fcidump", "model", "mo", "k", "seed", "n_states"]))
    return 0


def cmd_select_cas(args) -> int:
    ints, basis = _load_integrals(args)
    _, states = fci_solve(ints, basis)
    psi = states[0]
    profile = mutual_information(psi, source="fci-ground-state")
    mode = MODE_JUMP if args.jump else MODE_THRESHOLD
    selection = select_cas(profile, basis.n_electrons,
                           s_threshold=args.s_threshold,
                           mi_threshold=args.mi_threshold, mode=mode)
    payload = {
        "selection": selection,
        "profile": {"s1": profile.s1, "mi": profile.mi},
    }
    config = _config_dict(args, ["fcidump", "model", "mo", "s_threshold",
                                 "mi_threshold", "jump", "seed"])
    _emit(args, "select_cas", payload, config,
          tsv=("profile.tsv", serialize.write_profile_tsv, profile))
    return 0


def _cas_amplitudes(ints, basis, split):
    _, states = cas_fci_solve(ints, basis, split)
    t = ci_to_cluster(states[0])
    from .determinants import AmplitudeVector
    return AmplitudeVector(SPACE_CAS, dict(t.entries))


def cmd_tcc(args) -> int:
    ints, basis = _load_integrals(args)
    if args.k is None:
        raise InputError("tcc requires --k")
    split = BasisSplit(basis, args.k)
    fock = fock_matrix(ints, basis)
    t_cas = _cas_amplitudes(ints, basis, split)
    config = TccConfig(max_iterations=args.max_iterations, tolerance=args.tol,
                       damping=args.damping, diis=args.diis,
                       truncation=_parse_trunc(args.trunc))
    result = solve_tcc(t_cas, ints, split, fock, config)
    if not result.converged:
        raise SolverFailureError(
            f"not converged in {result.iterations} iterations "
            f"(final residual {result.history[-1][1]:.3e}"
            f"{', diverged' if result.diverged else ''})"
        )
    payload = {
        "energy": result.energy,
        "converged": result.converged,
        "iterations": result.iterations,
        "t": result.t,
        "k": args.k,
    }
    cfg = _config_dict(args, ["fcidump", "model", "mo", "k", "trunc", "damping",
                              "diis", "tol", "seed", "max_iterations"])
    _emit(args, "tcc", payload, cfg,
          tsv=("history.tsv", serialize.write_history_tsv, result.history))
    return 0


def cmd_verify(args) -> int:
    ints, basis = _load_integrals(args)
    if args.k is None:
        raise InputError("verify requires --k")
    split = BasisSplit(basis, args.k)
    fock = fock_matrix(ints, basis)
    scheme = _parse_trunc(args.trunc)
    run_all = not (args.assumptions or args.error_scaling or args.decomposition)
    payload: dict = {"gap": gap_report(fock, split)}
    cfg = _config_dict(args, ["fcidump", "model", "mo", "k", "trunc", "seed",
                              "delta", "samples", "tol", "damping", "diis"])

    t_cas = _cas_amplitudes(ints, basis, split)
    full = TruncationScheme(MODE_FULL)
    solver_cfg = TccConfig(max_iterations=args.max_iterations, tolerance=args.tol,
                           damping=args.damping, diis=args.diis, truncation=full)
    star = solve_tcc(t_cas, ints, split, fock, solver_cfg)
    if not star.converged:
        raise SolverFailureError("reference solve on the full external space failed")

    if run_all or args.assumptions:
        payload["assumptions"] = assumption_b_report(
            star.t, t_cas, ints, split, fock,
            delta=args.delta, samples=args.samples, seed=args.seed)
    if run_all or args.decomposition:
        payload["decomposition"] = error_decomposition(
            ints, split, fock, scheme, seed=args.seed)
        z_star = solve_dual(star.t, t_cas, ints, split, full)
        d = solve_tcc(t_cas, ints, split, fock,
                      TccConfig(max_iterations=args.max_iterations,
                                tolerance=args.tol, damping=args.damping,
                                diis=args.diis, truncation=scheme))
        if not d.converged:
            raise SolverFailureError("truncated solve failed")
        z_d = solve_dual(d.t, t_cas, ints, split, scheme)
        payload["representation"] = error_representation_check(
            d.t, z_d, star.t, z_star, t_cas, ints, split, fock)
    study = None
    if run_all or args.error_scaling:
        max_rank = min(basis.n_electrons, basis.n_orbitals - basis.n_electrons)
        family = [TruncationScheme(MODE_RANK, r) for r in range(1, max_rank)]
        family.append(full)
        study = quadratic_scaling_study(ints, split, fock, t_cas, family)
        payload["scaling"] = study
        payload["linear_limit_scaling"] = linear_limit_scaling_study(
            fock, split, seed=args.seed)
    _emit(args, "verify", payload, cfg,
          tsv=("scaling.tsv", serialize.write_scaling_tsv, study) if study else None)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _read_config_file(path: str) -> dict:
    """KEY=VALUE lines; '#' comments. Flags given on the command line win."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"bad config line: {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tccbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--fcidump", help="integral file path")
        p.add_argument("--model", help="built-in model KIND:ARGS")
        p.add_argument("--mo", action="store_true",
                       help="rotate to the core-Hamiltonian eigenbasis first")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output directory (default: JSON to stdout)")
        p.add_argument("--config", help="key=value configuration file (flags win)")

    p = sub.add_parser("fci", help="exact diagonalization on the full space")
    common(p)
    p.add_argument("--n-states", type=int, default=1)
    p.set_defaults(func=cmd_fci)

    p = sub.add_parser("cas-fci", help="exact diagonalization restricted to the CAS")
    common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--n-states", type=int, default=1)
    p.set_defaults(func=cmd_cas_fci)

    p = sub.add_parser("select-cas", help="entropy-based active-space proposal")
    common(p)
    p.add_argument("--s-threshold", type=float, default=0.0)
    p.add_argument("--mi-threshold", type=float, default=0.0)
    p.add_argument("--jump", action="store_true")
    p.set_defaults(func=cmd_select_cas)

    def solver_flags(p):
        p.add_argument("--k", type=int)
        p.add_argument("--trunc", default="full", help="sd|rank:N|foi:N|full")
        p.add_argument("--damping", type=float, default=1.0)
        p.add_argument("--diis", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iterations", type=int, default=500)

    p = sub.add_parser("tcc", help="solve the tailored amplitude equations")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_tcc)

    p = sub.add_parser("verify", help="diagnostic reports")
    common(p)
    solver_flags(p)
    p.add_argument("--assumptions", action="store_true")
    p.add_argument("--error-scaling", action="store_true")
    p.add_argument("--decomposition", action="store_true")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(func=cmd_verify)
    return parser


_CONFIG_TYPES = {
    "k": int, "diis": int, "max_iterations": int, "samples": int,
    "seed": int, "n_states": int,
    "tol": float, "damping": float, "delta": float,
    "s_threshold": float, "mi_threshold": float,
    "mo": bool, "jump": bool, "assumptions": bool, "error_scaling": bool,
    "decomposition": bool,
}


def _apply_config_file(args, parser) -> None:
    if not getattr(args, "config", None):
        return
    defaults = _read_config_file(args.config)
    # only fill values the user did not set explicitly
    sentinel = parser.parse_args([args.command])
    for key, val in defaults.items():
        if not hasattr(args, key):
            raise InputError(f"unknown config key {key!r}")
        current = getattr(args, key)
        default = getattr(sentinel, key, None)
        if current == default:
            anno = _CONFIG_TYPES.get(key, str)
            if anno is bool:
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            else:
                try:
                    setattr(args, key, anno(val))
                except ValueError as exc:
                    raise InputError(f"bad config value {key}={val!r}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        try:
            _apply_config_file(args, parser)
        except SystemExit:  # sentinel parse of bare subcommand may exit
            pass
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverFailureError, GapViolationError, SingularJacobianError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SizeLimitError as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except TccBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
