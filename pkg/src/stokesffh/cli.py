"""Command-line front end.

Exit status is 0 on success, 1 on a numerical failure and 2 on a usage
error. Any option may also be given in a config file of ``key = value``
lines (keys are option names with dashes or underscores); options on the
command line take precedence.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import babenko_spectrum as bs
from . import spectral as sp
from . import stability as sb
from . import stokes as st
from .krylov import KrylovConvergenceError

log = logging.getLogger("stokesffh")


class NumericalFailure(RuntimeError):
    pass


# -- argument parsing ---------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _read_config(path: str) -> dict:
    cfg = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        cfg[key.strip().replace("-", "_")] = val.strip()
    return cfg


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file layered under the flags")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokesffh",
                                     description="Stokes waves, their Babenko spectrum and stability.")
    sub = parser.add_subparsers(dest="command", required=True)

    pw = sub.add_parser("wave", help="compute a Stokes wave by continuation")
    pw.add_argument("--steepness", type=float, required=False)
    pw.add_argument("--modes", type=int, default=512)
    pw.add_argument("--L", type=float, default=1.0, dest="L")
    pw.add_argument("--g", type=float, default=1.0)
    pw.add_argument("--seed", help="start continuation from this wave file")
    pw.add_argument("--ds", type=float, default=0.01)
    pw.add_argument("--tol", type=float, default=1e-11)
    pw.add_argument("--adapt", action="store_true", help="double N while the spectrum is unresolved")
    pw.add_argument("--out", default="wave.txt")
    pw.add_argument("--summary", help="branch table (s, c, kinetic, potential)")
    _common(pw)

    pb = sub.add_parser("babenko", help="eigenvalues of the linearised Babenko operator")
    pb.add_argument("wave", help="wave file")
    pb.add_argument("--shifts", type=_float_list, default=[0.0])
    pb.add_argument("--mu", type=float, default=0.0)
    pb.add_argument("--parity", choices=["even", "odd"])
    pb.add_argument("--nev", type=int, default=1)
    pb.add_argument("--tol", type=float, default=1e-10)
    pb.add_argument("--bisect", type=float, nargs=2, metavar=("S_LO", "S_HI"),
                    help="locate the zero crossing of the eigenvalue in this steepness bracket")
    pb.add_argument("--tol-s", type=float, default=1e-6)
    pb.add_argument("--track", help="directory of wave files forming a branch")
    pb.add_argument("--out", help="spectrum table (default: stdout)")
    _common(pb)

    ps = sub.add_parser("stability", help="Floquet stability sweep")
    ps.add_argument("wave", help="wave file")
    grp = ps.add_mutually_exclusive_group()
    grp.add_argument("--mu", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    grp.add_argument("--mu-log", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    ps.add_argument("--count", type=int, default=50)
    ps.add_argument("--policy", choices=["zero", "track", "ladder"], default="zero")
    ps.add_argument("--shifts", type=_float_list, default=[0.0])
    ps.add_argument("--nev", type=int, default=4)
    ps.add_argument("--tol", type=float, default=1e-10)
    ps.add_argument("--workers", type=int, default=1)
    ps.add_argument("--out", help="sweep table (default: stdout)")
    _common(ps)
    return parser


def _layer_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = _read_config(args.config)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    extra = []
    for key, val in cfg.items():
        act = known.get(key)
        if act is None or key in ("help", "config"):
            parser.error(f"unknown config key {key!r}")
        flag = act.option_strings[-1] if act.option_strings else None
        if flag is None:
            continue
        if act.nargs == 0:
            if val.lower() in ("1", "true", "yes", "on"):
                extra.append(flag)
        elif act.nargs in (2, "+"):
            extra.extend([flag, *val.replace(",", " ").split()])
        else:
            extra.extend([flag, val])
    # config first, command line last so that flags win
    pos = [a for a in argv if a != args.command]
    return parser.parse_args([args.command, *extra, *pos])


# -- validation ---------------------------------------------------------------------


def _validate_wave_args(parser, a) -> None:
    if a.steepness is None:
        parser.error("--steepness is required")
    if not (0.0 <= a.steepness < st.S_LIMIT):
        parser.error(f"--steepness must lie in [0, {st.S_LIMIT}) (limiting wave excluded)")
    if a.modes < 8 or a.modes % 2:
        parser.error("--modes must be even and at least 8")
    if not (0.0 < a.L <= 1.0):
        parser.error("--L must lie in (0, 1]")
    if a.g <= 0 or a.ds <= 0 or a.tol <= 0:
        parser.error("--g, --ds and --tol must be positive")


def _validate_mu(parser, mu: float) -> None:
    if not (0.0 <= mu < 1.0):
        parser.error("Floquet parameter must lie in [0, 1)")


def _load_wave(parser, path: str) -> st.StokesWave:
    if not Path(path).is_file():
        parser.error(f"wave file {path!r} not found")
    try:
        return st.read_wave(path)
    except st.WaveFileError as exc:
        parser.error(str(exc))


# -- commands -----------------------------------------------------------------------


def cmd_wave(a, parser) -> int:
    _validate_wave_args(parser, a)
    if a.seed:
        start = _load_wave(parser, a.seed)
        if start.s > a.steepness:
            parser.error("seed wave is steeper than the target")
    else:
        start = st.flat_wave(a.modes, a.g, a.L)
    if a.steepness == 0.0:
        branch = st.BranchState([start])
    else:
        policy = st.ContinuationPolicy(ds=a.ds, ds_max=a.ds, tol=a.tol, refine=a.adapt)
        try:
            branch = st.continue_branch(start, a.steepness, policy)
        except (st.ContinuationError, st.NewtonError) as exc:
            raise NumericalFailure(str(exc)) from exc
    w = branch.waves[-1]
    st.write_wave(w, a.out)
    if a.summary:
        with open(a.summary, "w") as fh:
            fh.write("s\tc\tkinetic\tpotential\n")
            for bw in branch.waves:
                kin, pot = st.compute_hamiltonian(bw)
                fh.write(f"{bw.s:.16e}\t{bw.c:.16e}\t{kin:.16e}\t{pot:.16e}\n")
    print(f"s = {w.s:.12f}  c = {w.c:.15f}  N = {w.n_modes}  residual = {st.residual_norm(w):.2e}")
    return 0


def _emit(rows, out, writer) -> None:
    if out:
        writer(rows, out)
    else:
        import tempfile
        with tempfile.TemporaryDirectory() as tmp:
            p = Path(tmp) / "t.tsv"
            writer(rows, p)
            sys.stdout.write(p.read_text())


def cmd_babenko(a, parser) -> int:
    w = _load_wave(parser, a.wave)
    _validate_mu(parser, a.mu)
    if a.mu != 0.0 and w.L != 1.0:
        parser.error("mu != 0 needs a wave sampled with L = 1")
    if a.parity and a.mu not in (0.0, 0.5):
        parser.error("--parity needs mu = 0 or mu = 0.5")
    if a.nev < 1:
        parser.error("--nev must be positive")
    rows = []
    status = 0
    if a.bisect:
        lo, hi = a.bisect
        if not (0.0 < lo < hi < st.S_LIMIT):
            parser.error("--bisect needs 0 < S_LO < S_HI < limiting steepness")
        try:
            branch = st.continue_branch(w, hi, st.ContinuationPolicy(refine=False), stops=[lo])
            bp = bs.find_branch_point(branch, a.mu, (lo, hi), tol_s=a.tol_s,
                                      parity=a.parity or "even", eig_tol=a.tol)
        except (ValueError, st.ContinuationError, st.NewtonError, KrylovConvergenceError) as exc:
            raise NumericalFailure(str(exc)) from exc
        print(f"s* = {bp.s_star:.10f}  mu = {bp.mu:g}  kind = {bp.kind}  "
              f"bracket = [{bp.bracket[0]:.10f}, {bp.bracket[1]:.10f}]")
        return 0
    if a.track:
        files = sorted(Path(a.track).glob("*"))
        waves = sorted((st.read_wave(f) for f in files if f.is_file()), key=lambda x: x.s)
        if not waves:
            parser.error(f"no wave files in {a.track!r}")
        branch = st.BranchState(waves)
        for s0 in a.shifts:
            try:
                seed = bs.eig_nearest(waves[0], s0, a.mu, parity=a.parity, tol=a.tol)
                curve = bs.track_eigenvalue_branch(branch, seed, a.mu, a.parity, tol=a.tol)
            except KrylovConvergenceError as exc:
                log.error("tracking from shift %g failed: %s", s0, exc)
                status = 1
                continue
            rows.extend((s, a.mu, xi, a.parity or seed.parity, float("nan")) for s, xi in curve)
    else:
        for s0 in a.shifts:
            try:
                pairs = bs.eigs_near(w, s0, a.mu, nev=a.nev, parity=a.parity, tol=a.tol)
            except KrylovConvergenceError as exc:
                log.error("shift %g failed: %s", s0, exc)
                status = 1
                continue
            rows.extend((w.s, a.mu, p.xi, p.parity, p.residual) for p in pairs)
    _emit(rows, a.out, bs.write_spectrum)
    return status


def cmd_stability(a, parser) -> int:
    w = _load_wave(parser, a.wave)
    if a.count < 1 or a.nev < 1:
        parser.error("--count and --nev must be positive")
    if a.mu_log is not None:
        lo, hi = a.mu_log
        if not (0.0 < lo <= hi < 1.0):
            parser.error("--mu-log needs 0 < LO <= HI < 1")
        mus = sb.mu_schedule(lo, hi, a.count, log_spaced=True)
    else:
        lo, hi = a.mu if a.mu is not None else (0.0, 0.5)
        if not (0.0 <= lo <= hi < 1.0):
            parser.error("--mu needs 0 <= LO <= HI < 1")
        mus = sb.mu_schedule(lo, hi, a.count)
    if w.L != 1.0:
        w = st.solve_newton(st.resample_wave(w, None, 1.0), w.s)
    sweep = sb.floquet_sweep(w, mus, a.policy, nev=a.nev, shifts=a.shifts, tol=a.tol,
                             workers=a.workers)

    def writer(_rows, path):
        sb.write_sweep(sweep, w, path)
    _emit(None, a.out, writer)
    mu_star, gamma = sweep.max_growth
    print(f"# mu* = {mu_star:.10f}  gamma* = {gamma:.6e}", file=sys.stderr if not a.out else sys.stdout)
    return 1 if sweep.failures else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # let "--shifts -0.9,0.1" through: argparse would read -0.9 as a flag
    fixed = []
    it = iter(argv)
    for tok in it:
        if tok == "--shifts":
            nxt = next(it, None)
            fixed.append(tok if nxt is None else f"--shifts={nxt}")
        else:
            fixed.append(tok)
    argv = fixed
    parser = build_parser()
    try:
        a = _layer_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    cmds = {"wave": cmd_wave, "babenko": cmd_babenko, "stability": cmd_stability}
    try:
        return cmds[a.command](a, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (NumericalFailure, st.NewtonError, st.ContinuationError, KrylovConvergenceError) as exc:
        print(f"stokesffh: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
