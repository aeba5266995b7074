"""Command-line front end: deterministic CSV/JSON emission and validation.

Every subcommand resolves its full configuration up front (RunConfig), echoes
it into header comments so output files are self-describing, and formats
floats at 12 significant digits with '.' decimal and LF line endings --
identical configuration must produce byte-identical files, including under
--jobs parallelism (records are sorted after collection).

Exit status: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import acceptance
from . import exacthamiltonian as exact6
from .bell import (
    APPROACHES,
    BellAngles,
    SweepRecord,
    SweepSpec,
    exact_chsh,
    optimal_angles,
    records_from_tables,
    sweep,
)
from .evolution import PrepParams, prepare_bell_state, rotate
from .fockspace import SectorKey, TruncationConfig, boundary_mass, occupation_grids, sector_matrix


class UsageError(ValueError):
    """Bad flags or an impossible configuration; maps to exit status 2."""


SWEEP_HEADER = "approach,r,gamma,k_cut,E1,E2,E3,E4,B,boundary_mass,norm_drift,error_flag"
FULLHAM_HEADER = "approach,r,gamma,k_cut,N,E1,E2,E3,E4,B,boundary_mass,norm_drift,error_flag"
EXACT_HEADER = "r,B_exact"
PROBS_HEADER = "N_A,N_B,k_A,k_B,p"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(x: float) -> float:
    return float(_fmt(x))


def _jnum(x: float) -> float | None:
    """JSON-safe number: NaN (error-flagged records) becomes null."""
    return None if np.isnan(x) else _round12(x)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved inputs of one CLI invocation; round-trips through dicts."""

    subcommand: str
    r_min: float = 0.0
    r_max: float = 0.8
    r_step: float = 0.02
    gammas: tuple[float, ...] = (1.0,)
    approaches: tuple[str, ...] = APPROACHES
    k_cut: int = 12
    n_atoms: int = 10
    angles: tuple[float, float, float, float] = tuple(optimal_angles())
    desqueeze_scale: float = 1.0
    output: str = "-"
    fmt: str = "csv"
    jobs: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        for key in ("gammas", "approaches", "angles"):
            d[key] = tuple(d[key])
        return cls(**d)

    def r_grid(self) -> tuple[float, ...]:
        if self.r_step <= 0:
            raise UsageError(f"--r-step must be positive, got {self.r_step}")
        if self.r_max < self.r_min:
            raise UsageError(f"empty r grid: r-max {self.r_max} < r-min {self.r_min}")
        n = int(np.floor((self.r_max - self.r_min) / self.r_step + 1e-9))
        return tuple(round(self.r_min + i * self.r_step, 12) for i in range(n + 1))

    def bell_angles(self) -> BellAngles:
        return BellAngles(*self.angles)


def _parse_angles(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"--angles wants thetaA,thetaAp,thetaB,thetaBp (4 values), got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad --angles value: {exc}") from None


def _parse_sectors(text: str) -> tuple[SectorKey, ...]:
    sectors = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise UsageError(f"sector {chunk!r} is not of the form N_A,N_B")
        try:
            sector = SectorKey(int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise UsageError(f"bad sector {chunk!r}: {exc}") from None
        if sector.n_a < 0 or sector.n_b < 0:
            raise UsageError(f"sector {chunk!r} has a negative particle number")
        sectors.append(sector)
    return tuple(sectors)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _config_comments(cfg: RunConfig, extra: dict | None = None, include_angles: bool = True) -> list[str]:
    lines = [f"# splitbell {cfg.subcommand}"]
    if include_angles:
        a = cfg.bell_angles()
        lines.append(
            f"# angles: thetaA={_fmt(a.theta_a)}, thetaAp={_fmt(a.theta_a_prime)}, "
            f"thetaB={_fmt(a.theta_b)}, thetaBp={_fmt(a.theta_b_prime)}"
        )
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {val}")
    return lines


def _record_fields(rec: SweepRecord, with_n: bool) -> list[str]:
    cells = [rec.approach, _fmt(rec.r), _fmt(rec.gamma), str(rec.k_cut)]
    if with_n:
        cells.append(str(rec.n_atoms))
    cells += [_fmt(e) for e in rec.e_values]
    cells += [_fmt(rec.b), _fmt(rec.boundary_mass), _fmt(rec.norm_drift)]
    cells.append((rec.error or "").replace(",", ";"))
    return cells


def _records_csv(cfg: RunConfig, records: list[SweepRecord], extra: dict, with_n: bool) -> str:
    lines = _config_comments(cfg, extra)
    lines.append(FULLHAM_HEADER if with_n else SWEEP_HEADER)
    for rec in records:
        lines.append(",".join(_record_fields(rec, with_n)))
    return "\n".join(lines) + "\n"


def _record_dict(rec: SweepRecord, with_n: bool) -> dict:
    d = {
        "approach": rec.approach,
        "r": _round12(rec.r),
        "gamma": _round12(rec.gamma),
        "k_cut": rec.k_cut,
    }
    if with_n:
        d["N"] = rec.n_atoms
    d.update(
        {
            "E1": _jnum(rec.e_values[0]),
            "E2": _jnum(rec.e_values[1]),
            "E3": _jnum(rec.e_values[2]),
            "E4": _jnum(rec.e_values[3]),
            "B": _jnum(rec.b),
            "boundary_mass": _round12(rec.boundary_mass),
            "norm_drift": _round12(rec.norm_drift),
            "error_flag": rec.error or "",
        }
    )
    return d


def _records_json(cfg: RunConfig, records: list[SweepRecord], with_n: bool) -> str:
    doc = {
        "config": cfg.to_dict(),
        "records": [_record_dict(rec, with_n) for rec in records],
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_exact(cfg: RunConfig) -> int:
    grid = cfg.r_grid()
    if cfg.fmt == "csv":
        lines = _config_comments(cfg, {"curve": "closed-form Approach-I Bell parameter at optimal angles"})
        lines.append(EXACT_HEADER)
        for r in grid:
            lines.append(f"{_fmt(r)},{_fmt(exact_chsh(r))}")
        _write(cfg.output, "\n".join(lines) + "\n")
    else:
        doc = {
            "config": cfg.to_dict(),
            "records": [{"r": _round12(r), "B_exact": _round12(exact_chsh(r))} for r in grid],
        }
        _write(cfg.output, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    spec = SweepSpec(
        r_values=cfg.r_grid(),
        approaches=cfg.approaches,
        gammas=cfg.gammas,
        k_cut=cfg.k_cut,
        angles=cfg.bell_angles(),
        desqueeze_scale=cfg.desqueeze_scale,
        jobs=cfg.jobs,
    )
    records = sweep(spec)
    extra = {
        "gammas": " ".join(_fmt(g) for g in cfg.gammas),
        "approaches": " ".join(cfg.approaches),
        "k_cut": cfg.k_cut,
        "desqueeze_scale": _fmt(cfg.desqueeze_scale),
        "integrator": "dop853 rtol=1e-10 atol=1e-12",
    }
    if cfg.fmt == "csv":
        _write(cfg.output, _records_csv(cfg, records, extra, with_n=False))
    else:
        _write(cfg.output, _records_json(cfg, records, with_n=False))
    return 0


def _fullham_one_r(args: tuple[RunConfig, float]) -> list[SweepRecord]:
    cfg, r = args
    state = exact6.prepare_full(r, cfg.n_atoms)
    tables = tuple(
        exact6.reduced_probability_table(state, ta, tb) for ta, tb in cfg.bell_angles().pairs()
    )
    k_a, l_a, k_b, l_b = occupation_grids(tables[0].cfg)
    at_ceiling = (
        (k_a == cfg.n_atoms) | (l_a == cfg.n_atoms) | (k_b == cfg.n_atoms) | (l_b == cfg.n_atoms)
    )
    bmass = float(tables[0].probs[at_ceiling].sum())
    return records_from_tables(
        tables, r, bmass, state.norm_drift, cfg.approaches, cfg.gammas, n_atoms=cfg.n_atoms
    )


def cmd_fullham(cfg: RunConfig) -> int:
    if cfg.n_atoms < 4:
        raise UsageError(f"--N must be at least 4, got {cfg.n_atoms}")
    grid = cfg.r_grid()
    if cfg.jobs > 1 and len(grid) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_fullham_one_r, [(cfg, r) for r in grid]))
    else:
        chunks = [_fullham_one_r((cfg, r)) for r in grid]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda rec: (rec.approach, rec.gamma, rec.r))
    extra = {
        "gammas": " ".join(_fmt(g) for g in cfg.gammas),
        "approaches": " ".join(cfg.approaches),
        "N": cfg.n_atoms,
        "ceiling": cfg.n_atoms,
        "integrator": "dop853 rtol=1e-10 atol=1e-12",
    }
    if cfg.fmt == "csv":
        _write(cfg.output, _records_csv(cfg, records, extra, with_n=True))
    else:
        _write(cfg.output, _records_json(cfg, records, with_n=True))
    return 0


def cmd_probs(cfg: RunConfig, r: float, sectors: tuple[SectorKey, ...],
              theta_a: float, theta_b: float) -> int:
    if r < 0:
        raise UsageError(f"--r must be >= 0, got {r}")
    for sector in sectors:
        if sector.n_a > cfg.k_cut or sector.n_b > cfg.k_cut:
            raise UsageError(
                f"sector ({sector.n_a},{sector.n_b}) exceeds the k_cut={cfg.k_cut} ceiling"
            )
    tcfg = TruncationConfig(cfg.k_cut)
    state = prepare_bell_state(PrepParams(r, cfg.desqueeze_scale), tcfg)
    rotated = rotate(state, theta_a, theta_b)
    extra = {
        "r": _fmt(r),
        "theta_a": _fmt(theta_a),
        "theta_b": _fmt(theta_b),
        "k_cut": cfg.k_cut,
        "boundary_mass": _fmt(boundary_mass(state)),
        "sectors": " ".join(f"({s.n_a},{s.n_b})" for s in sectors),
    }
    matrices = [(s, sector_matrix(rotated, s)) for s in sectors]
    if cfg.fmt == "csv":
        lines = _config_comments(cfg, extra, include_angles=False)
        lines.append(PROBS_HEADER)
        for sector, mat in matrices:
            for k_a in range(mat.shape[0]):
                for k_b in range(mat.shape[1]):
                    lines.append(
                        f"{sector.n_a},{sector.n_b},{k_a},{k_b},{_fmt(mat[k_a, k_b])}"
                    )
        _write(cfg.output, "\n".join(lines) + "\n")
    else:
        doc = {
            "config": cfg.to_dict(),
            "r": _round12(r),
            "theta_a": _round12(theta_a),
            "theta_b": _round12(theta_b),
            "sectors": [
                {
                    "N_A": sector.n_a,
                    "N_B": sector.n_b,
                    "matrix": [[_round12(v) for v in row] for row in mat],
                }
                for sector, mat in matrices
            ],
        }
        _write(cfg.output, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    results = acceptance.run_all(progress=lambda line: print(line, file=sys.stderr))
    doc = acceptance.report(results)
    _write(cfg.output, json.dumps(doc, indent=2) + "\n")
    return 0 if doc["passed"] else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitbell",
        description="Bell-test simulator for a split two-mode-squeezed BEC",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, r_max_default):
        p.add_argument("--r-min", type=float, default=0.0)
        p.add_argument("--r-max", type=float, default=r_max_default)
        p.add_argument("--r-step", type=float, default=0.02)
        p.add_argument("--gamma", type=float, action="append",
                       help="survival probability; repeatable (default 1)")
        p.add_argument("--approach", action="append", choices=APPROACHES,
                       help="correlator family; repeatable (default all three)")
        p.add_argument("--angles", type=str, default=None,
                       help="thetaA,thetaAp,thetaB,thetaBp (radians)")
        p.add_argument("--desqueeze-scale", type=float, default=1.0)
        p.add_argument("--output", type=str, default="-")
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
        p.add_argument("--jobs", type=int, default=1)

    p_exact = sub.add_parser("exact", help="closed-form Bell curve")
    add_common(p_exact, 0.8)

    p_sweep = sub.add_parser("sweep", help="numerical violation sweep")
    add_common(p_sweep, 0.8)
    p_sweep.add_argument("--kcut", type=int, default=12)

    p_probs = sub.add_parser("probs", help="per-sector probability matrices")
    p_probs.add_argument("--r", type=float, default=0.5)
    p_probs.add_argument("--sectors", type=str, default="5,5;7,7;11,11;7,5",
                         help="semicolon-separated N_A,N_B pairs")
    p_probs.add_argument("--theta-a", type=float, default=0.0)
    p_probs.add_argument("--theta-b", type=float, default=0.0)
    p_probs.add_argument("--kcut", type=int, default=16)
    p_probs.add_argument("--desqueeze-scale", type=float, default=1.0)
    p_probs.add_argument("--output", type=str, default="-")
    p_probs.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")

    p_full = sub.add_parser("fullham", help="exact-Hamiltonian sweep (six modes, fixed N)")
    add_common(p_full, 0.5)
    p_full.add_argument("--N", type=int, default=10, dest="n_atoms")

    p_val = sub.add_parser("validate", help="run the acceptance suite")
    p_val.add_argument("--output", type=str, default="-")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    updates: dict = {}
    if hasattr(args, "r_min"):
        updates.update(r_min=args.r_min, r_max=args.r_max, r_step=args.r_step)
    if getattr(args, "gamma", None):
        for g in args.gamma:
            if not 0.0 <= g <= 1.0:
                raise UsageError(f"--gamma must be in [0, 1], got {g}")
        updates["gammas"] = tuple(args.gamma)
    if getattr(args, "approach", None):
        updates["approaches"] = tuple(dict.fromkeys(args.approach))
    if getattr(args, "angles", None):
        updates["angles"] = _parse_angles(args.angles)
    if hasattr(args, "desqueeze_scale"):
        updates["desqueeze_scale"] = args.desqueeze_scale
    if hasattr(args, "kcut"):
        if args.kcut < 1:
            raise UsageError(f"--kcut must be at least 1, got {args.kcut}")
        updates["k_cut"] = args.kcut
    if hasattr(args, "n_atoms"):
        updates["n_atoms"] = args.n_atoms
        updates["k_cut"] = args.n_atoms  # reduced tables carry a ceiling of N
    if hasattr(args, "output"):
        updates["output"] = args.output
    if hasattr(args, "fmt"):
        updates["fmt"] = args.fmt
    if hasattr(args, "jobs"):
        if args.jobs < 1:
            raise UsageError(f"--jobs must be at least 1, got {args.jobs}")
        updates["jobs"] = args.jobs
    return replace(cfg, **updates)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.subcommand == "exact":
            return cmd_exact(cfg)
        if args.subcommand == "sweep":
            return cmd_sweep(cfg)
        if args.subcommand == "probs":
            return cmd_probs(cfg, args.r, _parse_sectors(args.sectors), args.theta_a, args.theta_b)
        if args.subcommand == "fullham":
            return cmd_fullham(cfg)
        if args.subcommand == "validate":
            return cmd_validate(cfg)
        raise UsageError(f"unknown subcommand {args.subcommand!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
