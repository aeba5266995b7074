"""Readers for the splitbell CSV contract.

The simulator writes three tabular shapes, each with a fixed header:

  sweep    approach,r,gamma,k_cut,E1,E2,E3,E4,B,boundary_mass,norm_drift,error_flag
  fullham  the same with an N column after k_cut
  exact    r,B_exact
  probs    N_A,N_B,k_A,k_B,p

Lines starting with '#' are configuration comments and are skipped.  These
loaders validate the header byte-for-byte and hand back plain numpy arrays;
no physics is recomputed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SWEEP_HEADER = "approach,r,gamma,k_cut,E1,E2,E3,E4,B,boundary_mass,norm_drift,error_flag"
FULLHAM_HEADER = "approach,r,gamma,k_cut,N,E1,E2,E3,E4,B,boundary_mass,norm_drift,error_flag"
EXACT_HEADER = "r,B_exact"
PROBS_HEADER = "N_A,N_B,k_A,k_B,p"


class SchemaError(ValueError):
    """The file does not follow the expected splitbell CSV contract."""


def _data_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: no data lines (only comments or empty)")
    return lines


def _check_header(path: str, got: str, expected: tuple[str, ...]) -> str:
    if got not in expected:
        raise SchemaError(
            f"{path}: header mismatch; expected {' or '.join(repr(e) for e in expected)}, "
            f"got {got!r}"
        )
    return got


@dataclass(frozen=True)
class SweepCurve:
    """One (approach, gamma[, N]) family: B over the r grid, NaN where undefined."""

    approach: str
    gamma: float
    n_atoms: int | None
    r: np.ndarray
    b: np.ndarray


def load_sweep(path: str) -> list[SweepCurve]:
    """Parse a sweep or fullham CSV into per-(approach, gamma) curves.

    Rows with a nonempty error_flag contribute NaN, so plots show gaps rather
    than fabricated values.  Curves come back sorted the way the file is.
    """
    lines = _data_lines(path)
    header = _check_header(path, lines[0], (SWEEP_HEADER, FULLHAM_HEADER))
    with_n = header == FULLHAM_HEADER
    n_cols = len(header.split(","))
    groups: dict[tuple, list[tuple[float, float]]] = {}
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != n_cols:
            raise SchemaError(f"{path}: row has {len(cells)} cells, header has {n_cols}: {ln!r}")
        approach = cells[0]
        try:
            r = float(cells[1])
            gamma = float(cells[2])
            n_atoms = int(cells[4]) if with_n else None
            b = float(cells[9] if with_n else cells[8])
        except ValueError as exc:
            raise SchemaError(f"{path}: bad numeric cell in {ln!r}: {exc}") from None
        error_flag = cells[-1]
        if error_flag:
            b = float("nan")
        groups.setdefault((approach, gamma, n_atoms), []).append((r, b))
    curves = []
    for (approach, gamma, n_atoms), pairs in groups.items():
        arr = np.array(pairs)
        curves.append(SweepCurve(approach, gamma, n_atoms, arr[:, 0], arr[:, 1]))
    return curves


def load_exact(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse the closed-form benchmark curve: columns r, B_exact."""
    lines = _data_lines(path)
    _check_header(path, lines[0], (EXACT_HEADER,))
    rs, bs = [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 2:
            raise SchemaError(f"{path}: expected two cells per row, got {ln!r}")
        try:
            rs.append(float(cells[0]))
            bs.append(float(cells[1]))
        except ValueError as exc:
            raise SchemaError(f"{path}: bad numeric cell in {ln!r}: {exc}") from None
    return np.array(rs), np.array(bs)


def load_sectors(path: str) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Parse a probs CSV into (N_A, N_B) -> probability matrix, in file order.

    Every sector must arrive complete: an (N_A, N_B) block carries exactly
    (N_A+1) x (N_B+1) cells, one per (k_A, k_B).
    """
    lines = _data_lines(path)
    _check_header(path, lines[0], (PROBS_HEADER,))
    cells_by_sector: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 5:
            raise SchemaError(f"{path}: expected five cells per row, got {ln!r}")
        try:
            n_a, n_b, k_a, k_b = (int(c) for c in cells[:4])
            p = float(cells[4])
        except ValueError as exc:
            raise SchemaError(f"{path}: bad cell in {ln!r}: {exc}") from None
        if p < 0:
            raise SchemaError(f"{path}: negative probability in {ln!r}")
        cells_by_sector.setdefault((n_a, n_b), {})[(k_a, k_b)] = p
    sectors = []
    for (n_a, n_b), values in cells_by_sector.items():
        mat = np.full((n_a + 1, n_b + 1), np.nan)
        for (k_a, k_b), p in values.items():
            if not (0 <= k_a <= n_a and 0 <= k_b <= n_b):
                raise SchemaError(
                    f"{path}: cell ({k_a},{k_b}) outside sector ({n_a},{n_b})"
                )
            mat[k_a, k_b] = p
        if np.isnan(mat).any():
            raise SchemaError(
                f"{path}: sector ({n_a},{n_b}) is missing "
                f"{int(np.isnan(mat).sum())} of its {mat.size} cells"
            )
        sectors.append(((n_a, n_b), mat))
    return sectors
