"""Instance generators, theorem checks and CSV experiment sweeps."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exact import MAX_BITS, SearchTimeout, find_perfect_matching
from .extremal import build_h0, build_h0_canonical, H0Params
from .hypergraph import PartiteHypergraph
from .parity import (CASE_I, CASE_II, NO_OBSTRUCTION, NullspaceTooLarge, find_parity_certificate,
                     theorem_case_witness)

KINDS = ("complete", "empty", "h0", "h0_subgraph", "random_p", "h0_perturbed")
UNKNOWN = "unknown"


@dataclass(frozen=True)
class GenSpec:
    kind: str
    k: int
    n: int
    d: tuple[int, ...] | None = None
    p: float | None = None
    flips: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.k < 2 or self.n < 1:
            raise ValueError("need k >= 2 and n >= 1")
        if self.d is not None:
            object.__setattr__(self, "d", tuple(int(x) for x in self.d))
            if len(self.d) != self.k or any(not 0 <= x <= self.n for x in self.d):
                raise ValueError("d needs k entries in [0, n]")
        if self.kind in ("h0_subgraph", "random_p"):
            if self.p is None or not 0 <= self.p <= 1:
                raise ValueError(f"{self.kind} needs p in [0, 1]")
        if self.kind == "h0_perturbed" and (self.flips is None or not 0 <= self.flips <= self.n ** self.k):
            raise ValueError("h0_perturbed needs 0 <= flips <= n^k")
        if self.kind in ("h0", "h0_subgraph") and self.d is None:
            object.__setattr__(self, "d", (self.n // 2,) * self.k)

    def describe(self) -> str:
        parts = [self.kind, f"k={self.k}", f"n={self.n}"]
        if self.d is not None:
            parts.append("d=" + ",".join(map(str, self.d)))
        if self.p is not None:
            parts.append(f"p={self.p}")
        if self.flips is not None:
            parts.append(f"flips={self.flips}")
        parts.append(f"seed={self.seed}")
        return " ".join(parts)


def tuple_uniforms(seed: int, count: int) -> np.ndarray:
    """``count`` uniforms where draw ``i`` belongs to tuple index ``i`` (row-major)."""
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    return gen.random(count)


def generate(spec: GenSpec) -> PartiteHypergraph:
    k, n = spec.k, spec.n
    shape = (n,) * k
    if spec.kind == "complete":
        return PartiteHypergraph.complete(k, n)
    if spec.kind == "empty":
        return PartiteHypergraph.empty(k, n)
    if spec.kind == "h0":
        return build_h0(H0Params(k, n, spec.d))
    u = tuple_uniforms(spec.seed, n ** k).reshape(shape)
    if spec.kind == "random_p":
        return PartiteHypergraph(k, n, u < spec.p)
    if spec.kind == "h0_subgraph":
        base = build_h0(H0Params(k, n, spec.d))
        return PartiteHypergraph(k, n, base.adj & (u < spec.p))
    base = build_h0(H0Params(k, n, spec.d)) if spec.d is not None else build_h0_canonical(k, n)
    flat = base.adj.reshape(-1).copy()
    flat[np.argsort(u.reshape(-1), kind="stable")[:spec.flips]] ^= True
    return PartiteHypergraph(k, n, flat.reshape(shape))


def _codegree_floor_ok(adj: np.ndarray, e: tuple[int, ...], floor: int) -> bool:
    k = adj.ndim
    for j in range(k):
        idx = tuple(slice(None) if c == j else e[c] for c in range(k))
        if adj[idx].sum() - 1 < floor:
            return False
    return True


def engineered_instance(k: int, n: int, seed: int, alpha: float = 0.125,
                        extra: int | None = None, deletions: int | None = None) -> PartiteHypergraph:
    """A perturbed H0 with a perfect matching and co-degree at least ``ceil((1/2 - alpha) n)``.

    For even n one class size moves off ``n/2`` by at most one, so a few
    vertices sit on the wrong side of the closest canonical copy.  When the
    sizes add up to an odd number, a few edges of odd parity are added to
    break the obstruction; deletions never touch those.
    Random deletions are accepted only when they keep every co-degree above
    the floor.
    """
    rng = np.random.default_rng(seed)
    if n % 2:
        d = [int(x) for x in rng.choice([(n - 1) // 2, (n + 1) // 2], size=k)]
    else:
        d = [n // 2] * k
        d[int(rng.integers(k))] += int(rng.choice([-1, 0, 1]))
    H = build_h0(H0Params(k, n, tuple(d)))
    adj = H.adj.copy()
    extra = (max(1, n // 2) if sum(d) % 2 else 0) if extra is None else extra
    odd = [tuple(int(x) for x in t) for t in np.argwhere(~adj)]
    added = set()
    if extra:
        if not odd:
            raise ValueError("no odd edge available to add")
        for i in rng.choice(len(odd), size=min(extra, len(odd)), replace=False):
            adj[odd[i]] = True
            added.add(odd[i])
    floor = math.ceil((0.5 - alpha) * n)
    deletions = n // 2 if deletions is None else deletions
    present = np.argwhere(adj)
    done = 0
    for i in rng.permutation(len(present)):
        if done >= deletions:
            break
        e = tuple(int(x) for x in present[i])
        if e not in added and _codegree_floor_ok(adj, e, floor):
            adj[e] = False
            done += 1
    return PartiteHypergraph(k, n, adj)


# -- theorem check ---------------------------------------------------------

@dataclass
class TheoremVerdict:
    theorem_case: str
    pm_exists: bool | None
    consistent: bool | None
    degree_ok: bool
    min_codegree: int
    certificate: dict | None = None
    matching: list | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def check_theorem(H: PartiteHypergraph, timeout: float | None = 60.0, cap: int = 20) -> TheoremVerdict:
    """Classify, run the exact matcher, and compare with the characterization.

    An obstruction together with a perfect matching is a violation.  No
    perfect matching and no obstruction is an anomaly the characterization
    only rules out for large n under the degree condition.
    """
    if not H.balanced or H.class_sizes[0] != H.n:
        raise ValueError("check_theorem needs all classes of full size n")
    delta = H.min_codegree()
    degree_ok = delta >= H.n // 2
    note = ""
    try:
        case, cert = theorem_case_witness(H, cap)
    except NullspaceTooLarge as err:
        cert = None
        if find_parity_certificate(H) is None:
            case = NO_OBSTRUCTION
        else:
            case, note = UNKNOWN, str(err)
    pm = None
    M = None
    if H.k * H.n <= MAX_BITS:
        try:
            M = find_perfect_matching(H, timeout)
            pm = M is not None
        except SearchTimeout as err:
            note = (note + "; " if note else "") + str(err)
    else:
        note = (note + "; " if note else "") + f"k*n > {MAX_BITS}, matcher skipped"
    consistent = None
    if pm is not None and case != UNKNOWN:
        obstructed = case in (CASE_I, CASE_II)
        consistent = (not pm) == obstructed
        if obstructed and pm:
            note = (note + "; " if note else "") + "violation: obstruction and a perfect matching"
        elif not consistent:
            note = (note + "; " if note else "") + "anomaly: no perfect matching and no obstruction"
    return TheoremVerdict(case, pm, consistent, degree_ok, delta,
                          None if cert is None else cert.to_dict(),
                          None if M is None else [list(e) for e in M], note)


# -- sweeps ----------------------------------------------------------------

@dataclass
class ExperimentRow:
    index: int
    instance: str
    kind: str
    k: int
    n: int
    seed: int
    min_codegree: int
    degree_ok: bool
    theorem_case: str
    pm_exists: bool | None
    consistent: bool | None
    pipeline_status: str
    absorption_status: str
    t_theorem: float
    t_pipeline: float
    t_absorb: float
    note: str = ""


CSV_COLUMNS = [f.name for f in fields(ExperimentRow)]


@dataclass(frozen=True)
class SweepOptions:
    timeout: float = 60.0
    pipeline: bool = False
    absorb: bool = False


def run_row(index: int, spec: GenSpec, opts: SweepOptions = SweepOptions()) -> ExperimentRow:
    from .absorbing import AbsorbConfig, perfect_matching_via_absorption
    from .pipeline import ObstructionFound, PipelineConfig, PipelineError, run_pipeline

    H = generate(spec)
    t0 = time.perf_counter()
    v = check_theorem(H, opts.timeout)
    t1 = time.perf_counter()
    pstat = "skipped"
    if opts.pipeline:
        try:
            pstat = run_pipeline(H, PipelineConfig(seed=spec.seed)).status
        except ObstructionFound:
            pstat = "obstruction"
        except PipelineError as err:
            pstat = f"precondition: {err}" if err.stage is None else f"{err.stage}: {err}"
    t2 = time.perf_counter()
    astat = "skipped"
    if opts.absorb:
        astat = perfect_matching_via_absorption(H, AbsorbConfig(seed=spec.seed, timeout=opts.timeout)).status
    t3 = time.perf_counter()
    if v.theorem_case in (CASE_I, CASE_II) and v.pm_exists:
        raise AssertionError(f"row {index}: obstruction with a perfect matching on {spec.describe()}")
    return ExperimentRow(index, spec.describe(), spec.kind, spec.k, spec.n, spec.seed, v.min_codegree,
                         v.degree_ok, v.theorem_case, v.pm_exists, v.consistent, pstat, astat,
                         round(t1 - t0, 6), round(t2 - t1, 6), round(t3 - t2, 6), v.note)


def _run_packed(args):
    return run_row(*args)


def sweep(grid: Sequence[GenSpec], out: str | Path | None = None, opts: SweepOptions = SweepOptions(),
          workers: int = 1) -> list[ExperimentRow]:
    """One row per grid entry, in grid order, optionally written as CSV."""
    jobs = [(i, spec, opts) for i, spec in enumerate(grid)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_packed, jobs))
    else:
        rows = [_run_packed(j) for j in jobs]
    rows.sort(key=lambda r: r.index)
    if out is not None:
        write_csv(rows, out)
    return rows


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(rows: Iterable[ExperimentRow], path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])
    except OSError as err:
        raise OSError(f"cannot write sweep CSV to {path}: {err}") from err


def _parse_bool(s: str) -> bool | None:
    if s == "":
        return None
    if s in ("True", "False"):
        return s == "True"
    raise ValueError(f"not a boolean: {s!r}")


def read_csv(path: str | Path) -> list[ExperimentRow]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd, None)
            if header != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            out = []
            for rec in rd:
                kw = {}
                for f, cell in zip(fields(ExperimentRow), rec):
                    t = f.type if isinstance(f.type, str) else f.type.__name__
                    if t == "int":
                        kw[f.name] = int(cell)
                    elif t == "float":
                        kw[f.name] = float(cell)
                    elif t.startswith("bool"):
                        kw[f.name] = _parse_bool(cell)
                    else:
                        kw[f.name] = cell
                out.append(ExperimentRow(**kw))
            return out
    except OSError as err:
        raise OSError(f"cannot read sweep CSV from {path}: {err}") from err


def grid_from_json(text: str) -> list[GenSpec]:
    """A grid is a JSON list of GenSpec field objects."""
    items = json.loads(text)
    if not isinstance(items, list):
        raise ValueError("grid must be a JSON list")
    return [GenSpec(**item) for item in items]
