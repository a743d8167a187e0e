"""Experiment runners behind the command line.

Every runner returns a :class:`Report` whose ``passed`` flag is true only when
all contractual assertions hold.  Trials draw from ``rng.stream(seed, index)``
so results do not depend on how trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import functools
import io
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import channels, codes, coset, staircase
from .fields import FieldTower, contract_phi, make_tower, matmul_mixed, rank_q
from .rng import stream

SCHEMES = ("nested", "staircase-gabidulin", "staircase-product")
EXHAUSTIVE_B_BUDGET = 1 << 16


def _frac(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _int_list(v):
    if v is None or v == "":
        return None
    if isinstance(v, str):
        return [int(x) for x in v.replace(" ", "").strip("{}[]").split(",") if x]
    return [int(x) for x in v]


def _bool(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


@dataclass
class ExperimentConfig:
    p: int = 2
    s: int = 1
    m: int | None = None
    basepoly: list | None = None
    extpoly: list | None = None
    scheme: str = "staircase-gabidulin"
    n: int | None = None
    k1: int | None = None
    k2: int = 0
    t0: int = 0
    D: list | None = None
    l: int = 1
    N: int | None = None
    t: int = 0
    rho: int = 0
    mu: int = 0
    crisscross: bool = False
    d: list | None = None
    trials: int = 100
    seed: int = 0
    workers: int = 0
    exhaustive: bool = False
    out: str = "out"

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(mapping) - set(known))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        kw = {}
        for k, v in mapping.items():
            if v is None:
                continue
            if k in ("D", "d", "basepoly", "extpoly"):
                kw[k] = _int_list(v)
            elif k in ("crisscross", "exhaustive"):
                kw[k] = _bool(v)
            elif k in ("scheme", "out"):
                kw[k] = str(v)
            else:
                kw[k] = int(v)
        return cls(**kw)

    def to_dict(self):
        return asdict(self)

    @property
    def family(self):
        return "product" if self.scheme == "staircase-product" else "gabidulin"

    @property
    def receivers(self):
        return self.N if self.N is not None else self.n

    def validate(self):
        """All precondition violations, as a list of messages (empty when valid)."""
        errs = []
        if self.scheme not in SCHEMES:
            errs.append(f"scheme must be one of {', '.join(SCHEMES)}")
        for key in ("m", "n", "k1"):
            if getattr(self, key) is None:
                errs.append(f"missing required key {key}")
        for key in ("k2", "t0", "t", "rho", "mu", "trials", "workers", "seed"):
            if getattr(self, key) < 0:
                errs.append(f"{key} must be nonnegative")
        if self.scheme != "nested" and not self.D:
            errs.append("staircase schemes need D")
        if errs:
            return errs
        try:
            make_tower(self.p, self.s, self.m, base_poly=self.basepoly, ext_poly=self.extpoly)
        except ValueError as exc:
            errs.append(f"tower: {exc}")
        if self.scheme == "nested":
            if self.n > self.m:
                errs.append(f"Gabidulin codes need n <= m (n={self.n}, m={self.m})")
            if not 0 <= self.k2 < self.k1 <= self.n:
                errs.append("need 0 <= k2 < k1 <= n")
        else:
            try:
                staircase.plan(self.n, self.k1, self.k2, self.t0, self.D,
                               family=self.family, l=self.l, m=self.m)
            except ValueError as exc:
                errs.append(f"plan: {exc}")
        if self.rho > self.n:
            errs.append(f"rho={self.rho} exceeds n={self.n}")
        if self.receivers < self.n - self.rho:
            errs.append(f"N={self.receivers} is below n - rho = {self.n - self.rho}")
        if self.t > self.receivers:
            errs.append(f"t={self.t} exceeds the number of received columns")
        for d in self.d or ():
            if not 1 <= d <= min(self.n, self.receivers):
                errs.append(f"d={d} outside 1..{min(self.n, self.receivers)}")
        if self.crisscross and self.receivers != self.n:
            errs.append("crisscross channels contact a subset of the n columns (set N = n)")
        if self.trials < 1:
            errs.append("trials must be positive")
        return errs


@dataclass
class Report:
    kind: str
    config: dict
    passed: bool = True
    failures: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def fail(self, message):
        self.passed = False
        self.failures.append(message)

    def to_dict(self):
        return asdict(self)

    def to_json(self, timing=True):
        d = self.to_dict()
        if not timing:
            d.pop("timing")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        if not self.rows:
            return ""
        keys = list(dict.fromkeys(k for r in self.rows for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: r.get(k, "") for k in keys})
        return buf.getvalue()

    def write(self, out_dir, trace=None):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{self.kind}.json").write_text(self.to_json())
        (out / f"{self.kind}.csv").write_text(self.to_csv())
        if trace is not None:
            with open(out / f"{self.kind}_trace.jsonl", "w") as fh:
                for rec in trace:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")


# scheme construction -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Setup:
    tower: FieldTower
    scheme: object
    alpha: int
    ell: int
    plan: staircase.StaircasePlan | None

    @property
    def nested(self):
        return self.plan is None


def _setup_key(cfg: ExperimentConfig):
    return (cfg.p, cfg.s, cfg.m, tuple(cfg.basepoly or ()), tuple(cfg.extpoly or ()), cfg.scheme,
            cfg.n, cfg.k1, cfg.k2, cfg.t0, tuple(cfg.D or ()), cfg.l)


@functools.lru_cache(maxsize=8)
def _build_setup(key):
    p, s, m, bp, ep, scheme, n, k1, k2, t0, D, l = key
    T = make_tower(p, s, m, base_poly=bp or None, ext_poly=ep or None)
    if scheme == "nested":
        pair = codes.gabidulin_pair(T, n, k1, k2)
        return Setup(T, coset.NestedScheme(pair), 1, pair.ell, None)
    family = "product" if scheme == "staircase-product" else "gabidulin"
    P = staircase.plan(n, k1, k2, t0, D, family=family, l=l, m=m)
    return Setup(T, staircase.StaircaseScheme.build(T, P), P.alpha, P.ell, P)


def build_setup(cfg: ExperimentConfig) -> Setup:
    return _build_setup(_setup_key(cfg))


def _capability(setup: Setup, j, d):
    """Largest 2t still decodable at level j with d independent columns."""
    if setup.nested:
        return d - setup.scheme.pair.k1
    P = setup.plan
    span = P.n if P.family == "gabidulin" else P.m_inner
    return span - P.k_list[j - 1] - (P.n - d)


def _bytes_per_symbol(T):
    return T.m * (((T.q - 1).bit_length() + 7) // 8)


# simulation ----------------------------------------------------------------------

def _sample_A(cfg, setup, rng, index):
    F, n = setup.tower.base, cfg.n
    if cfg.crisscross:
        d = cfg.d[index % len(cfg.d)] if cfg.d else n - int(rng.integers(0, cfg.rho + 1))
        I = tuple(sorted(rng.choice(n, size=d, replace=False).tolist()))
        return channels.column_select(n, I), I
    if cfg.d:
        d = cfg.d[index % len(cfg.d)]
        return channels.random_full_rank(F, d, n, rng), None
    spec = channels.CoherentChannelSpec(n, cfg.receivers, cfg.t, cfg.rho, cfg.mu)
    return channels.sample_erasure_matrix(spec, F, rng), None


def run_trial(cfg: ExperimentConfig, index):
    """One end-to-end trial: encode, channel, preprocess, decode."""
    setup = build_setup(cfg)
    T = setup.tower
    rng = stream(cfg.seed, index)
    S = T.random(rng, setup.alpha, setup.ell)
    if setup.nested:
        X = coset.nested_encode(setup.scheme, S, rng)
    else:
        X = staircase.staircase_encode(setup.scheme, S, rng)
    A, I = _sample_A(cfg, setup, rng, index)
    wt = None
    if cfg.crisscross:
        Eb = channels.sample_crisscross_error(T.base, setup.alpha * T.m, A.shape[0], cfg.t, rng)
        wt = channels.crisscross_weight(Eb)
        E = contract_phi(T, Eb)
    else:
        E = channels.sample_rank_error(T, setup.alpha, A.shape[0], cfg.t, rng)
    Y = setup.tower.add(matmul_mixed(T, X, A), E)
    keep = codes.independent_rows(T.base, A)
    rank_a = len(keep)
    rec = {"trial": index, "stream": [cfg.seed, index], "rank_A": rank_a, "wt_c": wt,
           "rank_E": rank_q(T, E)}
    if setup.nested:
        d, j = rank_a, 1
        cols = keep
        rows = 1
    else:
        try:
            j = setup.plan.level_for_rank(rank_a)
        except ValueError:
            rec.update(d=rank_a, level=None, outcome="failure", in_contract=False, symbols=0,
                       bytes=0, error="too few independent columns")
            return rec
        d = setup.plan.D[j - 1]
        cols = keep[:d]
        rows = setup.plan.prefix_rows(j)
    responses = Y[:rows, cols]
    err_rank = rank_q(T, E[:rows, cols])
    in_contract = 2 * err_rank <= _capability(setup, j, d)
    symbols = rows * d
    rec.update(d=d, level=j, in_contract=bool(in_contract), symbols=symbols,
               bytes=symbols * _bytes_per_symbol(T))
    try:
        if setup.nested:
            S_hat = codes.decode_coherent(setup.scheme.pair, responses, A[cols], cfg.t)
        else:
            S_hat = staircase.decode_efficient(setup.scheme, responses, A[cols], cfg.t)
        rec["outcome"] = "ok" if np.array_equal(S_hat, S) else "wrong"
    except codes.DecodingFailure as exc:
        rec["outcome"] = "failure"
        rec["error"] = f"stage {exc.stage}: {exc}" if exc.stage is not None else str(exc)
    return rec


def _run_chunk(args):
    cfg, indices = args
    return [run_trial(cfg, i) for i in indices]


def run_trials(cfg: ExperimentConfig, indices):
    indices = list(indices)
    workers = cfg.workers or os.cpu_count() or 1
    workers = min(workers, len(indices)) or 1
    if workers == 1:
        recs = _run_chunk((cfg, indices))
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            recs = list(itertools.chain.from_iterable(ex.map(_run_chunk, [(cfg, c) for c in chunks])))
    return sorted(recs, key=lambda r: r["trial"])


def summarize_trials(cfg: ExperimentConfig, setup: Setup, recs, report: Report):
    groups = {}
    for r in recs:
        groups.setdefault(r["d"], []).append(r)
    for d in sorted(groups, reverse=True):
        rs = groups[d]
        ok = sum(r["outcome"] == "ok" for r in rs)
        inside = [r for r in rs if r["in_contract"]]
        violations = [r for r in inside if r["outcome"] != "ok"]
        out_fail = sum(not r["in_contract"] and r["outcome"] == "failure" for r in rs)
        out_wrong = sum(not r["in_contract"] and r["outcome"] == "wrong" for r in rs)
        row = {"d": d, "t": cfg.t, "rho": cfg.rho, "mu": cfg.mu, "trials": len(rs), "ok": ok,
               "success_rate": _frac(Fraction(ok, len(rs))), "in_contract": len(inside),
               "contract_violations": len(violations), "out_of_contract_failures": out_fail,
               "out_of_contract_wrong": out_wrong}
        db = Fraction(rs[0]["symbols"], setup.alpha)
        if any(Fraction(r["symbols"], setup.alpha) != db for r in rs):
            report.fail(f"d={d}: download size varies between trials")
        row["DB"] = _frac(db)
        row["CO"] = _frac(db - setup.ell)
        if setup.nested:
            row["CO_formula"] = _frac(d - setup.ell)
        elif d in setup.plan.D:
            co, _ = staircase.overhead(setup.plan, d)
            row["CO_formula"] = _frac(co)
            if co != db - setup.ell:
                report.fail(f"d={d}: measured CO {db - setup.ell} != formula {co}")
        mu = cfg.mu
        if d > 2 * cfg.t + mu:
            bound = staircase.bound_co(setup.ell, d, cfg.t, mu)
            row["CO_bound"] = _frac(bound)
            row["tight"] = db - setup.ell == bound
        if violations:
            report.fail(f"d={d}: {len(violations)} in-contract trials did not recover S "
                        f"(trials {[r['trial'] for r in violations[:5]]})")
        report.rows.append(row)
    report.summary["trials"] = len(recs)
    report.summary["ok"] = sum(r["outcome"] == "ok" for r in recs)
    report.summary["silent_wrong_in_contract"] = sum(r["in_contract"] and r["outcome"] == "wrong"
                                                     for r in recs)


def _checked(cfg):
    errs = cfg.validate()
    if errs:
        raise ValueError("invalid configuration:\n  " + "\n  ".join(errs))


def cmd_simulate(cfg: ExperimentConfig):
    _checked(cfg)
    t0 = time.perf_counter()
    setup = build_setup(cfg)
    report = Report("simulate", cfg.to_dict())
    recs = run_trials(cfg, range(cfg.trials))
    summarize_trials(cfg, setup, recs, report)
    report.timing["seconds"] = round(time.perf_counter() - t0, 3)
    return report, recs


# security ------------------------------------------------------------------------

def _security_pair(setup: Setup):
    if setup.nested:
        return setup.scheme.pair
    chain = setup.scheme.chain
    return codes.CodePair.build(chain.top, chain.code2)


def _all_B(F, mu, n):
    for codes_ in itertools.product(range(F.q), repeat=mu * n):
        yield np.array(codes_, dtype=np.int64).reshape(mu, n)


def cmd_security(cfg: ExperimentConfig):
    """Dimension-based leakage test over B, plus exact MI when affordable."""
    _checked(cfg)
    t0 = time.perf_counter()
    setup = build_setup(cfg)
    T = setup.tower
    pair = _security_pair(setup)
    report = Report("security", cfg.to_dict())
    # both Gabidulin and product pairs have dual relative distance k2 + 1 (in inner units)
    threshold = cfg.k2 + 1
    exhaustive = cfg.exhaustive and T.q ** (cfg.mu * cfg.n) <= EXHAUSTIVE_B_BUDGET
    if exhaustive:
        Bs = _all_B(T.base, cfg.mu, cfg.n)
    else:
        rng = stream(cfg.seed, 0)
        Bs = (T.base.random(rng, (cfg.mu, cfg.n)) for _ in range(cfg.trials))
    want_mi = T.q ** (T.m * pair.k1) <= coset.MI_BUDGET
    stats = {}
    for B in Bs:
        try:
            rep = coset.check_security_linear(pair, B, threshold if cfg.family == "gabidulin" else None)
        except AssertionError as exc:
            report.fail(str(exc))
            continue
        if want_mi:
            rep.mi_logq = coset.mutual_information_exhaustive(pair, B)
            if (rep.mi_logq == 0) != rep.secure:
                report.fail(f"MI {rep.mi_logq} disagrees with the dimension test on B={B.tolist()}")
        st = stats.setdefault(rep.rankB, {"rankB": rep.rankB, "count": 0, "secure": 0,
                                          "mi_zero": 0, "mi_positive": 0, "max_gap": 0})
        st["count"] += 1
        st["secure"] += rep.secure
        st["max_gap"] = max(st["max_gap"], rep.dim_c1b - rep.dim_c2b)
        if rep.mi_logq is not None:
            st["mi_zero" if rep.mi_logq == 0 else "mi_positive"] += 1
        if rep.rankB < threshold and not rep.secure:
            report.fail(f"rank {rep.rankB} observation leaks information")
    report.rows = [stats[k] for k in sorted(stats)]
    report.summary.update(threshold=threshold, exhaustive_B=exhaustive, exact_mi=want_mi,
                          information_rate=_frac(Fraction(setup.ell, cfg.n)))
    report.timing["seconds"] = round(time.perf_counter() - t0, 3)
    return report


# bounds --------------------------------------------------------------------------

def bounds_rows(P: staircase.StaircasePlan, mu=None):
    mu = P.k2 if mu is None else mu
    rows = []
    for d in P.D:
        co, db = staircase.overhead(P, d)
        row = {"d": d, "level": P.level_of(d), "DB": _frac(db), "CO": _frac(co)}
        if d > 2 * P.t0 + mu:
            bound = staircase.bound_co(P.ell, d, P.t0, mu)
            row.update(CO_bound=_frac(bound), tight=co == bound, below_bound=co < bound)
        rows.append(row)
    return rows


def cmd_bounds(cfg: ExperimentConfig):
    _checked(cfg)
    report = Report("bounds", cfg.to_dict())
    setup = build_setup(cfg)
    mu = cfg.mu
    ell_max = staircase.bound_info_rate(cfg.n, cfg.t0, cfg.n - min(cfg.D or [cfg.n]), mu)
    if setup.nested:
        for d in range(cfg.n, setup.scheme.pair.k1 - 1, -1):
            co = Fraction(d - setup.ell)
            row = {"d": d, "DB": _frac(d), "CO": _frac(co)}
            if d > 2 * cfg.t0 + mu:
                b = staircase.bound_co(setup.ell, d, cfg.t0, mu)
                row.update(CO_bound=_frac(b), tight=co == b, below_bound=co < b)
            report.rows.append(row)
    else:
        report.rows = bounds_rows(setup.plan, mu)
    for row in report.rows:
        if row.get("below_bound"):
            report.fail(f"d={row['d']}: CO {row['CO']} below the lower bound {row['CO_bound']}")
    report.summary.update(ell=setup.ell, ell_max=ell_max, rate=_frac(Fraction(setup.ell, cfg.n)),
                          rate_optimal=setup.ell == ell_max,
                          all_tight=all(r.get("tight", False) for r in report.rows))
    if not setup.nested:
        report.summary["plan"] = setup.plan.to_dict()
    return report


# q=256 reference runs ---------------------------------------------------------------

EXAMPLE_BASE = dict(p=2, s=8, m=64, scheme="staircase-gabidulin", n=40, k1=24, k2=8, t0=0,
                    D=[24, 40], mu=8, t=0)


def example_config(which, trials=100, seed=0, workers=0):
    cfg = dict(EXAMPLE_BASE, trials=trials, seed=seed, workers=workers, d=[40, 24])
    if which == 2:
        cfg["crisscross"] = True
    elif which != 1:
        raise ValueError("example must be 1 or 2")
    return ExperimentConfig.from_mapping(cfg)


def cmd_example(which, trials=100, seed=0, workers=0):
    """Full-scale run: q = 256, m = 64, alpha = 32, n = 40.

    Run 1 samples full-rank inner network matrices; run 2 contacts
    column subsets of a storage array (crisscross model).  Each d in D gets
    ``trials`` trials.
    """
    cfg = example_config(which, 2 * trials, seed, workers)
    report, recs = cmd_simulate(cfg)
    report.kind = f"example{which}"
    P = build_setup(cfg).plan
    expect = {40: ("20", "4"), 24: ("24", "8")}
    for row in report.rows:
        db, co = expect[row["d"]]
        if (row["DB"], row["CO"]) != (db, co):
            report.fail(f"d={row['d']}: DB/CO = {row['DB']}/{row['CO']}, expected {db}/{co}")
        if row["ok"] != row["trials"]:
            report.fail(f"d={row['d']}: {row['trials'] - row['ok']} trials failed")
    rate = Fraction(P.ell, P.n)
    report.summary.update(rate=_frac(rate), alpha=P.alpha, ell=P.ell,
                          alpha_list=list(P.alpha_list), p_list=list(P.p_list))
    if rate != Fraction(16, 40):
        report.fail(f"rate {rate} != 16/40")
    return report, recs
