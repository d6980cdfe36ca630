"""Batch command line: verification suites, tables and demo traces.

Exit codes: 0 when every assertion passes, 1 on an assertion failure,
2 on usage or budget errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import random
import sys
from dataclasses import dataclass, field

from . import encoding as enc
from . import forcing, oracles, trees
from .budget import EnumBudget
from .errors import (BudgetExceeded, ClaimViolated, HypothesisFails, NoCommonExtension, PredcombError,
                     UnknownSuite, WindowOverflow)
from .seqcore import (TablePredictor, UltWord, check_constant, diagonal_evader, fmt,
                      round_robin_evader, scheduled_blocks)

SUITES = ("claim", "main-theorem", "halving", "coverability", "linked", "sharpness",
          "evasion", "star")


@dataclass
class RunConfig:
    command: str
    target: str
    n: int | None = None
    k: list | None = None
    L: int | None = None
    H: int | None = None
    m0: int = 0
    seed: int = 0
    trials: int | None = None
    predictors: int = 3
    budget: EnumBudget = field(default_factory=EnumBudget)
    fmt: str = "json"
    out: str | None = None

    def params(self, **extra) -> dict:
        base = {"n": self.n, "k": self.k, "L": self.L, "H": self.H, "m0": self.m0,
                "seed": self.seed, "trials": self.trials, "budget": self.budget.max_items}
        base.update(extra)
        return base


def parse_range(text: str) -> list:
    """'2', '1..3' or '1,3' to a list of ints."""
    out = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ValueError(f"empty range {text!r}")
    return out


class Report:
    def __init__(self, suite, cfg: RunConfig):
        self.suite = suite
        self.cfg = cfg
        self.assertions = []

    def check(self, name, ok, **detail):
        self.assertions.append({"name": name, "ok": bool(ok), **detail})
        return ok

    @property
    def ok(self):
        return all(a["ok"] for a in self.assertions)

    def to_dict(self):
        return {"suite": self.suite, "parameters": self.cfg.params(), "seed": self.cfg.seed,
                "ok": self.ok, "assertions": self.assertions}


# -- suites ------------------------------------------------------------------------

def _ks(cfg, default):
    return cfg.k or list(default)


def suite_claim(cfg, rep):
    try:
        _claim_checks(cfg, rep)
    except ClaimViolated as exc:
        rep.check("A-set bound", False, sigma=fmt(exc.sigma), family=repr(exc.family), size=exc.size)


def _claim_checks(cfg, rep):
    b = cfg.budget
    if cfg.n is None and cfg.k is None:
        r = oracles.verify_a_set_bound(2, 1, 3, mode="exhaustive", budget=b)
        rep.check("exhaustive n=2 k=1 depth=3", r["counts"]["violations"] == 0 and r["max_observed"] <= 1,
                  families=r["counts"]["families"], max_observed=r["max_observed"])
        grid = [(2, 2), (3, 2)]
    else:
        grid = [(cfg.n or 2, k) for k in _ks(cfg, [2])]
    for n, k in grid:
        r = oracles.verify_a_set_bound(n, k, cfg.L or 4, trials=cfg.trials or 1000, seed=cfg.seed, budget=b)
        rep.check(f"trials n={n} k={k}", r["counts"]["violations"] == 0 and r["max_observed"] < 1 << k,
                  max_observed=r["max_observed"], sizes=r["counts"]["sizes"], witnesses=r["witnesses"])


def suite_main_theorem(cfg, rep):
    n = cfg.n or 3
    H = cfg.H or 60
    rng = random.Random(cfg.seed)
    for k in _ks(cfg, [2]):
        failures, hyp = [], 0
        for t in range(cfg.trials or 200):
            y = oracles.random_ultword(n, rng)
            fam = enc.LevelTableFamily(y, k)
            try:
                r = enc.verify_main_theorem(y, fam, cfg.m0, H)
            except HypothesisFails:
                hyp += 1
                continue
            if not r:
                failures.append({"trial": t, "y": str(y), "window": r.witness})
        rep.check(f"psi hits every window n={n} k={k} H={H}", not failures and not hyp,
                  trials=cfg.trials or 200, failures=failures[:5], hypothesis_failures=hyp)


def suite_halving(cfg, rep):
    L = cfg.L or 5
    for k in _ks(cfg, [2, 3]):
        for depth in range(1, L + 1):
            r = oracles.verify_halving_all_trees(depth, k)
            rep.check(f"all trees depth={depth} k={k}", r["ok"], trees=r["trees"],
                      classes=r["truncation_classes"], failing=r["failing_classes"])
        small = 4 if k == 2 else 3
        bad = 0
        for S in oracles.all_trees(min(small, L)):
            T = trees.PrefixTree(S)
            if trees.first_overflow(T, k) is not None:
                continue
            pi = trees.build_window_predictor(T, k)
            bad += sum(not check_constant(pi, w, k, 0, len(w)) for w in S if len(w) >= k)
        rep.check(f"literal enumeration depth={min(small, L)} k={k}", bad == 0, failing_branches=bad)
        full = trees.PrefixTree(frozenset(itertools.product((0, 1), repeat=k)))
        try:
            trees.build_window_predictor(full, k)
            raised = False
        except WindowOverflow:
            raised = True
        rep.check(f"full window overflows k={k}", raised)
        cert = oracles.no_full_window_predictor(k, budget=cfg.budget)
        rep.check(f"window certificate k={k}", cert["ok"] and cert["max_hits"] == (1 << k) - 1,
                  fragments=cert["counts"]["fragments"], max_hits=cert["max_hits"])


def suite_coverability(cfg, rep):
    expected = {(2, 1): 1, (2, 2): 3, (2, 3): 7, (3, 2): 5}
    grid = [(cfg.n, k) for k in cfg.k] if cfg.n and cfg.k else sorted(expected)
    for n, k in grid:
        got = trees.max_coverable_size(n, k, cfg.budget)
        want = expected.get((n, k), (1 << k) - 1 if n == 2 else None)
        rep.check(f"max coverable n={n} k={k}", want is None or got == want, value=got, expected=want)
    rng = random.Random(cfg.seed)
    mismatches = 0
    trials = cfg.trials or 200
    for _ in range(trials):
        L = rng.randint(1, 4)
        k = rng.randint(1, 3)
        words = list(itertools.product((0, 1), repeat=L))
        S = rng.sample(words, rng.randint(1, len(words)))
        if trees.is_coverable(S, k)[0] != trees.is_coverable(S, k, mode="brute")[0]:
            mismatches += 1
    rep.check("exact and brute coverability agree", mismatches == 0, trials=trials, mismatches=mismatches)


def suite_linked(cfg, rep):
    rng = random.Random(cfg.seed)
    for k in _ks(cfg, [1, 2, 3]):
        failures = []
        for t in range(cfg.trials or 500):
            ps = oracles.random_bucket_conditions(k, rng)
            try:
                q = forcing.common_extension(ps, cfg.budget)
                ok = forcing.validate_condition(q) and all(forcing.extends(q, p)[0] for p in ps)
            except BudgetExceeded:
                raise
            except PredcombError:
                ok = False
            if not ok:
                failures.append(t)
        rep.check(f"common extension k={k}", not failures, trials=cfg.trials or 500, failures=failures[:10])


def suite_sharpness(cfg, rep):
    for k in _ks(cfg, [1, 2, 3]):
        conds, cert = forcing.sharpness_witness(k, 0, cfg.budget)
        v = oracles.verify_certificate(cert, conds)
        rep.check(f"certificate k={k}", v["ok"], size=v["fragments"], problems=v["problems"])
        try:
            forcing.common_extension(conds, cfg.budget)
            blocked = False
        except NoCommonExtension:
            blocked = True
        rep.check(f"full witness has no extension k={k}", blocked)
        ok = True
        for i in range(len(conds)):
            try:
                forcing.common_extension(conds[:i] + conds[i + 1:], cfg.budget)
            except NoCommonExtension:
                ok = False
        rep.check(f"every proper subfamily extends k={k}", ok)


def suite_evasion(cfg, rep):
    rng = random.Random(cfg.seed)
    bad_diag = bad_rr = 0
    trials = cfg.trials or 500
    for _ in range(trials):
        k = rng.randint(1, 3)
        H = k * rng.randint(1, 48 // k)
        pi = TablePredictor.random(2, rng.randint(1, 8), rng)
        x = diagonal_evader(pi, H)
        bad_diag += any(pi(x.symbols[:i]) == x.symbols[i] for i in range(H))
        preds = [TablePredictor.random(2, rng.randint(1, 8), rng) for _ in range(rng.randint(1, 4))]
        y = round_robin_evader(preds, k, H).symbols
        for s, p in enumerate(preds):
            for t in scheduled_blocks(len(preds), s, k, H):
                bad_rr += any(p(y[:i]) == y[i] for i in range(t * k, (t + 1) * k))
    rep.check("diagonal evader misses everywhere", bad_diag == 0, trials=trials, failures=bad_diag)
    rep.check("round-robin blocks are all-miss", bad_rr == 0, trials=trials, failures=bad_rr)
    for k in _ks(cfg, [1, 2, 3]):
        r = oracles.evasion_uniqueness(k, 4, cfg.budget)
        rep.check(f"window evasion unique k={k}", r["ok"], tables=r["tables"], failures=r["failures"])


def suite_star(cfg, rep):
    rng = random.Random(cfg.seed)
    H = cfg.H or 24
    bad = 0
    trials = cfg.trials or 100
    for _ in range(trials):
        k = rng.randint(1, 3)
        Hk = H - H % k
        pi = TablePredictor.random(2, rng.randint(1, 6), rng)
        g = round_robin_evader([pi], k, Hk).symbols
        word = UltWord((), g, 2)
        phi = trees.phi_from_predictor(pi, k)
        bad += not trees.check_star([word], [phi], k, Hk, Hk // k).ok
        bad += bool(check_constant(pi, word, k, 0, Hk))
    rep.check("phi matches its own evader on every block", bad == 0, trials=trials, failures=bad)


SUITE_FUNCS = {
    "claim": suite_claim, "main-theorem": suite_main_theorem, "halving": suite_halving,
    "coverability": suite_coverability, "linked": suite_linked, "sharpness": suite_sharpness,
    "evasion": suite_evasion, "star": suite_star,
}


def cmd_verify(cfg: RunConfig):
    if cfg.target not in SUITE_FUNCS:
        raise UnknownSuite(cfg.target)
    rep = Report(cfg.target, cfg)
    SUITE_FUNCS[cfg.target](cfg, rep)
    return rep.to_dict(), rep.assertions, rep.ok


# -- tables -----------------------------------------------------------------------

def cmd_table(cfg: RunConfig):
    rows = []
    if cfg.target == "cover":
        n = cfg.n or 2
        Ls = [cfg.L] if cfg.L else [1, 2, 3]
        for L in Ls:
            for k in cfg.k or list(range(1, L + 1)):
                row = {"n": n, "L": L, "k": k}
                try:
                    row["value"] = oracles.exhaustive_cover_number(n, L, k, cfg.budget)
                    row["status"] = "ok"
                except BudgetExceeded as exc:
                    row.update(value=None, status=f"budget: {exc.what}")
                rows.append(row)
    elif cfg.target == "maxcover":
        n = cfg.n or 2
        for k in cfg.k or [1, 2, 3]:
            row = {"n": n, "k": k}
            try:
                row["value"] = trees.max_coverable_size(n, k, cfg.budget)
                row["status"] = "ok"
            except BudgetExceeded as exc:
                row.update(value=None, status=f"budget: {exc.what}")
            rows.append(row)
    elif cfg.target == "buckets":
        total = 0
        for ell in range(0, (cfg.L if cfg.L is not None else 3) + 1):
            keys = 1 << ((1 << (ell + 1)) - 1)
            total += keys
            rows.append({"ell": ell, "keys": keys, "cumulative": total, "status": "ok"})
    else:
        raise UnknownSuite(cfg.target)
    data = {"table": cfg.target, "parameters": cfg.params(), "rows": rows}
    return data, rows, True


# -- demos ------------------------------------------------------------------------

def demo_thm1(cfg):
    n, H = cfg.n or 3, cfg.H or 60
    k = (cfg.k or [2])[0]
    rng = random.Random(cfg.seed)
    y = oracles.random_ultword(n, rng)
    fam = enc.LevelTableFamily(y, k)
    pi = enc.psi(fam)
    ys = y.prefix(H)
    hits = [pi(ys[:i]) == ys[i] for i in range(H)]
    rows = [{"window": a, "hits": [a + i for i in range(k) if hits[a + i]]} for a in range(H - k + 1)]
    onset = 0
    for r in rows:
        if not r["hits"]:
            onset = r["window"] + 1
    summary = f"all windows hit from position {onset}" if onset <= H - k else "some late window missed"
    return {"demo": "thm1", "parameters": cfg.params(), "y": str(y),
            "guaranteed_from": (cfg.m0 + 1) * k, "observed_from": onset,
            "family": repr(fam), "trace": rows, "summary": summary}, rows, onset <= H - k


def demo_evader(cfg):
    k = (cfg.k or [2])[0]
    H = cfg.H or 24
    H -= H % k
    rng = random.Random(cfg.seed)
    preds = [TablePredictor.random(2, 6, rng) for _ in range(cfg.predictors)]
    y = round_robin_evader(preds, k, H).symbols
    rows = []
    for t in range(H // k):
        s = t % len(preds)
        guesses = [preds[s](y[:i]) for i in range(t * k, (t + 1) * k)]
        block = list(y[t * k:(t + 1) * k])
        rows.append({"block": t, "predictor": s, "guesses": fmt(guesses), "word": fmt(block),
                     "all_miss": all(a != b for a, b in zip(guesses, block))})
    ok = all(r["all_miss"] for r in rows)
    return {"demo": "evader", "parameters": cfg.params(predictors=cfg.predictors),
            "word": fmt(y), "trace": rows,
            "summary": f"{len(preds)} predictors, {H // k} all-miss blocks"}, rows, ok


def demo_extension(cfg):
    k = (cfg.k or [2])[0]
    ell = 0
    sigma = {(): 0}
    count = (1 << k) - 1
    words = [UltWord((0,) + pat, (0,), 2) for pat in itertools.product((0, 1), repeat=k)][:count]
    ps = [forcing.PkCondition(k, ell, sigma, (f,)) for f in words]
    q = forcing.common_extension(ps, cfg.budget)
    rows = []
    for f in words:
        fs = f.prefix(q.ell)
        for a in range(ell + 1, q.ell - k + 1):
            hit_at = [i for i in range(a, a + k) if q.sigma[fs[:i]] == fs[i]]
            rows.append({"word": str(f), "window": [a, a + k], "hits": hit_at})
    ok = all(r["hits"] for r in rows)
    return {"demo": "extension", "parameters": cfg.params(),
            "inputs": [p.to_json() for p in ps], "extension": q.to_json(), "m": q.ell,
            "trace": rows, "summary": f"{len(ps)} conditions extended to m={q.ell}"}, rows, ok


DEMOS = {"thm1": demo_thm1, "evader": demo_evader, "extension": demo_extension}


def cmd_demo(cfg: RunConfig):
    if cfg.target not in DEMOS:
        raise UnknownSuite(cfg.target)
    return DEMOS[cfg.target](cfg)


# -- plumbing ---------------------------------------------------------------------

def _csv(rows) -> str:
    buf = io.StringIO()
    fields = sorted({key for r in rows for key in r})
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({key: json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v
                    for key, v in r.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="predcomb", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, choices in (("verify", SUITES), ("table", ("cover", "maxcover", "buckets")),
                          ("demo", tuple(DEMOS))):
        s = sub.add_parser(name)
        s.add_argument("target", choices=choices)
        s.add_argument("--n", type=int)
        s.add_argument("--k", type=parse_range, help="single value or range like 1..3")
        s.add_argument("--L", type=int)
        s.add_argument("--H", type=int)
        s.add_argument("--m0", type=int, default=0)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--trials", type=int)
        s.add_argument("--predictors", type=int, default=3)
        s.add_argument("--budget", type=int, help="max enumeration size (default PREDCOMB_BUDGET)")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, args.target, n=args.n, k=args.k, L=args.L, H=args.H,
                    m0=args.m0, seed=args.seed, trials=args.trials, predictors=args.predictors,
                    budget=EnumBudget(args.budget) if args.budget else EnumBudget(),
                    fmt=args.format, out=args.out)
    handler = {"verify": cmd_verify, "table": cmd_table, "demo": cmd_demo}[cfg.command]
    try:
        data, rows, ok = handler(cfg)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc.what} needs {exc.count} > {exc.limit}", file=sys.stderr)
        return 2
    except (UnknownSuite, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    text = _csv(rows) if cfg.fmt == "csv" else json.dumps(data, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
