import json
import os

import pytest

from conftest import CORPUS, needs_z3
from stormforge.campaign import (
    CampaignConfig,
    Seed,
    Tally,
    expand_seeds,
    filter_seeds,
    load_config,
    load_seeds,
    run_campaign,
    seed_rng,
    structural_hash,
)
from stormforge.errors import ConfigError
from stormforge.instancegen import Instance
from stormforge.mock import mock_profile
from stormforge.runner import SolverProfile, SolverRunner, z3_profile
from stormforge.smtlib import parse_script


def corpus(*names):
    return [os.path.join(CORPUS, n) for n in names]


def write_cfg(tmp_path, body):
    p = tmp_path / "campaign.ini"
    p.write_text(body)
    return str(p)


def test_load_config_sections(tmp_path, monkeypatch):
    monkeypatch.delenv("STORM_ORACLE", raising=False)
    path = write_cfg(tmp_path, """
[campaign]
seeds = seeds/*.smt2 /abs/x.smt2
out = out
seed = 7   ; master seed
nm = 12
incremental = yes
logic_deny = QF_S, QF_NRA

[oracle]
timeout = 3

[solver:a]
binary = /bin/a
args = --in {file} -q
timeout = 2.5
logics = QF_BV QF_LIA

[solver:b]
binary = /bin/b
pipe_args = none
""")
    cfg = load_config(path)
    assert cfg.seeds == [str(tmp_path / "seeds/*.smt2"), "/abs/x.smt2"]
    assert cfg.out_dir == str(tmp_path / "out")
    assert (cfg.rng_seed, cfg.nm, cfg.incremental) == (7, 12, True)
    assert cfg.logic_deny == ("QF_S", "QF_NRA")
    assert cfg.oracle.timeout == 3
    a, b = cfg.solvers
    assert a.id == "a" and a.args == ("--in", "{file}", "-q") and a.timeout == 2.5
    assert a.logics == ("QF_BV", "QF_LIA")
    assert b.pipe_args is None


def test_overrides_win(tmp_path):
    path = write_cfg(tmp_path, "[campaign]\nseeds = a.smt2\nseed = 1\n[solver:a]\nbinary = /bin/a\n"
                               "[solver:b]\nbinary = /bin/b\n")
    cfg = load_config(path, rng_seed=9, seeds=["x.smt2"], nm=None, solver_ids=["b"])
    assert cfg.rng_seed == 9 and cfg.seeds == ["x.smt2"]
    assert [s.id for s in cfg.solvers] == ["b"]


def test_storm_oracle_env_ignores_section(tmp_path, monkeypatch):
    path = write_cfg(tmp_path, "[campaign]\nseeds = a\n[oracle]\ntimeout = 99\n[solver:a]\nbinary = /bin/a\n")
    monkeypatch.setenv("STORM_ORACLE", "/usr/bin/env z3")
    assert load_config(path).oracle.timeout != 99


@pytest.mark.parametrize("body", [
    "[campaign]\nseeds = a\n",  # no solvers
    "[campaign]\n[solver:a]\nbinary = /bin/a\n",  # no seeds
    "[campaign]\nseeds = a\nbogus = 1\n[solver:a]\nbinary = /bin/a\n",
    "[campaign]\nseeds = a\nnm = many\n[solver:a]\nbinary = /bin/a\n",
    "[campaign]\nseeds = a\n[solver:a]\nargs = {file}\n",
    "[campaign]\nseeds = a\n[solver:a]\nbinary = /bin/a\ncolour = red\n",
    "[campaign]\nseeds = a\nnm_range = 5\n[solver:a]\nbinary = /bin/a\n",
    "[campaign]\nseeds = a\nworkers = 0\n[solver:a]\nbinary = /bin/a\n",
    "not an ini file",
])
def test_config_errors(tmp_path, body):
    with pytest.raises(ConfigError):
        load_config(write_cfg(tmp_path, body))


def test_config_errors_outside_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))
    path = write_cfg(tmp_path, "[campaign]\nseeds = a\n[solver:a]\nbinary = /bin/a\n")
    with pytest.raises(ConfigError):
        load_config(path, solver_ids=["zz"])


def test_expand_and_load_seeds(tmp_path):
    (tmp_path / "d").mkdir()
    (tmp_path / "d" / "ok.smt2").write_text("(declare-fun p () Bool)(assert p)")
    (tmp_path / "d" / "bad.smt2").write_text("(assert (")
    paths = expand_seeds([str(tmp_path / "d"), str(tmp_path / "d" / "*.smt2")])
    assert [os.path.basename(p) for p in paths] == ["bad.smt2", "ok.smt2"]
    seeds = load_seeds(paths + [str(tmp_path / "nope.smt2")])
    assert [s.id for s in seeds] == ["0000-bad", "0001-ok", "0002-nope"]
    assert seeds[0].error and seeds[1].script is not None and seeds[2].error.startswith("unreadable")


def _seed(text, sid="s"):
    return Seed(sid, sid + ".smt2", text, parse_script(text))


def test_filter_seeds_by_logic(make_mock):
    bv = _seed(open(corpus("bv_01.smt2")[0]).read(), "bv")
    strings = _seed(open(corpus("s_01.smt2")[0]).read(), "s")
    prof = SolverProfile("nostr", "/bin/true", logics=("QF_BV", "QF_LIA"))
    assert [s.id for s in filter_seeds([bv, strings], prof)] == ["bv"]
    star = SolverProfile("all", "/bin/true")
    assert [s.id for s in filter_seeds([bv, strings], star, deny=["QF_BV"])] == ["s"]
    assert [s.id for s in filter_seeds([bv, strings], star, allow=["QF_S"])] == ["s"]


def test_filter_probes_unspecified_logic(make_mock):
    nolog = _seed("(declare-fun storm_marker () Int)(assert (> storm_marker 0))(check-sat)", "n")
    assert filter_seeds([nolog], mock_profile(make_mock("unknown-always")))
    # a crashing probe is not a usable answer
    assert not filter_seeds([nolog], mock_profile(make_mock("crash-on-trigger:storm_marker")))
    assert filter_seeds([nolog], mock_profile(make_mock("crash-on-trigger:storm_marker")), probe=False)


def test_seed_rng_is_stable_and_distinct():
    assert seed_rng(0, "a") == seed_rng(0, "a")
    assert len({seed_rng(m, s) for m in range(3) for s in "abc"}) == 9
    assert 0 <= seed_rng(5, "x") < 2 ** 63


def test_structural_hash_ignores_provenance():
    s = parse_script("(declare-fun p () Bool)(assert p)(check-sat)")
    a = Instance.from_script(s, "s1", 1, 1)
    b = Instance.from_script(s, "s2", 2, 9)
    assert a.to_smtlib() != b.to_smtlib()
    assert structural_hash(a) == structural_hash(b)


def test_tally():
    t = Tally()
    for v in ("sat", "sat", "unsat", "timeout"):
        t.add(v)
    assert (t.generated, t.sat, t.unsat, t.timeout) == (4, 2, 1, 1) and t.consistent
    u = Tally()
    u.merge(t)
    u.merge(t)
    assert u.generated == 8 and u.consistent


def _cfg(tmp_path, seeds, solvers, **kw):
    kw.setdefault("nc", 100)
    return CampaignConfig(seeds=seeds, solvers=solvers, out_dir=str(tmp_path / "out"), **kw)


def _rows(cfg):
    with open(os.path.join(cfg.out_dir, "runs.jsonl")) as fh:
        return [json.loads(line) for line in fh]


@needs_z3
def test_clean_campaign_against_z3(tmp_path):
    cfg = _cfg(tmp_path, corpus("uf_01.smt2", "lia_01.smt2", "bv_01.smt2"), [z3_profile()], nm=15)
    rep = run_campaign(cfg)
    assert rep.consistent and rep.n_bugs == 0
    assert rep.oracle_is_target
    total = rep.solver_totals()["z3"]
    assert total.generated == 45 and total.unsat == 0
    rows = _rows(cfg)
    assert len(rows) == 45
    assert {r["seed"] for r in rows} == {"0000-uf_01", "0001-lia_01", "0002-bv_01"}
    assert all("wall_time" not in r for r in rows)
    assert {"seed", "iter", "solver", "verdict", "exit_code", "instance_path"} <= set(rows[0])
    assert os.path.exists(os.path.join(cfg.out_dir, "timings.jsonl"))
    assert "z3" in open(os.path.join(cfg.out_dir, "report.txt")).read()


@needs_z3
def test_mock_campaign_finds_and_minimizes(tmp_path, make_mock):
    mock = mock_profile(make_mock("unsat-on-trigger:storm_marker:2:1"))
    cfg = _cfg(tmp_path, corpus("trigger_01.smt2", "uf_01.smt2"), [mock], nm=40, minimize_nm=40, max_saved=3)
    rep = run_campaign(cfg)
    assert rep.consistent
    assert rep.n_bugs >= 1 and not rep.oracle_is_target
    assert {b["seed_id"] for b in rep.bugs} == {"0000-trigger_01"}
    assert len(rep.bugs) <= 3
    mins = [b for b in rep.bugs if b.get("minimization")]
    assert len(mins) == 1
    m = mins[0]["minimization"]
    assert m["minimized"]["assertions"] <= 3 and m["reproduced"]
    runner = SolverRunner(mock)
    for b in rep.bugs:
        d = os.path.join(cfg.out_dir, "bugs", b["bug_id"])
        saved = json.load(open(os.path.join(d, "report.json")))
        assert saved["bug_id"] == b["bug_id"]
        inst = Instance.from_script(parse_script(open(os.path.join(d, "instance.smt2")).read()))
        assert runner(inst).verdict == b["outcome"]["verdict"] == "unsat"
    assert os.path.exists(mins[0]["minimized_path"])
    unsat_rows = [r for r in _rows(cfg) if r["verdict"] == "unsat"]
    assert len(unsat_rows) == rep.solver_totals()["mock"].unsat >= len(rep.bugs)
    with_path = [r for r in unsat_rows if r["instance_path"]]
    assert len(with_path) == len(rep.bugs)
    assert all(os.path.exists(os.path.join(cfg.out_dir, r["instance_path"])) for r in with_path)


@needs_z3
def test_campaign_is_deterministic(tmp_path, make_mock):
    mock = mock_profile(make_mock("unsat-on-trigger:storm_marker:3:1"))
    outs = []
    for run in ("a", "b"):
        cfg = _cfg(tmp_path / run, corpus("trigger_01.smt2", "lia_02.smt2"), [mock], nm=10, rng_seed=5,
                   minimize=False, workers=2, keep_mutants=True)
        run_campaign(cfg)
        outs.append(cfg.out_dir)
    read = lambda d, *p: open(os.path.join(d, *p), "rb").read()
    assert read(outs[0], "runs.jsonl") == read(outs[1], "runs.jsonl")
    for sid in ("0000-trigger_01", "0001-lia_02"):
        for i in range(10):
            assert read(outs[0], "mutants", sid, f"mutant-{i}.smt2") == read(outs[1], "mutants", sid, f"mutant-{i}.smt2")


@needs_z3
def test_unusable_seeds_are_skipped(tmp_path, make_mock):
    bad = tmp_path / "broken.smt2"
    bad.write_text("(assert (")
    mock = mock_profile(make_mock("unknown-always"), logics=("QF_LIA", "QF_NRA"))
    seeds = corpus("lia_01.smt2", "nra_01.smt2", "s_01.smt2") + [str(bad)]
    rep = run_campaign(_cfg(tmp_path, seeds, [mock], nm=3))
    reasons = {s["seed"]: s["reason"] for s in rep.skipped}
    assert set(reasons) == {"0001-nra_01", "0002-s_01", "0003-broken"}
    assert "filtered" in reasons["0002-s_01"]
    assert list(rep.tallies) == ["0000-lia_01"]
    # unknown on QF_LIA is class C
    assert rep.bugs and all(b["bug_class"] == "C" for b in rep.bugs)


def test_campaign_config_validation():
    with pytest.raises(ConfigError):
        CampaignConfig(seeds=["a"], solvers=[SolverProfile("a", "/bin/a")] * 2, out_dir="x").validate()
    with pytest.raises(ConfigError):
        CampaignConfig(seeds=["a"], solvers=[SolverProfile("a", "/bin/a")], out_dir="x", nm=-1).validate()
