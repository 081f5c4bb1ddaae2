"""Operator surface: dispatch, exit codes, manifests, replays."""
import json
import os

import numpy as np
import pytest

from riskshed import cli, fileio
from riskshed.knapsack import KnapsackGenSpec, audit_dimensions, generate_knapsack
from riskshed.model import Scenario, TwoStageProblem


def run(*argv):
    return cli.main(list(argv))


@pytest.fixture
def knap_file(tmp_path):
    path = str(tmp_path / "toy.sp2.json")
    code = run("gen", "knapsack", "--n1", "5", "--n2", "6", "--scens", "3",
               "--seed", "4", "--m1", "3", "--m2", "4", "--out", path)
    assert code == 0
    return path


@pytest.fixture
def mssop_file(tmp_path):
    path = str(tmp_path / "ord.sp2.json")
    code = run("gen", "mssop", "--items", "2", "--periods", "2", "--scens",
               "3", "--seed", "1", "--out", path)
    assert code == 0
    return path


def test_gen_audit_line(tmp_path, capsys):
    path = str(tmp_path / "k.sp2.json")
    assert run("gen", "knapsack", "--n1", "5", "--n2", "6", "--scens", "3",
               "--seed", "4", "--m1", "3", "--m2", "4", "--out", path) == 0
    out = capsys.readouterr().out
    problem = generate_knapsack(KnapsackGenSpec(5, 6, 3, seed=4, m1=3, m2=4))
    v, c, z = audit_dimensions(problem)
    assert f"vars={v} constr={c} nnz={z}" in out
    assert os.path.exists(path)
    assert os.path.exists(path + cli.MANIFEST_SUFFIX)


def test_solve_dep_writes_result_history_manifest(knap_file, tmp_path, capsys):
    out = str(tmp_path / "n.result.json")
    assert run("solve", "--in", knap_file, "--risk", "neutral",
               "--backend", "scipy", "--out", out) == 0
    printed = capsys.readouterr().out
    assert "LB" in printed and "UB" in printed and "Gap(%)" in printed
    doc = fileio.load_result(out)
    assert doc["status"] == "optimal"
    assert doc["method"] == "dep"
    assert doc["risk"]["measure"] == "expectation"
    assert doc["gap_percent"] == 0.0
    assert doc["lower"] == doc["upper"] == doc["objective"]
    assert doc["backend"] == "scipy"
    assert doc["instance"]["checksum"].startswith("sha256:")
    hist = str(tmp_path / "n.history.csv")
    assert os.path.exists(hist)
    assert open(hist).readline().strip() == "iteration,lower,upper,gap,event"
    manifest = cli.load_manifest(out + cli.MANIFEST_SUFFIX)
    assert manifest["subcommand"] == "solve"
    assert manifest["exit_status"] == 0
    assert manifest["config"]["risk"] == "neutral"
    assert knap_file in manifest["inputs"]


def test_solve_methods_agree(knap_file, tmp_path):
    outs = {}
    for tag, extra in (
            ("dep", ["--method", "dep"]),
            ("rm", ["--method", "rm-asd", "--max-iters", "25",
                    "--epsilon", "5.0"])):
        out = str(tmp_path / f"{tag}.result.json")
        code = run("solve", "--in", knap_file, "--risk", "asd", "--rho",
                   "0.5", "--backend", "scipy", "--out", out, *extra)
        assert code == 0
        outs[tag] = fileio.load_result(out)
    dep, rm = outs["dep"], outs["rm"]
    assert rm["status"] == "converged"
    assert rm["lower"] - 1e-6 <= dep["objective"] <= rm["upper"] + 1e-6
    assert rm["upper"] - rm["lower"] <= 5.0 + 1e-6
    assert rm["extras"]["eta_final"] is not None


def test_rm_asd_history_columns(knap_file, tmp_path):
    out = str(tmp_path / "rm.result.json")
    # cap exit (4) is fine here; the artifact format is what matters
    assert run("solve", "--in", knap_file, "--risk", "asd", "--rho", "0.5",
               "--method", "rm-asd", "--backend", "scipy", "--max-iters",
               "10", "--out", out) in (0, 4)
    header = open(str(tmp_path / "rm.history.csv")).readline().strip()
    assert header == ("iteration,eta,lower,upper,gap,s_plus,s_minus,"
                      "cuts_added,wall_time,event")


def test_dispatch_rules_exit_2(knap_file, tmp_path):
    out = str(tmp_path / "x.result.json")
    bad = [
        ["--risk", "neutral", "--rho", "0.5"],          # rho without risk
        ["--risk", "asd"],                               # missing rho
        ["--risk", "asd", "--rho", "1.5"],               # rho out of range
        ["--risk", "ee", "--rho", "0.5"],                # ee needs eta
        ["--risk", "asd", "--rho", "0.5", "--eta", "1"],  # eta not allowed
        ["--risk", "asd", "--rho", "0.5", "--method", "lshaped"],
        ["--risk", "mod-ee", "--rho", "0.5", "--eta", "0",
         "--method", "rm-asd"],
    ]
    for extra in bad:
        assert run("solve", "--in", knap_file, "--out", out, *extra) == 2, extra


def test_missing_input_exits_2(tmp_path):
    out = str(tmp_path / "x.result.json")
    assert run("solve", "--in", str(tmp_path / "nope.sp2.json"),
               "--risk", "neutral", "--out", out) == 2


def test_infeasible_model_exits_3(tmp_path):
    # first stage demands x1 >= 0.6 and x1 <= 0.4 at once
    problem = TwoStageProblem(
        first_stage_cost=np.array([1.0]),
        first_stage_matrix=np.array([[1.0], [-1.0]]),
        first_stage_rhs=np.array([0.6, -0.4]),
        scenarios=[Scenario(probability=1.0, cost=np.array([1.0]),
                            technology=np.zeros((1, 1)),
                            recourse=np.array([[1.0]]),
                            rhs=np.array([0.0]),
                            integrality=np.zeros(1, dtype=bool))],
        first_stage_integrality=np.ones(1, dtype=bool), name="infeas")
    path = str(tmp_path / "bad.sp2.json")
    fileio.save_problem(path, problem=problem, kind="generic-sp2")
    out = str(tmp_path / "bad.result.json")
    assert run("solve", "--in", path, "--risk", "neutral",
               "--backend", "scipy", "--out", out) == 3
    assert fileio.load_result(out)["status"] == "infeasible"


def test_node_cap_exits_4_with_partial_result(knap_file, tmp_path):
    out = str(tmp_path / "cap.result.json")
    code = run("solve", "--in", knap_file, "--risk", "neutral",
               "--backend", "reference", "--node-cap", "1", "--out", out)
    assert code == 4
    doc = fileio.load_result(out)
    assert doc["status"] == "node_cap"
    assert doc["lower"] is not None          # bound survives the cap
    manifest = cli.load_manifest(out + cli.MANIFEST_SUFFIX)
    assert manifest["exit_status"] == 4


def test_simulate_and_report_pipeline(mssop_file, tmp_path, capsys):
    plan = str(tmp_path / "plan.result.json")
    assert run("solve", "--in", mssop_file, "--risk", "neutral",
               "--backend", "scipy", "--mip-gap", "1e-4",
               "--out", plan) == 0
    sim = str(tmp_path / "runs.sim.csv")
    assert run("simulate", "--in", mssop_file, "--plan", plan, "--reps", "3",
               "--seed", "2", "--out", sim) == 0
    line = capsys.readouterr().out.splitlines()[-1]
    assert line.startswith("policy=neutral reps=3")
    agg = str(tmp_path / "agg.csv")
    plots = str(tmp_path / "plots")
    assert run("report", "--inputs", sim, "--out", agg,
               "--plots", plots) == 0
    header = open(agg).readline().strip()
    assert header == ("policy,replications,mean_lost_sales_events,"
                      "mean_lost_sales_quantity,mean_recourse_cost,"
                      "replenishment_cost,mean_total_cost")
    body = open(agg).read().splitlines()[1]
    assert body.startswith("neutral,3,")
    for stem in ("lost_sales_events", "lost_sales_quantity", "total_cost"):
        assert os.path.exists(os.path.join(plots, f"{stem}.png"))


def test_simulate_rejects_wrong_instance(mssop_file, tmp_path):
    other = str(tmp_path / "other.sp2.json")
    assert run("gen", "mssop", "--items", "2", "--periods", "2", "--scens",
               "3", "--seed", "9", "--out", other) == 0
    plan = str(tmp_path / "plan.result.json")
    assert run("solve", "--in", mssop_file, "--risk", "neutral",
               "--backend", "scipy", "--mip-gap", "1e-4",
               "--out", plan) == 0
    sim = str(tmp_path / "bad.sim.csv")
    assert run("simulate", "--in", other, "--plan", plan,
               "--out", sim) == 2


def test_simulate_rejects_knapsack_kind(knap_file, tmp_path):
    plan = str(tmp_path / "plan.result.json")
    assert run("solve", "--in", knap_file, "--risk", "neutral",
               "--backend", "scipy", "--out", plan) == 0
    assert run("simulate", "--in", knap_file, "--plan", plan,
               "--out", str(tmp_path / "s.csv")) == 2


def test_report_rejects_foreign_csv(tmp_path):
    alien = tmp_path / "alien.csv"
    alien.write_text("a,b\n1,2\n")
    assert run("report", "--inputs", str(alien),
               "--out", str(tmp_path / "agg.csv")) == 2


def test_rerun_reproduces_bytes(knap_file, tmp_path):
    out = str(tmp_path / "a" / "asd.result.json")
    os.makedirs(tmp_path / "a")
    assert run("solve", "--in", knap_file, "--risk", "asd", "--rho", "0.5",
               "--backend", "scipy", "--out", out) == 0
    replay_dir = str(tmp_path / "b")
    assert run("rerun", "--manifest", out + cli.MANIFEST_SUFFIX,
               "--out-dir", replay_dir) == 0
    original = open(out, "rb").read()
    replayed = open(os.path.join(replay_dir, "asd.result.json"), "rb").read()
    assert replayed == original


def test_rerun_gen_reproduces_problem_bytes(knap_file, tmp_path):
    replay_dir = str(tmp_path / "c")
    assert run("rerun", "--manifest", knap_file + cli.MANIFEST_SUFFIX,
               "--out-dir", replay_dir) == 0
    replayed = os.path.join(replay_dir, os.path.basename(knap_file))
    assert open(replayed, "rb").read() == open(knap_file, "rb").read()


def test_rerun_rejects_non_manifest(tmp_path, knap_file):
    assert run("rerun", "--manifest", knap_file,
               "--out-dir", str(tmp_path / "d")) == 2


def test_manifest_is_json_with_config(knap_file):
    doc = json.load(open(knap_file + cli.MANIFEST_SUFFIX))
    assert doc["format"] == cli.MANIFEST_FORMAT
    assert doc["config"]["seed"] == 4
    assert doc["outputs"] == [knap_file]
    assert doc["wall_time"] >= 0.0


def test_argparse_rejects_unknown_tokens(tmp_path):
    with pytest.raises(SystemExit) as err:
        run("solve", "--in", "x", "--risk", "cvar", "--out", "y")
    assert err.value.code == 2
    with pytest.raises(SystemExit):
        run("frobnicate")
