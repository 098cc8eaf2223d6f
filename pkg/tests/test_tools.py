"""
CLI subcommands: reports, statuses and exit codes
"""

import json

import pandas as pd
import pytest
import yaml

import main
from core.revsim import ReversibleCircuit, X
from core.settings import reset_settings
from npcert.instance import path as path_instance
from rectclosure.instance import SepRcdInstance, perfectly_agreeing_instance
from sosround.oracle import basis_mixture
from tools import STATUS_EXIT_CODES, TOOL_REGISTRY

IDENTITY_VERIFIER = {"width": 1, "gates": [], "layout": {"k": 1, "ell": 1, "n0": 0, "nplus": 0, "output": 0}}


def x_verifier(k: int) -> dict:
    """Identity circuit on k one-qubit provers with prover 0 as output"""
    return {"width": k, "gates": [], "layout": {"k": k, "ell": 1, "n0": 0, "nplus": 0, "output": 0}}


def write(tmp_path, name, data) -> str:
    target = tmp_path / name
    target.write_text(json.dumps(data))
    return str(target)


@pytest.fixture
def config_file(tmp_path):
    """Small suite budgets and a log file inside tmp_path"""
    data = {
        "logging": {"level": "WARNING", "file": str(tmp_path / "logs" / "stoqlab.log")},
        "suite": {"random_verifiers": 3, "random_pairs": 2},
        "cleancc": {"sweep_n": 2, "sweep_dG": 2},
    }
    target = tmp_path / "config.yaml"
    target.write_text(yaml.safe_dump(data))
    yield str(target)
    reset_settings()


@pytest.fixture
def cli(config_file):
    def run(*argv: str) -> int:
        return main.main(["--config", config_file, *argv])
    return run


def report(path) -> dict:
    with open(path) as f:
        return json.load(f)


class TestRegistry:
    def test_every_subcommand_has_a_tool(self):
        assert set(TOOL_REGISTRY) == set(main.SUBCOMMANDS)

    def test_exit_codes(self):
        assert {code for code in STATUS_EXIT_CODES.values()} == {0, 1}


class TestCircuit:
    def test_images_and_inverse(self, cli, tmp_path):
        circuit = write(tmp_path, "cnot.json", {"width": 2, "gates": [{"kind": "CNOT", "qubits": [0, 1]}]})
        out = tmp_path / "report.json"
        assert cli("circuit", "--instance", circuit, "--inputs", "10", "01", "--out", str(out)) == 0
        data = report(out)
        assert data["status"] == "SUCCESS"
        assert data["result"]["images"] == {"10": "11", "01": "01"}
        assert data["result"]["bijective"] and data["result"]["inverse_is_identity"]

    def test_malformed_gate(self, cli, tmp_path):
        circuit = write(tmp_path, "bad.json", {"width": 2, "gates": [{"kind": "H", "qubits": [0]}]})
        assert cli("circuit", "--instance", circuit) == 2


class TestVerify:
    """Identity circuit with the witness qubit as output: acceptance 1/2 + 1/2 <X>"""

    def test_plus_witness_accepted(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        witness = write(tmp_path, "w.json", {"width": 1, "subset": [0, 1]})
        out = tmp_path / "report.json"
        code = cli("verify", "--verifier", verifier, "--witness", witness, "--c", "1", "--s", "3/4", "--out", str(out))
        assert code == 0
        data = report(out)
        assert data["status"] == "ACCEPT"
        assert data["result"]["acceptance"]["exact"] == "1"
        assert data["result"]["forms_agree"]

    def test_zero_witness_rejected(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        witness = write(tmp_path, "w.json", {"width": 1, "subset": [0]})
        out = tmp_path / "report.json"
        assert cli("verify", "--verifier", verifier, "--witness", witness, "--c", "1", "--s", "3/4",
                   "--out", str(out)) == 1
        assert report(out)["result"]["acceptance"]["exact"] == "1/2"

    def test_missing_file(self, cli, tmp_path):
        assert cli("verify", "--instance", str(tmp_path / "missing.json")) == 2

    def test_csv_projection(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        witness = write(tmp_path, "w.json", {"width": 1, "subset": [0, 1]})
        table = tmp_path / "report.csv"
        code = cli("verify", "--verifier", verifier, "--witness", witness, "--out", str(tmp_path / "r.json"),
                   "--csv", str(table))
        assert code == 0
        frame = pd.read_csv(table)
        assert frame.loc[0, "command"] == "verify"
        assert "acceptance.float" in frame.columns


class TestSepval:
    def test_remark_value(self, cli, tmp_path):
        out = tmp_path / "report.json"
        assert cli("sepval", "--remark", "--out", str(out)) == 0
        assert report(out)["result"]["value"] == pytest.approx(0.5, abs=1e-6)

    def test_remark_is_not_multiplicative(self, cli, tmp_path):
        out = tmp_path / "report.json"
        assert cli("mult-check", "--remark", "--out", str(out)) == 0
        assert report(out)["result"]["verdict"] == "EXCESS"


class TestUsage:
    """Usage and instance errors exit 2 without a report"""

    @pytest.mark.parametrize("argv", [
        ["np4", "--witness", "uniform"],
        ["birthday", "--n", "365", "--K", "23"],
    ])
    def test_monte_carlo_needs_seed(self, cli, argv, capsys):
        assert cli(*argv) == 2
        assert "--seed" in capsys.readouterr().err

    def test_help(self, cli):
        assert cli("--help") == 0

    def test_unknown_subcommand(self, cli):
        assert cli("nonsense") == 2

    def test_bad_mode(self, cli):
        assert cli("sepval", "--remark", "--mode", "decimal") == 2

    def test_unknown_criterion(self, cli):
        assert cli("suite", "--only", "nonsense") == 2


class TestMonteCarlo:
    def test_birthday_reproducible(self, cli, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["birthday", "--n", "365", "--K", "23", "--trials", "5000", "--seed", "7"]
        assert cli(*argv, "--out", str(first)) == 0
        assert cli(*argv, "--out", str(second), "--workers", "2") == 0
        assert first.read_text() == second.read_text()


class TestSuiteCommand:
    def test_single_criterion(self, cli, tmp_path):
        out = tmp_path / "suite.json"
        assert cli("suite", "--only", "branch_overlap", "--out", str(out)) == 0
        data = report(out)
        assert data["status"] == "PASS"
        assert [row["criterion"] for row in data["result"]["rows"]] == ["branch_overlap"]


class TestProductTest:
    def test_product_state_accepted(self, cli, tmp_path):
        rho = write(tmp_path, "rho.json", {"width": 2, "subset": [0]})
        out = tmp_path / "report.json"
        assert cli("product-test", "--rho", rho, "--k", "2", "--ell", "1", "--out", str(out)) == 0
        data = report(out)["result"]
        assert data["p_prod"]["exact"] == "1"
        assert data["circuit_agrees"]

    def test_bell_state(self, cli, tmp_path):
        rho = write(tmp_path, "bell.json", {"width": 2, "subset": ["00", "11"]})
        out = tmp_path / "report.json"
        assert cli("product-test", "--rho", rho, "--k", "2", "--ell", "1", "--out", str(out)) == 0
        assert report(out)["result"]["acceptance"]["exact"] == "7/8"


class TestSymmetrize:
    def test_length_efficient(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", x_verifier(2))
        factors = write(tmp_path, "f.json", {"factors": [{"width": 1, "subset": [0, 1]}, {"width": 1, "subset": [0]}]})
        out = tmp_path / "report.json"
        code = cli("symmetrize", "--kind", "length-efficient", "--verifier", verifier, "--factors", factors,
                   "--c", "1", "--s", "1/2", "--bundles", "1", "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["analytic_acceptance"]["exact"] == "3/4"
        assert data["table_acceptance"]["exact"] == "3/4"

    def test_projector_on_tensor_power(self, cli, tmp_path):
        tilted = {"width": 1, "amplitudes": {"0": "3/5", "1": "4/5"}}
        factors = write(tmp_path, "f.json", {"factors": [tilted, tilted]})
        out = tmp_path / "report.json"
        code = cli("symmetrize", "--kind", "projector", "--factors", factors, "--k", "2", "--ell", "1", "--b", "0",
                   "--out", str(out))
        assert code == 0
        assert report(out)["result"]["circuit_acceptance"]["exact"] == "1"

    def test_sym_to_stoq_keeps_completeness(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", x_verifier(2))
        plus = {"width": 1, "subset": [0, 1]}
        factors = write(tmp_path, "f.json", {"factors": [plus, plus]})
        out = tmp_path / "report.json"
        code = cli("symmetrize", "--kind", "sym-to-stoq", "--verifier", verifier, "--factors", factors,
                   "--c", "1", "--s", "1/2", "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["construction"]["completeness"] == "1"
        assert data["acceptance"]["exact"] == "1"

    def test_needs_thresholds(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", x_verifier(2))
        assert cli("symmetrize", "--verifier", verifier) == 2


class TestCompress:
    def test_circuit_matches_mixture(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", x_verifier(3))
        rho = write(tmp_path, "rho.json", {"width": 3, "subset": [0, 1, 2, 3]})
        out = tmp_path / "report.json"
        code = cli("compress", "--verifier", verifier, "--rho", rho, "--c", "1", "--s", "1/2", "--lambda", "1/4",
                   "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["lambda"]["exact"] == "1/4"
        assert data["circuit_acceptance"] == data["analytic_acceptance"]

    def test_two_provers_rejected(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", x_verifier(2))
        assert cli("compress", "--verifier", verifier, "--c", "1", "--s", "1/2") == 2


class TestRepeat:
    def test_weak_law(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        witness = write(tmp_path, "w.json", {"width": 1, "subset": [0, 1]})
        out = tmp_path / "report.json"
        code = cli("repeat", "--kind", "weak", "--verifier", verifier, "--witness", witness, "--copies", "2",
                   "--c", "1", "--s", "3/4", "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["law"]["exact"] == "1"
        assert data["circuit_acceptance"]["exact"] == "1"
        assert "thresholds" in data

    def test_strong_law(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        witness = write(tmp_path, "w.json", {"width": 1, "subset": [0]})
        out = tmp_path / "report.json"
        code = cli("repeat", "--kind", "strong", "--verifier", verifier, "--witness", witness, "--copies", "3",
                   "--out", str(out))
        assert code == 0
        assert report(out)["result"]["law"]["exact"] == "1/2"

    def test_copies_positive(self, cli, tmp_path):
        verifier = write(tmp_path, "v.json", IDENTITY_VERIFIER)
        assert cli("repeat", "--verifier", verifier, "--copies", "0") == 2


class TestConstraintGraphs:
    """Both protocols on a single equality edge"""

    def test_np4_honest_exact(self, cli, tmp_path):
        instance = write(tmp_path, "edge.json", path_instance(2).to_dict())
        out = tmp_path / "report.json"
        code = cli("np4", "--instance", instance, "--witness", "honest", "--labeling", "0", "0", "--K", "2",
                   "--seed", "1", "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["branch_acceptance"]["exact"]
        assert data["branch_acceptance"]["exact_value"] == "1/2"
        assert data["stoquastic_acceptance"]["exact"] == "3/4"

    def test_np4_float_reports_are_byte_identical(self, cli, tmp_path):
        instance = write(tmp_path, "path.json", path_instance(3).to_dict())
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["np4", "--instance", instance, "--witness", "uniform", "--K", "8", "--trials", "2000",
                "--seed", "5", "--mode", "float"]
        cli(*argv, "--out", str(first))
        cli(*argv, "--out", str(second), "--workers", "2")
        assert not report(first)["result"]["branch_acceptance"]["exact"]
        assert first.read_text() == second.read_text()

    def test_np5_honest_with_circuit(self, cli, tmp_path):
        instance = write(tmp_path, "edge.json", path_instance(2).to_dict())
        out = tmp_path / "report.json"
        code = cli("np5", "--instance", instance, "--witness", "honest", "--labeling", "0", "0", "--circuit",
                   "--out", str(out))
        assert code == 0
        data = report(out)["result"]
        assert data["rejection"]["exact"] == "1/4"
        assert data["circuit_acceptance"]["exact"] == data["acceptance"]["exact"]

    def test_np5_bad_labeling(self, cli, tmp_path):
        instance = write(tmp_path, "edge.json", path_instance(2).to_dict())
        assert cli("np5", "--instance", instance, "--labeling", "0", "0", "0") == 2


class TestRectClosure:
    def test_agreeing_instance_accepted(self, cli, tmp_path):
        instance = write(tmp_path, "rect.json", perfectly_agreeing_instance(2, 1, 1, [0, 1], [2]).to_dict())
        out = tmp_path / "report.json"
        assert cli("rect-closure", "--instance", instance, "--gamma", "0.5", "--rectangles", "--out", str(out)) == 0
        data = report(out)
        assert data["status"] == "ACCEPT"
        assert data["result"]["rectangle_value_max"] == pytest.approx(1.0)

    def test_always_bad_rejected(self, cli, tmp_path):
        instance = write(tmp_path, "rect.json", SepRcdInstance(ReversibleCircuit(3, (X(2),)), 1, 1, 0).to_dict())
        out = tmp_path / "report.json"
        assert cli("rect-closure", "--instance", instance, "--recursive", "--rounds", "3", "--out", str(out)) == 1
        assert report(out)["status"] == "REJECT"

    def test_certified_no_instance(self, cli, tmp_path):
        instance = write(tmp_path, "rect.json", SepRcdInstance(ReversibleCircuit(3, (X(2),)), 1, 1, 0).to_dict())
        out = tmp_path / "report.json"
        assert cli("rect-closure", "--instance", instance, "--certify", "--out", str(out)) == 1
        assert report(out)["result"]["soundness"]["certified"]


class TestSosRound:
    def test_two_point_rounding(self, cli, tmp_path):
        oracle = write(tmp_path, "oracle.json", basis_mixture(3, 2, [0, 1], [0.5, 0.5]).to_dict())
        matrix = write(tmp_path, "m.json", {"dims": [3, 3], "entries": [[1 / 9] * 9 for _ in range(9)]})
        out = tmp_path / "report.json"
        assert cli("sos-round", "--oracle", oracle, "--matrix", matrix, "--epsilon", "0.5", "--out", str(out)) == 0
        data = report(out)["result"]
        assert data["rounding"]["rounds"] == 1
        assert data["rounding"]["value"] == pytest.approx(1 / 9)
        assert data["decrement"]["holds"]


class TestCleancc:
    def test_no_instance_with_sweep(self, cli, tmp_path):
        instance = write(tmp_path, "edge.json", {"n": 1, "dG": 1, "edges": [[0, 1]], "marked": [0]})
        out = tmp_path / "report.json"
        assert cli("cleancc", "--instance", instance, "--simulate", "--sweep", "--out", str(out)) == 1
        data = report(out)
        assert data["status"] == "REJECT"
        assert not data["result"]["yes_instance"]
        assert data["result"]["optimum"]["value"] <= float(data["result"]["soundness_bound"]["float"])
        assert data["result"]["simulated_acceptance"]["float"] == pytest.approx(data["result"]["optimum"]["value"])
        assert data["result"]["sweep"]["holds"]
        assert (data["result"]["sweep"]["n"], data["result"]["sweep"]["dG"]) == (2, 2)

    def test_clean_path_accepted(self, cli, tmp_path):
        instance = write(tmp_path, "path.json", {"n": 2, "dG": 2, "edges": [[0, 1], [1, 2]], "marked": [3]})
        out = tmp_path / "report.json"
        assert cli("cleancc", "--instance", instance, "--simulate", "--out", str(out)) == 0
        data = report(out)["result"]
        assert data["yes_instance"]
        assert data["simulated_acceptance"]["exact"] == "1"

    def test_malformed_edges(self, cli, tmp_path):
        instance = write(tmp_path, "bad.json", {"n": 1, "dG": 1, "edges": [[0, 5]]})
        assert cli("cleancc", "--instance", instance) == 2
