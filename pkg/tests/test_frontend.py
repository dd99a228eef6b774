import os
import random

import pytest

from conftest import LOOPING_TEXT, cl, random_bs_problem
from sclfol.cli import main
from sclfol.frontend import (
    ParseError, ProblemFile, UnsupportedFeature, parse_literal_text,
    parse_native, parse_subst_text, parse_tptp_cnf, problem_to_native,
    problem_to_tptp,
)
from sclfol.terms import Var, variables_of

DATA = os.path.join(os.path.dirname(__file__), "data")


class TestTptp:
    def test_simple_clause(self):
        p = parse_tptp_cnf("cnf(c1, axiom, (P(X) | Q(b))).")
        assert p.clauses == [cl("P(X) | Q(b)")]
        assert p.names == ["c1"]

    def test_equality_rejected(self):
        with pytest.raises(UnsupportedFeature, match="equality"):
            parse_tptp_cnf("cnf(c, axiom, (X = a)).")

    def test_disequality_rejected(self):
        with pytest.raises(UnsupportedFeature, match="equality"):
            parse_tptp_cnf("cnf(c, axiom, (X != a)).")

    def test_include_rejected(self):
        with pytest.raises(UnsupportedFeature, match="include"):
            parse_tptp_cnf("include('Axioms/EQ001-0.ax').")

    def test_fof_rejected(self):
        with pytest.raises(UnsupportedFeature, match="fof"):
            parse_tptp_cnf("fof(f, axiom, ![X]: p(X)).")

    def test_problem_file(self):
        with open(os.path.join(DATA, "bounded_unsat.p")) as handle:
            p = parse_tptp_cnf(handle.read())
        assert p.names == ["c1", "c2", "c3", "c4"]
        assert p.clauses[3] == cl("~P(X) | ~Q(b)")

    def test_roles_other_than_axiom_accepted(self):
        p = parse_tptp_cnf("cnf(goal, negated_conjecture, (~P(a))).")
        assert p.clauses == [cl("~P(a)")]

    def test_parse_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_tptp_cnf("cnf(c1, axiom, (P(X) | )).")
        assert err.value.line == 1
        assert err.value.column > 0

    def test_false_clause(self):
        p = parse_tptp_cnf("cnf(c, axiom, ($false)).")
        assert p.clauses[0].is_empty


class TestNative:
    def test_grow_clause_with_vars_header(self):
        p = parse_native("vars: x\n~P(x) | P(g(x))\n")
        clause = p.clauses[0]
        assert variables_of(clause) == {Var("x")}

    def test_default_convention_lowercase_is_constant(self):
        p = parse_native("~P(x) | P(g(x))\n")
        assert variables_of(p.clauses[0]) == set()

    def test_comments_and_blank_lines(self):
        p = parse_native("# header\n\nP(a) # trailing\n")
        assert p.clauses == [cl("P(a)")]

    def test_empty_file(self):
        assert parse_native("").clauses == []

    def test_looping_scenario_round_trip(self):
        p = parse_native(LOOPING_TEXT)
        printed = problem_to_native(p)
        assert parse_native(printed).clauses == p.clauses

    def test_parse_error(self):
        with pytest.raises(ParseError):
            parse_native("P(a) |\n")


class TestRoundTrip:
    def test_random_problems_both_formats(self):
        rng = random.Random(61)
        for _ in range(30):
            clauses = random_bs_problem(rng)
            problem = ProblemFile(clauses,
                                  [f"c{i + 1}" for i in range(len(clauses))])
            assert parse_native(problem_to_native(problem)).clauses == clauses
            assert parse_tptp_cnf(problem_to_tptp(problem)).clauses == clauses

    def test_literal_and_subst_round_trip(self):
        for text in ("P(g(a),X)", "~Q", "~R(f(X,b))"):
            assert str(parse_literal_text(text)) == text
        for text in ("{}", "{X -> a}", "{X -> g(a,b), Y -> b}"):
            assert str(parse_subst_text(text)) == text


class TestCli:
    E1 = os.path.join(DATA, "bounded_unsat.p")
    GROW = os.path.join(DATA, "growing.p")
    S1 = os.path.join(DATA, "unit_blowup.native")

    def test_unsat_exit_code(self, capsys):
        code = main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "UNSATISFIABLE"

    def test_sat_bounded_exit_code(self, capsys):
        code = main(["--input", self.GROW, "--beta", "P(g(g(a)))",
                     "--precedence", "a<g<P", "--grow", "off"])
        assert code == 1
        assert capsys.readouterr().out.strip() == "SATISFIABLE-BOUNDED"

    def test_grow_refutes_with_stats(self, capsys):
        code = main(["--input", self.GROW, "--beta", "P(g(g(a)))",
                     "--precedence", "a<g<P", "--grow", "1", "--stats"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0] == "UNSATISFIABLE"
        assert "growths=1" in out

    def test_resource_out(self, capsys):
        code = main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R", "--max-steps", "2"])
        assert code == 2
        assert capsys.readouterr().out.strip() == "UNKNOWN(resource)"

    def test_usage_error(self, capsys):
        assert main(["--beta", "R(b)"]) == 64

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.p"
        bad.write_text("cnf(c, axiom, (X = a)).")
        assert main(["--input", str(bad)]) == 65

    def test_native_format_flag(self, capsys):
        code = main(["--input", self.S1, "--format", "native",
                     "--heuristic", "avoid:R"])
        assert code == 0

    def test_proof_model_trace_files(self, tmp_path, capsys):
        proof = tmp_path / "out.proof"
        trace = tmp_path / "out.trace"
        code = main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R",
                     "--proof", str(proof), "--trace", str(trace)])
        assert code == 0
        assert proof.read_text().startswith("learned u1:")
        assert "refutation: clause" in proof.read_text()
        assert trace.read_text().count("\t") > 0

        check = main(["check-proof", "--input", self.E1,
                      "--proof", str(proof)])
        assert check == 0
        assert capsys.readouterr().out.splitlines()[-1] == "PROOF OK"

    def test_model_file_and_check(self, tmp_path, capsys):
        model = tmp_path / "out.model"
        code = main(["--input", self.GROW, "--beta", "P(g(g(a)))",
                     "--precedence", "a<g<P", "--model", str(model)])
        assert code == 1
        text = model.read_text()
        assert text.startswith("# beta: P(g(g(a)))")
        check = main(["check-model", "--input", self.GROW,
                      "--model", str(model)])
        assert check == 0
        assert capsys.readouterr().out.splitlines()[-1] == "MODEL OK"

    def test_check_model_detects_falsification(self, tmp_path, capsys):
        model = tmp_path / "bad.model"
        model.write_text("# beta: P(g(g(a)))\n# ordering: kbo\n"
                         "# precedence: a<g<P\n~P(a)\n")
        check = main(["check-model", "--input", self.GROW,
                      "--model", str(model)])
        assert check == 1
        assert "MODEL FALSIFIES" in capsys.readouterr().out

    def test_check_proof_detects_tampering(self, tmp_path, capsys):
        proof = tmp_path / "out.proof"
        main(["--input", self.E1, "--beta", "R(b)", "--ordering", "lpo",
              "--precedence", "a<b<P<Q<R", "--proof", str(proof)])
        tampered = proof.read_text().replace("{X -> a}", "{X -> b}")
        proof.write_text(tampered)
        capsys.readouterr()
        check = main(["check-proof", "--input", self.E1,
                      "--proof", str(proof)])
        assert check == 1
        assert "PROOF MISMATCH" in capsys.readouterr().out

    def test_byte_identical_outputs(self, tmp_path, capsys):
        outs = []
        for i in (1, 2):
            proof = tmp_path / f"p{i}.proof"
            trace = tmp_path / f"t{i}.trace"
            main(["--input", self.E1, "--beta", "R(b)", "--ordering", "lpo",
                  "--precedence", "a<b<P<Q<R", "--proof", str(proof),
                  "--trace", str(trace)])
            outs.append((proof.read_bytes(), trace.read_bytes()))
        assert outs[0] == outs[1]

    def test_invariant_violation_exit_code(self, capsys, monkeypatch):
        import sclfol.cli as cli_mod

        def boom(*args, **kwargs):
            from sclfol.strategy import InvariantViolation
            raise InvariantViolation("forced")

        monkeypatch.setattr(cli_mod, "run", boom)
        assert main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R"]) == 70


class TestCliModes:
    S1 = os.path.join(DATA, "unit_blowup.native")
    E1 = os.path.join(DATA, "bounded_unsat.p")

    def test_exhaustive_mode_flag(self, capsys):
        code = main(["--input", self.S1, "--format", "native",
                     "--mode", "exhaustive", "--stats"])
        out = capsys.readouterr().out
        assert code == 0
        assert "propagations_R=8" in out

    def test_random_heuristic_with_seed(self, capsys):
        code = main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R",
                     "--heuristic", "random", "--seed", "7"])
        assert code == 0

    def test_full_check_flag(self, capsys):
        code = main(["--input", self.E1, "--beta", "R(b)", "--ordering",
                     "lpo", "--precedence", "a<b<P<Q<R", "--check", "full"])
        assert code == 0

    def test_bad_heuristic_usage_error(self, capsys):
        assert main(["--input", self.E1, "--heuristic", "maximal"]) == 64

    def test_beta_weight_flag(self, capsys):
        code = main(["--input", self.E1, "--beta-weight", "6"])
        assert code == 0
