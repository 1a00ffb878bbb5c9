import pytest

from pavmc.ctl import AG, EF, And, Atom, Deadlock, Implies, LeadsTo, Not, pretty
from pavmc.kernel import ExprSyntaxError
from pavmc.query import parse_formula, parse_query

SUITE = [
    "E<> MixTeller(0).failed_audit",
    "E<> MixTeller(0).passed_audit",
    "A[] not Voter(0).punished",
    "Voter(0).has_ballot --> Voter(0).marked_choice",
    "A[] ((Sys.results and real) imply E<> (voted_0_1 and initial))",
    "E<> (results and negvoted_0_1 and epist_voted_0_1 and initial)",
    "A<> Sys.results",
    "E[] !deadlock",
    "A[] (mixes <= MT && audited <= mixes)",
    "E( !Sys.results U Sys.results )",
    "EX true",
    "AX (false or Voter(1).chosen == 2)",
    "A[] (Voter(0).punished imply not Voter(0).not_punished)",
]


def test_failed_audit_query():
    q = parse_query("E<> MixTeller(0).failed_audit")
    assert isinstance(q.formula, EF)
    assert isinstance(q.formula.operand, Atom)
    assert q.fragment == "uppaal-fragment"


def test_never_punished_query():
    q = parse_query("A[] not Voter(0).punished")
    assert isinstance(q.formula, AG)
    assert isinstance(q.formula.operand, Not)


def test_leads_to_query():
    q = parse_query("Voter(0).has_ballot --> Voter(0).marked_choice")
    assert isinstance(q.formula, LeadsTo)
    assert q.fragment == "uppaal-fragment"


def test_strong_formula_is_nested():
    q = parse_query("A[] ((Sys.results and real) imply E<> (voted_0_1 and initial))")
    assert q.fragment == "nested-ctl"
    assert isinstance(q.formula.operand, Implies)
    assert isinstance(q.formula.operand.right, EF)


def test_keyword_and_symbol_forms_agree():
    assert parse_formula("A[] not (a and b)") == parse_formula("A[] !(a && b)")
    assert parse_formula("E<> (a or b)") == parse_formula("E<> (a || b)")


def test_deadlock_atom():
    assert parse_formula("A[] not deadlock") == AG(Not(Deadlock()))


def test_conjunction_of_atoms():
    f = parse_formula("E<> (x == 1 and y > 2)")
    assert isinstance(f.operand, (And, Atom))


@pytest.mark.parametrize("text", SUITE)
def test_round_trip(text):
    f = parse_formula(text)
    assert parse_formula(pretty(f)) == f
    assert pretty(parse_formula(pretty(f))) == pretty(f)


@pytest.mark.parametrize("text,where", [
    ("E<> (x", "unbalanced"),
    ("E<> x)", "column"),
    ("--> x", "left operand"),
    ("E<>", "column"),
    ("A[] x ==", "column"),
    ("", "column"),
])
def test_syntax_errors(text, where):
    with pytest.raises(ExprSyntaxError) as exc:
        parse_query(text)
    assert where in str(exc.value)


def test_error_reports_line_and_column():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_query("E<> (a and\n  b))")
    msg = str(exc.value)
    assert "line 2" in msg and "column" in msg
