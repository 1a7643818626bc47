import pytest

from bonnet4 import verify


def test_resolve():
    assert verify.resolve("axes") == "axes"
    assert verify.resolve("2") == "axes" and verify.resolve(13) == "determinism"
    with pytest.raises(KeyError):
        verify.resolve("unknown")
    assert list(verify.CASES)[0] == "closed_form" and len(verify.CASES) == 13


def test_convergence_table_rules():
    ok = verify.convergence_table("x", [64, 128, 256], [1e-2, 2.5e-3, 6e-4])
    assert ok["passed"] and ok["ratios"][0] == pytest.approx(4)
    slow = verify.convergence_table("x", [64, 128], [1e-2, 5e-3])
    assert not slow["passed"]
    exact = verify.convergence_table("x", [64, 128], [1e-14, 3e-14])
    assert exact["passed"]
    band = verify.convergence_table("x", [64, 128], [1e-2, 1e-3], band=(3.5, 4.5))
    assert not band["passed"]
    assert not verify.convergence_table("x", [64], [1.0])["passed"]


def test_case_result_checks():
    r = verify.CaseResult("k", 1, "t")
    assert r.check("a", 1.0, 2.0) and r.check("b", 3.0, 2.0, ">=") and r.check("c", "x", "x", "==")
    assert not r.check("d", float("nan"), 1.0)
    assert not r.passed and r.to_dict()["passed"] is False
    with pytest.raises(ValueError):
        r.check("e", 1, 1, "<")


def test_refine_must_be_at_least_two():
    with pytest.raises(ValueError):
        verify.run_case("group", refine=1)


def test_group_case_and_text():
    res = verify.run(["group", "closed_form"], refine=2)
    assert [r.key for r in res] == ["group", "closed_form"] and all(r.passed for r in res)
    text = verify.format_text(res)
    assert text.startswith("[PASS]  9 group")
    rep = verify.report(res, 2)
    assert rep["passed"] and rep["refine"] == 2
