"""Acceptance battery: every graded criterion, one verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as
they land; each test prints ``<id> PASS/FAIL (<wall>s/<budget>s): <detail>``
and asserts the verdict.
"""
import pytest

from carlab.acceptance import CRITERIA, run_criterion


def _check(cid):
    verdict = run_criterion(cid)
    print(verdict.line)
    assert not verdict.skipped, verdict.detail
    assert verdict.passed, verdict.detail


def test_criteria_registry_is_complete():
    assert sorted(CRITERIA) == [f"A{i}" for i in range(1, 10)]


def test_a1():
    _check("A1")


def test_a2():
    _check("A2")


def test_a3():
    _check("A3")


def test_a4():
    _check("A4")


def test_a5():
    _check("A5")


def test_a6():
    _check("A6")


def test_a7():
    _check("A7")


def test_a8():
    _check("A8")


def test_a9():
    _check("A9")
