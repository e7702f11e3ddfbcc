"""Smoke tests for the Python bindings.

These exercise the public module surface end to end: solving a runspec,
auditing the returned trajectories, running the property checker, the cyclic
calculus helpers, the scalar diode resolvent, and the exception hierarchy.
"""

import json
import math

import numpy as np
import pytest

import monoport


RC_PARALLEL = {
    "schema_version": 1,
    "root": {
        "type": "parallel",
        "children": [
            {"type": "element", "kind": "resistor", "resistance": 1.0},
            {"type": "element", "kind": "capacitor", "capacitance": 1.0},
        ],
    },
}

NEGATIVE_SLOPE = {
    "schema_version": 1,
    "root": {
        "type": "element",
        "kind": "piecewise",
        "points": [[-2.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [2.0, 1.0]],
    },
}

RUNSPEC = {
    "schema_version": 1,
    "netlist": RC_PARALLEL,
    "drive": {
        "kind": "current",
        "tones": [{"amplitude": 1.0, "frequency": 1.0}],
    },
    "discretization": {"n_steps": 200, "period_seconds": 1.0},
    "solver": {"algorithm": "auto", "tol": 1e-10, "max_iter": 20000},
}


def test_version_and_schema():
    assert monoport.__version__ == "1.0.0"
    assert monoport.SCHEMA_VERSION == 1
    text = monoport.schema_text()
    assert "netlist" in text and "runspec" in text and "resistor" in text


def test_solve_returns_trajectories():
    result = monoport.solve(json.dumps(RUNSPEC))
    assert result["converged"] is True
    t = np.asarray(result["t"])
    i = np.asarray(result["current"])
    v = np.asarray(result["voltage"])
    assert t.shape == i.shape == v.shape == (200,)
    assert result["period"] == pytest.approx(1.0)
    # The drive comes back unchanged on the current side.
    assert i == pytest.approx(np.sin(2.0 * np.pi * t), abs=1e-12)
    # The RC response matches the phasor amplitude to discretization error.
    z_mag = 1.0 / math.hypot(1.0, 2.0 * math.pi)
    assert np.abs(v).max() == pytest.approx(z_mag, rel=0.05)
    assert isinstance(result["algorithm"], str)
    # A current drive into this linear network resolves by closed
    # evaluation, so the residual history is legitimately empty.
    assert isinstance(result["residuals"], list)


def test_iterative_solve_reports_history():
    # A rectifier under voltage drive has no closed evaluation path, so the
    # solver must iterate and report its residual history.
    spec = {
        "schema_version": 1,
        "netlist": {
            "schema_version": 1,
            "root": {
                "type": "series",
                "children": [
                    {
                        "type": "element",
                        "kind": "diode",
                        "saturation_current": 1e-14,
                        "ideality": 1.0,
                        "thermal_voltage": 0.02585,
                    },
                    RC_PARALLEL["root"],
                ],
            },
        },
        "drive": {"kind": "voltage", "tones": [{"amplitude": 1.0, "frequency": 1.0}]},
        "discretization": {"n_steps": 200, "period_seconds": 1.0},
        "solver": {"algorithm": "auto", "tol": 1e-8, "max_iter": 100000},
    }
    result = monoport.solve(json.dumps(spec))
    assert result["converged"] is True
    assert len(result["residuals"]) >= 1
    i = np.asarray(result["current"])
    # Rectification: appreciable forward current, negligible reverse current.
    assert i.max() > 0.1
    assert i.min() > -1e-9


def test_audit_accepts_solved_trajectories():
    result = monoport.solve(json.dumps(RUNSPEC))
    audit = monoport.audit(
        json.dumps(RC_PARALLEL),
        np.asarray(result["current"]),
        np.asarray(result["voltage"]),
        period=1.0,
    )
    assert audit["worst"] < 1e-8
    paths = [row["path"] for row in audit["branches"]]
    assert "root" in paths and len(paths) == 3


def test_calculus_round_trip():
    rng = np.random.default_rng(11)
    u = rng.uniform(-1.0, 1.0, 64)
    u[-1] = 0.0
    du = monoport.derivative(u, period=1.0)
    assert abs(np.mean(du)) < 1e-12
    back = monoport.integral(du, period=1.0)
    assert np.linalg.norm(back - u) < 1e-12 * max(1.0, np.linalg.norm(u))


def test_integral_rejects_dc():
    with pytest.raises(monoport.DomainViolation):
        monoport.integral(np.ones(16), period=1.0)


def test_diode_resolvent_solves_its_equation():
    z, lam = 0.7, 2.5
    x = monoport.diode_resolvent(z, lam, 1e-12, 1.0, 0.025852)
    v = 1.0 * 0.025852 * math.log1p(x / 1e-12)
    assert x + lam * v == pytest.approx(z, abs=1e-10)


def test_check_flags_negative_slope():
    report = monoport.check(json.dumps(NEGATIVE_SLOPE), trials=200)
    assert report["passed"] is False
    assert report["exit_code"] == 1
    assert "FAIL" in report["table"]


def test_check_passes_rc():
    report = monoport.check(json.dumps(RC_PARALLEL), trials=200)
    assert report["passed"] is True
    assert "PASS" in report["table"]


def test_normalize_is_canonical():
    once = monoport.normalize_netlist(json.dumps(RC_PARALLEL))
    assert monoport.normalize_netlist(once) == once


def test_validate_raises_schema_errors():
    bad = {"schema_version": 1, "root": {"type": "series", "children": []}}
    with pytest.raises(monoport.MonoportError):
        monoport.validate_netlist(json.dumps(bad))


def test_exception_hierarchy():
    assert issubclass(monoport.ConfigError, monoport.MonoportError)
    assert issubclass(monoport.DivergenceError, monoport.NumericalError)
    assert issubclass(monoport.NumericalError, monoport.MonoportError)
    with pytest.raises(monoport.MonoportError):
        monoport.solve("{not json")
