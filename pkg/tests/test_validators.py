"""
Tests for utils/validators.py: job values checked at the boundary.
"""

import copy
import json
import math

import pytest

from config import DEFAULT_CONFIG_PATH
from utils.validators import expand_grid, validate_job_config, validate_region

with open(DEFAULT_CONFIG_PATH, encoding="utf-8") as _f:
    _DEFAULTS = json.load(_f)


def _job(command, **params):
    parameters = copy.deepcopy(_DEFAULTS[command])
    parameters.update(params)
    parameters["limits"] = copy.deepcopy(_DEFAULTS["limits"])
    return {"command": command, "measure": "measures/two_generator.json",
            "parameters": parameters, "seed": 0, "threads": 1}


# ── expand_grid ───────────────────────────────────────────────────────────────


class TestExpandGrid:
    def test_list(self):
        assert expand_grid([0, 0.5, 2]) == [0.0, 0.5, 2.0]

    def test_linspace(self):
        assert expand_grid({"start": 0.0, "stop": 1.0, "num": 5}) == pytest.approx(
            [0.0, 0.25, 0.5, 0.75, 1.0]
        )

    @pytest.mark.parametrize(
        "spec",
        [
            [],
            [0.0, 0.0],
            [1.0, 0.5],
            [0.0, math.inf],
            ["a"],
            {"start": 0.0, "stop": 1.0},
            {"start": 0.0, "stop": 1.0, "num": 0},
            "0:1:5",
        ],
    )
    def test_rejects(self, spec):
        with pytest.raises(ValueError):
            expand_grid(spec)


# ── validate_region ───────────────────────────────────────────────────────────


class TestValidateRegion:
    def test_ball_ok(self):
        assert validate_region("r", {"kind": "ball", "center": [0, 0, 0], "radius": 1}) == []

    def test_box_ok(self):
        assert validate_region("r", {"kind": "box", "lower": [0, 0, 0],
                                     "upper": [1, 1, 1]}) == []

    def test_ball_problems(self):
        errors = validate_region("r", {"kind": "ball", "center": [0, 0], "radius": -1})
        assert len(errors) == 2

    def test_box_must_be_nondegenerate(self):
        errors = validate_region("r", {"kind": "box", "lower": [0, 0, 0], "upper": [1, 0, 1]})
        assert errors == ["r: upper must exceed lower on every axis"]

    def test_unknown_kind(self):
        assert "kind" in validate_region("r", {"kind": "torus"})[0]

    def test_not_an_object(self):
        assert validate_region("r", [1, 2, 3])


# ── validate_job_config ───────────────────────────────────────────────────────


class TestValidateJobConfig:
    @pytest.mark.parametrize("command", ["rotation-gap", "profile", "verify", "reduce",
                                         "lsg", "oracle"])
    def test_defaults_are_valid(self, command):
        assert validate_job_config(_job(command)) == []

    def test_unknown_command(self):
        job = _job("oracle")
        job["command"] = "plot"
        assert any("command" in e for e in validate_job_config(job))

    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True, None])
    def test_seed(self, seed):
        job = _job("oracle")
        job["seed"] = seed
        assert any(e.startswith("seed") for e in validate_job_config(job))

    def test_threads(self):
        job = _job("oracle")
        job["threads"] = 0
        assert any(e.startswith("threads") for e in validate_job_config(job))

    def test_measure_required(self):
        job = _job("oracle")
        job["measure"] = ""
        assert any(e.startswith("measure") for e in validate_job_config(job))

    def test_measure_traversal(self):
        job = _job("oracle")
        job["measure"] = "../../etc/measure.json"
        assert any("traversal" in e for e in validate_job_config(job))

    def test_band_limits(self):
        errors = validate_job_config(_job("profile", L=65, so3_L=-1))
        assert len(errors) == 2

    def test_optional_band_limit(self):
        assert validate_job_config(_job("rotation-gap", compare_L=None)) == []
        assert validate_job_config(_job("verify", sphere_L=None))

    def test_margin(self):
        assert validate_job_config(_job("reduce", margin=-2))
        assert validate_job_config(_job("reduce", margin=4)) == []

    def test_verify_checks(self):
        assert validate_job_config(_job("verify", checks=[]))
        errors = validate_job_config(_job("verify", checks=["small-x", "spectral-gap"]))
        assert "spectral-gap" in errors[0]

    def test_verify_ranges(self):
        assert validate_job_config(_job("verify", conjugation_radius=[2.0, 1.0]))
        assert validate_job_config(_job("verify", domination_radius=[0.0]))

    def test_verify_c0(self):
        assert validate_job_config(_job("verify", c0=0.0))
        assert validate_job_config(_job("verify", c0=0.05, c0_radii=None)) == []
        assert validate_job_config(_job("verify", c0=None, c0_radii=[]))

    def test_lsg(self):
        errors = validate_job_config(_job(
            "lsg", N=-1, trend_N=[3, 2], region={"kind": "ball", "radius": 1.0},
            compare_region={"kind": "box", "lower": [0, 0, 0], "upper": [1, 1, 1]},
        ))
        assert len(errors) == 3

    def test_positive_numbers(self):
        assert validate_job_config(_job("oracle", x_max=0.0))
        assert validate_job_config(_job("lsg", cond_limit=math.nan))

    def test_mass_rank_tol(self):
        assert validate_job_config(_job("lsg", mass_rank_tol=0.0)) == []
        assert validate_job_config(_job("lsg", mass_rank_tol=1.0)) == [
            "lsg.mass_rank_tol must be a number in [0, 1), got 1.0"
        ]

    def test_limits(self):
        job = _job("oracle")
        job["parameters"]["limits"]["support_cap"] = 0
        assert validate_job_config(job) == [
            "limits.support_cap must be a positive integer, got 0"
        ]

    def test_parameters_must_be_object(self):
        job = _job("oracle")
        job["parameters"] = [1, 2]
        assert validate_job_config(job) == ["parameters must be an object"]
