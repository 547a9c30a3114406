"""End-to-end smoke tests for the Python bindings."""

import json
from pathlib import Path

import pytest

import spsim

MODELS = Path(__file__).resolve().parents[2] / "models"


def demo_text():
    return (MODELS / "demo.spm").read_text()


def test_load_model_properties():
    model = spsim.load_model(demo_text())
    assert model.width == 8
    assert model.height == 5
    assert model.membranes == [1, 2]
    assert "s" in model.symbols
    assert len(model.digest) == 16


def test_run_is_reproducible_and_json():
    model = spsim.load_model(demo_text())
    out1, steps1 = spsim.run(model, steps=6, seed=11)
    out2, steps2 = spsim.run(model, steps=6, seed=11)
    assert out1 == out2
    assert steps1 == steps2 == 6
    state = json.loads(out1)
    assert state["step"] == 6
    assert state["seed"] == 11
    assert state["digest"] == model.digest


def test_step_resume_agree_with_run():
    model = spsim.load_model(demo_text())
    state = model.initial_json(seed=11)
    for _ in range(3):
        state = spsim.step(model, state)
    resumed, executed = spsim.resume(model, state, steps=3)
    assert executed == 3
    full, _ = spsim.run(model, steps=6, seed=11)
    assert resumed == full


def test_quiescence_and_check_step():
    model = spsim.load_model(demo_text())
    state = model.initial_json(seed=3)
    assert not spsim.is_quiescent(model, state)
    assert spsim.check_step(model, state)

    # demo.spm never settles (the duplicator rule keeps firing); a lone
    # walker does, two steps to the east wall.
    walker = spsim.load_model(
        "objects a;\n"
        "membrane 1 size 3x1 {\n"
        "  rule a -> (a)@E;\n"
        "}\n"
        "place a at 1:(0,0);\n"
    )
    final, executed = spsim.run(walker, steps=50, seed=1, quiescence=True)
    assert executed == 2
    assert spsim.is_quiescent(walker, final)


def test_canonical_program_is_idempotent():
    once = spsim.canonical_program(demo_text())
    assert spsim.canonical_program(once) == once


def test_overrides_reach_the_expander():
    text = (MODELS / "micro.spm").read_text()
    base = spsim.load_model(text)
    widened = spsim.load_model(text, overrides={"N_OC": 6})
    assert base.digest != widened.digest
    with pytest.raises(spsim.SpError):
        spsim.load_model(text, overrides={"no_such_knob": 1})


def test_bone_params_and_ground_models():
    params = spsim.BoneParams()
    params.validate()
    assert params.c_max == 100
    assert spsim.macro(params).width == 25
    assert "membrane 2" in spsim.micro_text(params)
    params.n_oc = 3
    with pytest.raises(spsim.SpError):
        params.validate()


def test_coupled_cycle_round_trip():
    params = spsim.BoneParams()
    params.macro_w, params.macro_h = 3, 2
    params.micro_w, params.micro_h = 8, 5
    params.max_sim, params.max_sim_bmu = 2, 4
    params.p_h = 0.0
    params.seed = 12
    density = [[6, 50, 6], [50, 6, 50]]
    report1 = spsim.run_coupled(params, density, p_damage=1.0, cycles=2, threads=2)
    report2 = spsim.run_coupled(params, density, p_damage=1.0, cycles=2, threads=1)
    assert report1 == report2
    report = json.loads(report1)
    assert report["cycles"] == 2
    assert report["initial"] == density
    assert len(report["final"]) == 2
    csv = spsim.density_to_csv(report["final"])
    assert spsim.parse_density_csv(csv) == report["final"]
    art = spsim.render_density(report["final"], params.c_max)
    assert len(art.splitlines()) == 2
