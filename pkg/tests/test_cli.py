import subprocess
import sys

import pytest

from ktforge.cli import (
    RunConfig,
    format_config,
    main,
    parse_config,
    parse_noether,
    parse_poly,
    run,
)
from ktforge.errors import ConfigError
from ktforge.gca import Poly
from ktforge.jet import JetContext


def ctx1():
    return JetContext(1, 1, 4)


def test_parse_poly_single_token():
    ctx = ctx1()
    p = parse_poly("u1_xx", ctx)
    assert p == Poly.gen(ctx.reg, ctx.jet(1, (2,)))


def test_parse_poly_with_rational_coefficient():
    ctx = ctx1()
    p = parse_poly("u1_x * u1 + 3", ctx)
    want = (
        Poly.gen(ctx.reg, ctx.jet(1, (1,))) * Poly.gen(ctx.reg, ctx.jet(1, (0,)))
        + 3
    )
    assert p == want
    q = parse_poly("1/2 * u1^2 - x1", ctx)
    assert q.max_poly_degree() == 2


def test_parse_poly_unknown_direction():
    ctx = ctx1()
    with pytest.raises(ConfigError) as err:
        parse_poly("u1_y", ctx, line=4)
    assert "unknown direction" in str(err.value)
    assert "line 4" in str(err.value)


def test_parse_poly_syntax_error_position():
    ctx = ctx1()
    with pytest.raises(ConfigError) as err:
        parse_poly("u1 + + 2", ctx, line=2)
    assert err.value.line == 2


def test_parse_noether_prolongation_pair():
    ctx = ctx1()
    op = parse_noether("Dx F1 - F2", ctx, 2)
    assert op.coeffs[0] == {(1,): Poly.one(ctx.reg)}
    assert op.coeffs[1] == {(0,): -Poly.one(ctx.reg)}


def test_parse_noether_with_coefficient():
    ctx = ctx1()
    op = parse_noether("u1 * Dxx F1 + 2 * F2 - F1", ctx, 2)
    u = Poly.gen(ctx.reg, ctx.jet(1, (0,)))
    assert op.coeffs[0][(2,)] == u
    assert op.coeffs[0][(0,)] == -Poly.one(ctx.reg)
    assert op.coeffs[1][(0,)] == Poly.scalar(ctx.reg, 2)


def test_parse_config_roundtrip():
    text = """
pipeline = resolve
base_dim = 1
fiber_rank = 1
jet_cap = 3
poly_deg_cap = 2
hdeg_max = 2
max_stages = 6
equation = "u1_x"
format = machine
"""
    cfg = parse_config(text)
    assert cfg.pipeline == "resolve"
    assert cfg.equations == ("u1_x",)
    assert parse_config(format_config(cfg)) == cfg


def test_parse_config_roundtrip_with_noether():
    text = (
        "pipeline = kt\njet_cap = 4\n"
        'equation = "u1_x"\nequation = "u1_xx"\n'
        'noether = "Dx F1 - F2"\nout = report.txt\n'
    )
    cfg = parse_config(text)
    assert cfg.noether == ("Dx F1 - F2",)
    assert parse_config(format_config(cfg)) == cfg


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigError) as err:
        parse_config("pipeline = koszul\nbogus = 1\n")
    assert err.value.line == 2


def test_parse_config_semantic_error():
    text = 'pipeline = resolve\nequation = "u1_y"\n'
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert "unknown direction" in str(err.value)


def test_run_koszul_pipeline():
    cfg = RunConfig(pipeline="koszul", base_dim=1, poly_deg_cap=3, hdeg_max=1)
    res = run(cfg)
    assert res.code == 0
    assert "H_0 rank 1" in res.text
    assert "H_1 rank 0" in res.text


def test_run_resolve_pipeline_status():
    cfg = RunConfig(
        pipeline="resolve", base_dim=1, fiber_rank=1, jet_cap=3,
        poly_deg_cap=2, hdeg_max=2, max_stages=6, equations=("u1_x",),
        format="machine",
    )
    res = run(cfg)
    assert res.code == 0
    assert "status resolved" in res.text


def test_run_kt_pipeline_duplicated():
    cfg = RunConfig(
        pipeline="kt", base_dim=1, fiber_rank=1, jet_cap=3,
        poly_deg_cap=2, hdeg_max=1, max_stages=4,
        equations=("u1_x", "u1_x"), noether_order_cap=0, noether_deg_cap=0,
    )
    res = run(cfg)
    assert res.code == 0
    assert "H_1 rank 0" in res.text


def test_cli_main_exit_codes(tmp_path):
    good = tmp_path / "good.cfg"
    good.write_text('equation = "u1_x"\nformat = machine\njet_cap = 3\n')
    out = tmp_path / "report.txt"
    code = main(["resolve", "--config", str(good), "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("ktforge-trace/1")

    bad = tmp_path / "bad.cfg"
    bad.write_text('equation = "u1_y"\n')
    assert main(["resolve", "--config", str(bad)]) == 3

    missing = tmp_path / "nope.cfg"
    assert main(["resolve", "--config", str(missing)]) == 3

    # unresolved in window: zero stages against a real obstruction
    stuck = tmp_path / "stuck.cfg"
    stuck.write_text('equation = "u1_x"\nmax_stages = 0\njet_cap = 3\n')
    assert main(["resolve", "--config", str(stuck)]) == 2


def test_machine_output_byte_identical(tmp_path):
    cfgf = tmp_path / "r.cfg"
    cfgf.write_text('equation = "u1_x"\nformat = machine\njet_cap = 3\n')
    outs = []
    for i in range(2):
        out = tmp_path / f"o{i}.txt"
        assert main(["resolve", "--config", str(cfgf), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_entrypoint_subprocess(tmp_path):
    cfgf = tmp_path / "k.cfg"
    cfgf.write_text("base_dim = 2\npoly_deg_cap = 3\nhdeg_max = 2\n")
    proc = subprocess.run(
        [sys.executable, "-m", "ktforge.cli", "koszul", "--config", str(cfgf)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "H_0 rank 1" in proc.stdout


def test_run_koszul_machine_format():
    cfg = RunConfig(pipeline="koszul", base_dim=2, poly_deg_cap=3, hdeg_max=2,
                    format="machine")
    res = run(cfg)
    lines = res.text.splitlines()
    assert lines[0] == "ktforge-homology/1"
    assert "degree 0 rank 1" in lines
    assert "degree 1 rank 0" in lines
    assert lines[-1] == "end"


def test_run_two_fiber_config():
    cfg = RunConfig(
        pipeline="resolve", base_dim=1, fiber_rank=2, jet_cap=3,
        poly_deg_cap=2, hdeg_max=1, max_stages=8,
        equations=("u1_x", "u2_x"), format="machine",
    )
    res = run(cfg)
    assert res.code == 0
    assert "target-ranks 6 0" in res.text


def test_factorize_demo_pipeline():
    cfg = RunConfig(pipeline="factorize-demo")
    res = run(cfg)
    assert res.code == 0
    assert "status resolved" in res.text


def test_dump_matrices(tmp_path):
    cfg = RunConfig(pipeline="koszul", base_dim=1, poly_deg_cap=2, hdeg_max=1)
    res = run(cfg, dump_matrices=str(tmp_path / "mats"))
    assert res.code == 0
    dumped = (tmp_path / "mats" / "boundary_1.txt").read_text()
    assert dumped.startswith("ktforge-sparse/1")
