import json

import pytest

from nonlocality.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_oracle_pr_value(capsys):
    code, out, _ = run(capsys, "oracle", "--game", "pr", "--reps", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == "3/4"
    assert payload["replay"] == "3/4"


def test_oracle_chained_and_magic_square(capsys):
    code, out, _ = run(capsys, "oracle", "--game", "chained", "--m", "5")
    assert code == 0 and json.loads(out)["value"] == "9/10"
    code, out, _ = run(capsys, "oracle", "--game", "magic_square")
    assert code == 0 and json.loads(out)["value"] == "8/9"


def test_oracle_marginals(capsys):
    code, out, _ = run(capsys, "oracle", "--marginals")
    assert code == 0
    assert json.loads(out) == {"min": "1/2", "max": "1/2"}


def test_oracle_fine_membership(capsys, tmp_path):
    # the perfect XOR box: uniform over the two winning pairs per input
    p = {}
    for a in range(2):
        for b in range(2):
            for x in range(2):
                p[f"{a},{b},{x},{x ^ (a & b)}"] = "1/2"
    dist = tmp_path / "pr.json"
    dist.write_text(json.dumps({"game": "pr", "p": p}))
    code, out, _ = run(capsys, "oracle", "--fine", str(dist))
    assert code == 0
    payload = json.loads(out)
    assert payload["membership"] == "NonLocal"
    assert payload["value_on_dist"] != payload["vertex_max"]


def test_gen_zeros_header_and_payload(capsys, tmp_path):
    out_file = tmp_path / "zeros.syms"
    code, _, _ = run(capsys, "gen", "--kind", "zeros", "--n", "4", "--out", str(out_file))
    assert code == 0
    raw = out_file.read_bytes()
    assert raw == b"SYMS q=2 n=4\n\x00"


def test_estimate_zeros_low_rate(capsys, tmp_path):
    out_file = tmp_path / "zeros.syms"
    run(capsys, "gen", "--kind", "zeros", "--n", "65536", "--out", str(out_file))
    code, out, _ = run(capsys, "estimate", "--in", str(out_file), "--estimator", "lz78")
    assert code == 0
    assert json.loads(out)["rate"] <= 0.05


def test_play_nosig_and_downstream_testers(capsys, tmp_path):
    a = tmp_path / "a.syms"
    b = tmp_path / "b.syms"
    run(capsys, "gen", "--kind", "random", "--n", "2048", "--seed", "7", "--out", str(a))
    run(capsys, "gen", "--kind", "random", "--n", "2048", "--seed", "8", "--out", str(b))
    code, out, _ = run(
        capsys, "play", "--game", "pr", "--strategy", "nosig", "--eps", "0",
        "--a", str(a), "--b", str(b), "--seed", "9",
        "--out-dir", str(tmp_path), "--stem", "q",
    )
    assert code == 0
    assert json.loads(out)["satisfaction"] == "1/1"
    quad = str(tmp_path / "q.json")
    code, out, _ = run(capsys, "nosig", "--quad", quad, "--estimator", "ctx_2")
    assert code == 0 and json.loads(out)["passes"] is True
    code, out, _ = run(capsys, "locality", "--quad", quad, "--estimator", "ctx_2")
    assert code == 0 and json.loads(out)["verdict"] == "NotWitnessed"


def test_exit_code_usage_error(capsys):
    code, _, _ = run(capsys, "oracle", "--bogus-flag")
    assert code == 1
    code, _, _ = run(capsys, "no-such-subcommand")
    assert code == 1


def test_exit_code_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.syms"
    bad.write_bytes(b"NOT A SYMS FILE")
    code, _, _ = run(capsys, "estimate", "--in", str(bad), "--estimator", "lz78")
    assert code == 2
    missing = tmp_path / "missing.syms"
    code, _, _ = run(capsys, "estimate", "--in", str(missing), "--estimator", "lz78")
    assert code == 2


def test_exit_code_estimator_error(capsys, tmp_path):
    f = tmp_path / "x.syms"
    run(capsys, "gen", "--kind", "zeros", "--n", "16", "--out", str(f))
    code, _, _ = run(capsys, "estimate", "--in", str(f), "--estimator", "nope")
    assert code == 3


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--in", "--estimator", "--cond", "--theta-zero", "--config"):
        assert flag in out


def test_config_roundtrip_reproduces_run(capsys, tmp_path):
    out1 = tmp_path / "r1.jsonl"
    cfg = tmp_path / "cfg.json"
    code, _, _ = run(
        capsys, "exp", "--which", "theorem3", "--m", "8", "--n", "4096",
        "--eps", "1/64", "--estimator", "lz78", "--seed", "11",
        "--out", str(out1), "--emit-config", str(cfg),
    )
    assert code == 0
    first = out1.read_bytes()
    out1.unlink()
    code, _, _ = run(capsys, "exp", "--which", "theorem3", "--config", str(cfg))
    assert code == 0
    assert out1.read_bytes() == first


def test_config_flag_overrides_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"game": "pr", "reps": 1}))
    code, out, _ = run(capsys, "oracle", "--config", str(cfg), "--game", "chained", "--m", "3")
    assert code == 0
    assert json.loads(out)["value"] == "5/6"


def test_exp_writes_report_and_echoes_config(capsys, tmp_path):
    out_file = tmp_path / "r.jsonl"
    csv_file = tmp_path / "r.csv"
    code, _, _ = run(
        capsys, "exp", "--which", "magic_square", "--n", "2048",
        "--estimator", "ctx_2", "--seed", "3",
        "--out", str(out_file), "--csv", str(csv_file),
    )
    assert code == 0
    header = json.loads(out_file.read_text().splitlines()[0])
    assert header["config"]["which"] == "magic_square"
    assert header["config"]["seed"] == "3"
    assert csv_file.read_text().startswith("experiment,quantity,n,value,rate,class")
