import numpy as np
import pytest

from adaor import cli
from adaor.model import init_net, load_net
from adaor.task import ID_TOKEN


def run(argv):
    return cli.main(argv)


def test_parse_alphas():
    assert np.allclose(cli.parse_alphas("0:1:6"), [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert cli.parse_alphas("0:0:1") == (0.0,)
    assert cli.parse_alphas("0,0.5,1") == (0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        cli.parse_alphas("0:2:3")
    with pytest.raises(ValueError):
        cli.parse_alphas("1.5")
    with pytest.raises(ValueError):
        cli.parse_alphas("0:1")


def test_usage_errors_exit_1(capsys):
    assert run(["sweep"]) == 1  # missing required flags
    assert run(["train", "--task", "vec", "--out", "x", "--bogus"]) == 1  # unknown flag
    assert run(["nonsense"]) == 1
    capsys.readouterr()


def test_train_writes_checkpoint_and_loss_csv(tmp_path, capsys):
    out = tmp_path / "vec.ckpt"
    argv = ["train", "--task", "vec", "--steps", "60", "--batch", "8", "--seed", "3",
            "--out", str(out)]
    assert run(argv) == 0
    assert out.exists()
    loss_csv = tmp_path / "vec.ckpt.loss.csv"
    assert loss_csv.exists()
    text = loss_csv.read_text()
    assert text.count("\n") >= 61  # config comments + header + 60 rows
    assert "step,loss" in text
    net = load_net(str(out))
    assert net.train_config["steps"] == 60
    assert net.train_config["p_null"] == 0.1

    first = out.read_bytes()
    assert run(argv) == 0
    assert out.read_bytes() == first  # same flags, identical checkpoint bytes
    capsys.readouterr()


def test_train_p_id_zero_leaves_id_row(tmp_path, capsys):
    out = tmp_path / "pid0.ckpt"
    assert run(["train", "--task", "vec", "--steps", "40", "--batch", "8", "--seed", "5",
                "--p-id", "0", "--out", str(out)]) == 0
    net = load_net(str(out))
    fresh = init_net(5, "vec")
    assert np.array_equal(net.embedding.data[ID_TOKEN], fresh.embedding.data[ID_TOKEN])
    capsys.readouterr()


def test_sweep_outputs_and_determinism(tmp_path, quick_vec_ckpt, capsys):
    png = tmp_path / "sweep.png"
    csv = tmp_path / "sweep.csv"
    argv = ["sweep", "--ckpt", quick_vec_ckpt, "--instruction", "GROW",
            "--alphas", "0:1:6", "--w", "3", "--variant", "adaor",
            "--seed", "4", "--case-seed", "2", "--ode-steps", "24",
            "--png", str(png), "--csv", str(csv)]
    assert run(argv) == 0
    assert png.exists() and csv.exists()
    text = csv.read_text()
    assert "alpha,rel_l2_to_source,max_pred_norm" in text
    assert "case2,adaor,sqrt,3,6," in text
    png1, csv1 = png.read_bytes(), csv.read_bytes()
    assert run(argv) == 0
    assert png.read_bytes() == png1 and csv.read_bytes() == csv1
    capsys.readouterr()


def test_sweep_single_alpha_and_unknown_instruction(tmp_path, quick_vec_ckpt, capsys):
    csv = tmp_path / "one.csv"
    assert run(["sweep", "--ckpt", quick_vec_ckpt, "--instruction", "GROW",
                "--alphas", "0:0:1", "--ode-steps", "16", "--csv", str(csv)]) == 0
    assert "alpha,rel_l2_to_source" in csv.read_text()

    code = run(["sweep", "--ckpt", quick_vec_ckpt, "--instruction", "SPARKLE"])
    assert code == 2
    err = capsys.readouterr().err
    assert "SHIFT_RIGHT" in err  # error lists the available vocabulary


def test_eval_report(tmp_path, quick_vec_ckpt, capsys):
    report = tmp_path / "report.csv"
    assert run(["eval", "--ckpt", quick_vec_ckpt, "--n-cases", "2",
                "--variants", "adaor,cfg", "--ode-steps", "16",
                "--report", str(report), "--seed", "1"]) == 0
    lines = report.read_text().splitlines()
    medians = [ln for ln in lines if ln.startswith("median,")]
    assert len(medians) == 2  # one aggregate row per variant
    data = [ln for ln in lines if ln.startswith("case") and not ln.startswith("case_id")]
    assert len(data) == 2 * 4 * 2  # cases x instructions x variants
    out = capsys.readouterr().out
    assert "adaor" in out and "cfg" in out


def test_oracle_id_report(tmp_path, quick_vec_ckpt, capsys):
    report = tmp_path / "oracle.csv"
    assert run(["oracle-id", "--ckpt", quick_vec_ckpt, "--report", str(report),
                "--t-grid", "0.5,0.9", "--n-cases", "8"]) == 0
    text = report.read_text()
    assert "case,t,cosine,rel_l2,norm_law_abs_err" in text
    # analytical branch satisfies the norm law exactly
    for line in text.splitlines():
        if line.startswith(("0,", "1,")):
            assert float(line.split(",")[4]) < 1e-9
    capsys.readouterr()

    # an untrained net still reports and exits 0
    from adaor.model import save_net

    raw = tmp_path / "raw.ckpt"
    save_net(init_net(0, "vec"), str(raw))
    assert run(["oracle-id", "--ckpt", str(raw), "--report", str(tmp_path / "o2.csv"),
                "--n-cases", "4"]) == 0
    capsys.readouterr()


def test_gradcheck_command(capsys):
    assert run(["gradcheck", "--seed", "0", "--coords", "4"]) == 0
    out = capsys.readouterr().out
    assert "gradcheck passed" in out


def test_runtime_errors_exit_2(tmp_path, capsys):
    missing = tmp_path / "missing.ckpt"
    assert run(["sweep", "--ckpt", str(missing), "--instruction", "GROW"]) == 2
    capsys.readouterr()
