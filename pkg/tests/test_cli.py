import json
import re
import shlex

import pytest

from invpta.cli import main
from invpta.dsl import parse

from conftest import DATA


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def documented(path):
    m = re.search(r"^# command: (.*)$", path.read_text(), re.M)
    return shlex.split(m.group(1).format(file=str(path)))


@pytest.mark.parametrize("name", ["rtp.pta", "fig1.pta", "counters.2cm", "zero_test.2cm"])
def test_bundled_examples_reproduce(capsys, name):
    path = DATA / name
    if name.endswith(".pta"):
        parse(path.read_text())
    code, out, _ = run(capsys, *documented(path))
    assert code == 0
    assert out == (DATA / (name + ".expected")).read_text()


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", str(DATA / "rtp.pta"))
    assert code == 0 and "PTA_I^U: yes" in out


def test_ef_empty_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "ef-empty", str(DATA / "rtp.pta"), "--label", "bug")
    assert code == 0 and out.startswith("nonempty")
    f = tmp_path / "m.pta"
    f.write_text("clocks x; loc a; loc b inv { x < 0 }; init a; edge a -> b;")
    code, out, _ = run(capsys, "ef-empty", str(f), "--goal", "b")
    assert code == 1 and out == "empty\n"


def test_rejected_class(capsys):
    code, _, err = run(capsys, "ef-synth", str(DATA / "fig1.pta"), "--goal", "l3")
    assert code == 3 and "rejected" in err


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["ef-synth", str(DATA / "rtp.pta")])
    assert exc.value.code == 2
    capsys.readouterr()
    f = tmp_path / "bad.pta"
    f.write_text("clocks x; loc a inv { y < 1 }; init a;")
    code, _, err = run(capsys, "classify", str(f))
    assert code == 2 and "1:" in err
    code, _, err = run(capsys, "ef-synth", str(DATA / "rtp.pta"), "--goal", "nowhere")
    assert code == 2
    code, _, _ = run(capsys, "classify", str(tmp_path / "missing.pta"))
    assert code == 2


def test_structured_output(capsys):
    code, out, _ = run(capsys, "ef-synth", str(DATA / "rtp.pta"), "--goal", "askMore_notSending",
                       "--format", "structured")
    doc = json.loads(out)
    assert list(doc) == ["tool", "version", "command", "model_hash", "answer", "timing"]
    a = doc["answer"]
    assert a["constraint"] == "p_s >= 0 & p_v >= 0 & p_send > 0 & p_rced > 0"
    assert a["regions_checked"] == 16 and len(a["regions"]) == 4
    assert all(w["run"][0]["delay"] == "0/1" for w in a["witnesses"])
    assert doc["model_hash"].startswith("sha256:")


def test_too_many_params(capsys):
    code, _, err = run(capsys, "ef-synth", str(DATA / "rtp.pta"), "--goal", "askMore_notSending",
                       "--max-params", "3")
    assert code == 3 and "2^4" in err


def test_parallel_flag(capsys):
    code, out, _ = run(capsys, "ef-synth", str(DATA / "rtp.pta"), "--label", "bug", "--parallel")
    assert out == "p_s >= 0 & p_v >= 0 & p_send > 0 & p_rced > 0\n"


def test_simulate_and_oracle(capsys):
    code, out, _ = run(capsys, "simulate", str(DATA / "rtp.pta"), "--valuation",
                       "p_s=1,p_v=1/2,p_send=1,p_rced=1", "--goal", "askMore_notSending", "--budget", "5000")
    assert code == 0 and out.startswith("run of length")
    code, out, _ = run(capsys, "oracle-reach", str(DATA / "rtp.pta"), "--valuation",
                       "p_s=1,p_v=1,p_send=0,p_rced=1", "--goal", "askMore_notSending")
    assert code == 1 and out == "unreachable\n"


def test_encode_and_random(capsys):
    code, out, _ = run(capsys, "encode-2cm", str(DATA / "counters.2cm"))
    assert code == 0 and parse(out).params == ("a",)
    code, out, _ = run(capsys, "random-model", "--profile", "pta-iu", "--seed", "4")
    assert code == 0 and parse(out)


def test_faithful_run_overflow(capsys, tmp_path):
    f = tmp_path / "m.2cm"
    f.write_text("".join(f"q{i} INC 1 q{i + 1}\n" for i in range(9)) + "HALT q9\n")
    code, _, err = run(capsys, "faithful-run", str(f), "--a", "1/8")
    assert code == 1 and "step 8" in err
