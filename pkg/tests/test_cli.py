import numpy as np
import pytest

from prc.cli import gaussian_budget, main
from prc.f2core import BitVector
from prc.fixtures import zero_bit_fixture
from prc.serialize import deserialize_codeword, serialize_codeword

TINY = ["--n", "128", "--r", "64", "--d", "4", "--t", "2",
        "--eta", "1/10", "--zeta", "3/20", "--delta", "1/20"]


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def fields(text: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def zero_keys(tmp_path, capsys):
    prefix = tmp_path / "z"
    code, out, _ = run(capsys, "keygen", "--scheme", "zero-bit", *TINY, "--seed", 5, "--out", prefix)
    assert code == 0
    return prefix


def test_keygen_is_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert run(capsys, "keygen", "--scheme", "single-bit", *TINY, "--seed", 9,
                   "--out", tmp_path / name)[0] == 0
    for ext in (".sk", ".pk"):
        assert (tmp_path / f"a{ext}").read_bytes() == (tmp_path / f"b{ext}").read_bytes()
    run(capsys, "keygen", "--scheme", "single-bit", *TINY, "--seed", 10, "--out", tmp_path / "c")
    assert (tmp_path / "a.sk").read_bytes() != (tmp_path / "c.sk").read_bytes()


def test_keygen_report(tmp_path, capsys):
    code, out, _ = run(capsys, "keygen", "--scheme", "zero-bit", *TINY, "--seed", 1,
                       "--out", tmp_path / "k")
    f = fields(out)
    assert code == 0 and f["RESULT"] == "pass"
    assert (f["n"], f["r"], f["flip_budget"], f["length"]) == ("128", "64", "6", "128")
    assert float(f["threshold"]) == pytest.approx((0.5 - 0.15) * 64)


def test_encode_decode_roundtrip(zero_keys, tmp_path, capsys):
    cw = tmp_path / "c.bin"
    code, out, _ = run(capsys, "encode", "--key", f"{zero_keys}.pk", "--message", "1",
                       "--out", cw, "--seed", 2)
    assert code == 0 and fields(out)["length"] == "128"
    code, out, _ = run(capsys, "decode", "--key", f"{zero_keys}.sk", "--codeword", cw)
    assert code == 0 and out.strip() == "1"


def test_random_file_decodes_to_bot(tmp_path, capsys):
    prefix = tmp_path / "s"
    run(capsys, "keygen", "--scheme", "single-bit", "--n", 512, "--r", 256, "--d", 8, "--t", 2,
        "--eta", "1/20", "--zeta", "17/100", "--delta", "1/20", "--seed", 3, "--out", prefix)
    rng = np.random.default_rng(4)
    bots = 0
    for i in range(20):
        path = tmp_path / f"r{i}"
        path.write_bytes(serialize_codeword(BitVector.random(512, rng)))
        code, out, _ = run(capsys, "decode", "--key", f"{prefix}.sk", "--codeword", path)
        assert code == 0
        bots += out.strip() == "BOT"
    assert bots >= 19


def test_multibit_hex_message(tmp_path, capsys):
    prefix = tmp_path / "m"
    assert run(capsys, "keygen", "--scheme", "sk-rate", "--lam", 16, "--ecc", "rep:k=16:l=5",
               "--seed", 6, "--out", prefix)[0] == 0
    cw = tmp_path / "cw"
    assert run(capsys, "encode", "--key", f"{prefix}.sk", "--message", "a5f0", "--out", cw,
               "--seed", 7)[0] == 0
    code, out, _ = run(capsys, "decode", "--key", f"{prefix}.sk", "--codeword", cw)
    assert (code, out.strip()) == (0, "a5f0")
    assert run(capsys, "encode", "--key", f"{prefix}.sk", "--message", "a5", "--out", cw)[0] == 2
    assert run(capsys, "encode", "--key", f"{prefix}.sk", "--message", "zz", "--out", cw)[0] == 2


def test_usage_errors_exit_2(zero_keys, tmp_path, capsys):
    cw = tmp_path / "c"
    assert run(capsys, "encode", "--key", f"{zero_keys}.pk", "--message", "0", "--out", cw)[0] == 2
    run(capsys, "encode", "--key", f"{zero_keys}.pk", "--message", "1", "--out", cw)
    assert run(capsys, "decode", "--key", f"{zero_keys}.pk", "--codeword", cw)[0] == 2
    assert run(capsys, "decode", "--key", tmp_path / "missing", "--codeword", cw)[0] == 2
    assert run(capsys, "keygen", "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_single_bit_rejects_large_delta(tmp_path, capsys):
    code, _, err = run(capsys, "keygen", "--scheme", "single-bit", "--delta", "0.3",
                       "--out", tmp_path / "s")
    assert code == 2 and "delta" in err
    assert not (tmp_path / "s.sk").exists()


def test_corrupt_inputs_exit_3(zero_keys, tmp_path, capsys):
    sk = f"{zero_keys}.sk"
    cw = tmp_path / "c"
    run(capsys, "encode", "--key", f"{zero_keys}.pk", "--message", "1", "--out", cw)
    data = cw.read_bytes()

    short = tmp_path / "short"
    short.write_bytes(data[:-3])
    assert run(capsys, "decode", "--key", sk, "--codeword", short)[0] == 3

    wrong_len = tmp_path / "wrong"
    wrong_len.write_bytes(serialize_codeword(deserialize_codeword(data).slice(0, 100)))
    assert run(capsys, "decode", "--key", sk, "--codeword", wrong_len)[0] == 3

    magic = tmp_path / "magic"
    magic.write_bytes(b"JUNK" + data[4:])
    assert run(capsys, "decode", "--key", sk, "--codeword", magic)[0] == 3

    bad_key = tmp_path / "bad.sk"
    bad_key.write_bytes(zero_keys.with_name("z.sk").read_bytes()[:50])
    assert run(capsys, "decode", "--key", bad_key, "--codeword", cw)[0] == 3


def test_verify_key(zero_keys, tmp_path, capsys):
    code, out, _ = run(capsys, "verify-key", "--key", f"{zero_keys}.sk")
    assert code == 0 and fields(out)["HG_zero[0]"] == "1"
    prefix = tmp_path / "s"
    run(capsys, "keygen", "--scheme", "single-bit", *TINY, "--seed", 1, "--out", prefix)
    code, out, _ = run(capsys, "verify-key", "--key", f"{prefix}.sk")
    f = fields(out)
    assert code == 0 and f["G_full_rank[0]"] == f["G_full_rank[1]"] == "1"


def test_analyze_checks(capsys):
    code, out, _ = run(capsys, "analyze", "omar", "--cases", 30, "--seed", 1)
    assert code == 0 and fields(out)["RESULT"] == "pass"
    code, out, _ = run(capsys, "analyze", "johnson", "--cases", 30, "--seed", 1)
    assert code == 0 and fields(out)["verdict"] == "pass"
    code, out, _ = run(capsys, "analyze", "chernoff")
    assert code == 0 and fields(out)["exponent"] == "64"


def test_failed_check_exits_1(capsys):
    # the floor check at its default bar of 1/2 misses on about a third of codes
    code, out, _ = run(capsys, "analyze", "floor", "--cases", 60, "--seed", 14)
    assert code == 1 and fields(out)["RESULT"] == "fail"


def test_analyze_is_reproducible(capsys):
    a = run(capsys, "analyze", "rlc", "--n", 256, "--d", 4, "--cases", 20, "--seed", 3)[1]
    b = run(capsys, "analyze", "rlc", "--n", 256, "--d", 4, "--cases", 20, "--seed", 3)[1]
    assert a == b


def test_game_and_attack_commands(tmp_path, capsys):
    prefix = tmp_path / "s"
    run(capsys, "keygen", "--scheme", "single-bit", "--n", 512, "--r", 256, "--d", 8, "--t", 2,
        "--eta", "1/20", "--zeta", "17/100", "--delta", "1/20", "--seed", 3, "--out", prefix)
    code, out, _ = run(capsys, "game", "robust-sk", "--key", f"{prefix}.sk", "--adversary",
                       "replay", "--trials", 5, "--seed", 1)
    assert code == 0 and fields(out)["wins"] == "0"
    code, out, _ = run(capsys, "attack", "quarter", "--key", f"{prefix}.sk", "--trials", 5,
                       "--seed", 1)
    assert code in (0, 1) and "mean_distance_x0" in fields(out)
    assert run(capsys, "attack", "gaussian-elim", "--key", f"{prefix}.sk", "--trials", 1)[0] == 2


def test_gaussian_budget_at_fixture():
    assert gaussian_budget(zero_bit_fixture()) == 409
