from __future__ import annotations

import json
from fractions import Fraction

import pytest
from click.testing import CliRunner
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import cycle, path, star
from subdivembed.cli import main
from subdivembed.embedding_model import complete_pattern, distortion, dump_embedding, isomorphic_patterns, star_pattern
from subdivembed.errors import ParamError, SizeError
from subdivembed.harness import (
    CSV_COLUMNS,
    InstanceSpec,
    SplitMix64,
    bench,
    generate,
    min_cycle_distortion_oracle,
    records_to_csv,
    small_corpus,
    verify_command,
)


def test_splitmix_reference_values():
    # first outputs for seed 0 (widely published reference sequence)
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 1000))
def test_splitmix_below_stays_in_range(seed, n):
    rng = SplitMix64(seed)
    assert all(0 <= rng.below(n) < n for _ in range(5))


def test_generate_examples():
    g, h = generate(InstanceSpec.make("cycle", n=8))
    assert g.n == 8 and g.m == 8 and isomorphic_patterns(h, complete_pattern(3))
    g, h = generate(InstanceSpec.make("subdivided-H", legs=5, pendants=0.0))
    assert g.n == 16 and isomorphic_patterns(h, star_pattern(3))
    assert g.dist(1, 2) == 10  # two leaves of the claw, through the center
    g, h = generate(InstanceSpec.make("clique", k=8))
    assert g.m == 28 and h.h == 1


@pytest.mark.parametrize("spec", [
    InstanceSpec.make("cycle", n=2),
    InstanceSpec.make("clique", k=0),
    InstanceSpec.make("spider"),
    InstanceSpec.make("caterpillar", n=3, pendants=2.0),
    InstanceSpec.make("nope", n=3),
    InstanceSpec.make("subdivided-H", pattern="0 0", legs=2),
])
def test_generate_rejects_bad_params(spec):
    with pytest.raises(ParamError):
        generate(spec)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["random-tree", "caterpillar"]), st.integers(2, 12), st.integers(0, 2 ** 64 - 1))
def test_generation_is_deterministic(family, n, seed):
    spec = InstanceSpec.make(family, seed, n=n)
    a, _ = generate(spec)
    b, _ = generate(spec)
    assert a.edges == b.edges and a.n == b.n


def test_cycle_oracle_examples():
    assert min_cycle_distortion_oracle(cycle(5))[0] == 1
    assert min_cycle_distortion_oracle(path(4))[0] == 1
    value, e = min_cycle_distortion_oracle(star(3))
    assert value == 3 and distortion(e).distortion == 3
    with pytest.raises(SizeError):
        min_cycle_distortion_oracle(path(9))


def test_corpus_shape():
    specs = small_corpus()
    assert len(specs) == 200
    for spec in specs:
        g, h = generate(spec)
        assert g.n <= 7 and h.h in (1, 3) and spec.get("c") in (1, 2, 3)


def test_bench_on_cycles():
    specs = [InstanceSpec.make("cycle", seed, n=3 + seed % 6) for seed in range(20)]
    rows = bench(specs, ("approx", "fpt", "oracle"))
    assert len(rows) == 60
    assert [r.id for r in rows] == sorted(r.id for r in rows)
    for r in rows:
        if r.verdict == "EMBED":
            assert r.distortion >= r.oracle_opt
    again = bench(specs, ("approx", "fpt", "oracle"))
    strip = lambda text: [line.rsplit(",", 1)[0] for line in text.splitlines()]
    assert strip(records_to_csv(rows)) == strip(records_to_csv(again))
    assert records_to_csv(rows).splitlines()[0] == ",".join(CSV_COLUMNS)


def test_bench_no_instances_match_oracle():
    specs = [InstanceSpec.make("random-tree", seed, n=6, chords=3) for seed in range(10)]
    rows = bench(specs, ("fpt",), c=1)
    for r in rows:
        assert (r.verdict == "NO") == (r.oracle_opt > 1)


def test_bench_records_errors():
    rows = bench([InstanceSpec.make("cycle", n=1)], ("approx",))
    assert rows[0].verdict == "ERROR"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_verify_identity_subdivision(tmp_path):
    g, h = generate(InstanceSpec.make("subdivided-H", legs=3))
    from subdivembed.fpt import fpt_embed
    e = fpt_embed(g, h, 1)
    gfile = write(tmp_path, "g.txt", "".join(f"{u} {v}\n" for u, v in g.edges))
    efile = write(tmp_path, "e.json", dump_embedding(e))
    rep, code = verify_command(efile, gfile)
    assert code == 0 and rep["distortion"] == "1/1" and rep["pushing"] and rep["proper"]


def test_cli_round_trip(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["gen", "--family", "cycle", "--param", "n=8"])
    assert res.exit_code == 0
    gfile = write(tmp_path, "c8.txt", res.output)
    res = runner.invoke(main, ["fpt", "--graph", gfile, "--pattern", "K3", "--c", "1"])
    assert res.exit_code == 0
    efile = write(tmp_path, "e.json", res.output)
    res = runner.invoke(main, ["verify", efile, "--graph", gfile])
    assert res.exit_code == 0 and json.loads(res.output)["distortion"] == "1/1"
    res = runner.invoke(main, ["embed-line", "--graph", gfile, "--c", "1"])
    assert res.exit_code == 1
    res = runner.invoke(main, ["approx", "--graph", gfile, "--pattern", "K3", "--c", "1", "--format", "csv"])
    assert res.exit_code == 0 and res.output.splitlines()[1] == "EMBED,1/1"
    res = runner.invoke(main, ["oracle", "--graph", gfile, "--pattern", "K3"])
    assert res.exit_code == 0 and json.loads(res.output)["optimum"] == "1/1"


def test_cli_exit_codes(tmp_path):
    runner = CliRunner()
    k8 = write(tmp_path, "k8.txt", runner.invoke(main, ["gen", "--family", "clique", "--param", "k=8"]).output)
    assert runner.invoke(main, ["fpt", "--graph", k8, "--pattern", "K2", "--c", "1"]).exit_code == 1
    assert runner.invoke(main, ["approx", "--graph", k8, "--pattern", "K2", "--c", "1"]).exit_code == 1
    sp = write(tmp_path, "sp.txt", runner.invoke(main, ["gen", "--family", "spider", "--param", "length=3"]).output)
    assert runner.invoke(main, ["fpt", "--graph", sp, "--pattern", "K2", "--c", "3", "--budget", "5"]).exit_code == 2
    # the spider's line optimum is above 5, so the complete search answers NO
    assert runner.invoke(main, ["fpt", "--graph", sp, "--pattern", "K2", "--c", "5", "--no-gadget"]).exit_code == 1
    assert runner.invoke(main, ["fpt", "--graph", sp, "--pattern", "K13", "--c", "1"]).exit_code == 0
    bad = write(tmp_path, "bad.txt", "0 0\n")
    assert runner.invoke(main, ["fpt", "--graph", bad, "--pattern", "K2", "--c", "1"]).exit_code == 3
    assert runner.invoke(main, ["gen", "--family", "cycle", "--param", "n=2"]).exit_code == 3


def test_cli_verify_rejects_duplicate_image(tmp_path):
    runner = CliRunner()
    gfile = write(tmp_path, "p.txt", "0 1\n1 2\n2 3\n")
    res = runner.invoke(main, ["embed-line", "--graph", gfile, "--c", "1"])
    data = json.loads(res.output)
    pts = data["points"]["0"]
    pts[2]["offset"] = pts[1]["offset"]  # two vertices on one point
    efile = write(tmp_path, "e.json", json.dumps(data))
    res = runner.invoke(main, ["verify", efile, "--graph", gfile])
    assert res.exit_code == 3 and "share the host point" in res.output


def test_cli_dot_and_bench(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["gen", "--family", "spider", "--param", "length=2", "--format", "dot"])
    assert res.output.startswith("graph G {")
    res = runner.invoke(main, ["bench", "--family", "cycle", "--seeds", "2", "--param", "n=5", "--algos", "approx,oracle"])
    assert res.exit_code == 0
    lines = res.output.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 5
    assert Fraction(lines[1].split(",")[7]) == 1
