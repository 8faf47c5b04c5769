import csv
import io
import json
import shutil

import pytest

from conftest import CORPUS, annotated_track, corpus_files, stub_command, write_table
from chccomp import cli
from chccomp.cli import EXIT_INTERNAL, EXIT_INVALID, EXIT_OK, build_parser, main
from chccomp.runner import CSV_HEADER, TEST_LIMITS, ResourceLimits


def conformant(tmp_path, names):
    d = tmp_path / "in"
    d.mkdir()
    for n in names:
        shutil.copy(CORPUS / n, d / n)
    return d


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for name in ("format", "categorize", "select", "run", "score", "report"):
        assert name in out


def test_format_conformant_corpus(tmp_path, capsys):
    src = conformant(tmp_path, ["lin_counter.smt2", "nonlin_fib.smt2", "adt_list.smt2"])
    assert main(["format", str(src), "--out-dir", str(tmp_path / "out")]) == EXIT_OK
    reports = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(reports) == 3 and all(r["rejection"] is None for r in reports)
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
        "adt_list.smt2", "lin_counter.smt2", "nonlin_fib.smt2"]


def test_format_alias_and_quarantine(tmp_path, capsys):
    src = conformant(tmp_path, ["lin_counter.smt2", "excl_parametric_adt.smt2"])
    rc = main(["normalize", str(src), "--out-dir", str(tmp_path / "out"),
               "--quarantine", str(tmp_path / "q"), "--report", str(tmp_path / "r.jsonl")])
    assert rc == EXIT_INVALID
    reports = {json.loads(l)["input"].rsplit("/", 1)[1]: json.loads(l)
               for l in (tmp_path / "r.jsonl").read_text().splitlines()}
    assert reports["excl_parametric_adt.smt2"]["rejection"]["code"] == "parametric-datatype"
    assert [p.name for p in (tmp_path / "q").iterdir()] == ["excl_parametric_adt.smt2"]
    assert [p.name for p in (tmp_path / "out").iterdir()] == ["lin_counter.smt2"]


@pytest.mark.parametrize("flag", ["--merge-queries", "--merge_queries"])
def test_format_without_merging_rejects_multi_query(tmp_path, capsys, flag):
    src = conformant(tmp_path, ["lin_multi_query.smt2"])
    assert main(["format", str(src), "--out-dir", str(tmp_path / "o"), flag, "false"]) == EXIT_INVALID
    report = json.loads(capsys.readouterr().out)
    assert report["rejection"]["code"] == "malformed"
    assert main(["format", str(src), "--out-dir", str(tmp_path / "o2")]) == EXIT_OK
    assert "merge_queries" in json.loads(capsys.readouterr().out)["transformations"]


def test_format_needs_out_dir(tmp_path):
    assert main(["format", str(CORPUS / "lin_counter.smt2")]) == EXIT_INVALID


def test_format_is_stable_across_parallelism(tmp_path, capsys):
    files = [str(p) for p in corpus_files()]
    main(["format", *files, "--out-dir", str(tmp_path / "a"), "-j", "1"])
    one = capsys.readouterr().out
    main(["format", *files, "--out-dir", str(tmp_path / "b"), "-j", "6"])
    many = capsys.readouterr().out
    strip = lambda text: [{k: v for k, v in json.loads(l).items() if k != "output"} for l in text.splitlines()]
    assert strip(one) == strip(many)


def test_categorize_corpus(tmp_path, capsys):
    assert main(["categorize", str(CORPUS)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(corpus_files())
    for line, path in zip(lines, corpus_files()):
        name, label = line.split("\t")
        assert name == str(path)
        assert label.split("(", 1)[0] == annotated_track(path)


def test_categorize_empty_directory(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["categorize", str(tmp_path / "empty")]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_missing_input_is_exit_1(tmp_path):
    assert main(["categorize", str(tmp_path / "nope.smt2")]) == EXIT_INVALID


MANIFEST = "".join(
    f"LIA-lin\trepo\t{rating}\tb/{rating}{i}.smt2\n"
    for rating, n in (("A", 30), ("Bw", 4), ("Br", 12), ("C", 50)) for i in range(n)
) + "ADT-LIA-nonlin\ttip\tB\tt/b.smt2\nADT-LIA-nonlin\ttip\tC\tt/c.smt2\n"


def test_select_is_byte_identical_for_a_seed(tmp_path, capsys):
    (tmp_path / "m.tsv").write_text(MANIFEST)
    args = ["select", str(tmp_path / "m.tsv"), "--cap", "LIA-lin/repo=50", "--cap", "ADT-LIA-nonlin/tip=5"]
    assert main(args + ["--seed", "7", "-o", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--seed", "7", "-o", str(tmp_path / "b")]) == EXIT_OK
    assert main(args + ["--seed", "8", "-o", str(tmp_path / "c")]) == EXIT_OK
    a, b, c = ((tmp_path / n).read_bytes() for n in "abc")
    assert a == b and a != c
    rows = a.decode().splitlines()
    lia = [r.split("\t")[2] for r in rows if r.startswith("LIA-lin")]
    # cap 50: A 10, Bw only 4 of 10 (6 cascade to C), Br 10, C 20 + 6
    assert [sum(p.startswith(f"b/{k}") for p in lia) for k in ("A", "Bw", "Br", "C")] == [10, 4, 10, 26]


def test_select_without_cap_is_exit_1(tmp_path):
    (tmp_path / "m.tsv").write_text(MANIFEST)
    assert main(["select", str(tmp_path / "m.tsv")]) == EXIT_INVALID


def test_select_bad_cap_syntax(tmp_path):
    (tmp_path / "m.tsv").write_text(MANIFEST)
    assert main(["select", str(tmp_path / "m.tsv"), "--cap", "oops"]) == EXIT_INVALID


def test_run_defaults_to_test_preset(monkeypatch, tmp_path):
    seen = {}

    def fake_campaign(solvers, benches, limits, parallelism, csv_path=None):
        seen["limits"] = limits
        from chccomp.runner import Campaign
        return Campaign([])

    monkeypatch.setattr(cli, "run_campaign", fake_campaign)
    table = write_table(tmp_path / "t.json", {"*": "sat"})
    reg = tmp_path / "s.yaml"
    reg.write_text(f"- solver: s\n  command: {json.dumps(list(stub_command(table)))}\n")
    assert main(["run", str(CORPUS / "lin_counter.smt2"), "--solvers", str(reg)]) == EXIT_OK
    assert seen["limits"] == TEST_LIMITS == ResourceLimits(600, 600, 64 << 30)
    assert main(["run", str(CORPUS / "lin_counter.smt2"), "--solvers", str(reg),
                 "--preset", "competition"]) == EXIT_OK
    assert seen["limits"].cpu == 1800
    assert main(["run", str(CORPUS / "lin_counter.smt2"), "--solvers", str(reg),
                 "--preset", "bogus"]) == EXIT_INVALID


def test_run_then_score(tmp_path, capsys):
    table = write_table(tmp_path / "t.json", {"lin_counter.smt2": "sat", "nonlin_fib.smt2": "unsat"})
    other = write_table(tmp_path / "u.json", {"lin_counter.smt2": "unsat"})
    (tmp_path / "c.yaml").write_text(
        "presets:\n  desk: {cpu: 5, wall: 5, memory: 1GiB}\n"
        "solvers:\n"
        f"  - {{solver: one, command: {json.dumps(list(stub_command(table)))}}}\n"
        f"  - {{solver: two, command: {json.dumps(list(stub_command(other)))}}}\n")
    benches = [str(CORPUS / "lin_counter.smt2"), str(CORPUS / "nonlin_fib.smt2")]
    rc = main(["--config", str(tmp_path / "c.yaml"), "run", *benches, "--preset", "desk",
               "-j", "2", "--csv", str(tmp_path / "jobs.csv")])
    assert rc == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((tmp_path / "jobs.csv").read_text())))
    assert tuple(rows[0]) == CSV_HEADER and len(rows) == 4
    capsys.readouterr()
    rc = main(["score", str(tmp_path / "jobs.csv"), "--ranking-csv", str(tmp_path / "rank.csv"),
               "--inconsistencies", str(tmp_path / "inc.jsonl"), "--hors-concours", "two"])
    assert rc == EXIT_OK
    table_out = capsys.readouterr().out
    assert table_out.splitlines()[0].split()[:3] == ["rank", "solver", "score"]
    ranking = list(csv.DictReader(io.StringIO((tmp_path / "rank.csv").read_text())))
    assert [(r["rank"], r["solver"], r["score"], r["unique"]) for r in ranking] == [
        ("1", "one", "2", "1"), ("-", "two", "1", "0")]
    issues = [json.loads(l) for l in (tmp_path / "inc.jsonl").read_text().splitlines()]
    assert issues == [{"benchmark": benches[0], "sat": ["one"], "unsat": ["two"]}]


def test_score_disqualify_and_drop(tmp_path, capsys):
    (tmp_path / "j.csv").write_text(
        ",".join(CSV_HEADER) + "\n"
        "b1,x,d,complete,sat,1.00,1.00\n"
        "b1,y,d,complete,unsat,1.00,1.00\n"
        "b2,y,d,complete,sat,1.00,1.00\n")
    assert main(["score", str(tmp_path / "j.csv"), "--drop-benchmark", "b1",
                 "--ranking-csv", str(tmp_path / "r.csv")]) == EXIT_OK
    r = list(csv.DictReader(io.StringIO((tmp_path / "r.csv").read_text())))
    # x had records only on the dropped benchmark, so it leaves the ranking too
    assert [(x["solver"], x["score"]) for x in r] == [("y", "1")]
    assert main(["score", str(tmp_path / "j.csv"), "--disqualify", "y",
                 "--ranking-csv", str(tmp_path / "r.csv")]) == EXIT_OK
    r = list(csv.DictReader(io.StringIO((tmp_path / "r.csv").read_text())))
    assert [(x["solver"], x["score"]) for x in r] == [("x", "1")]


def test_score_rejects_malformed_csv(tmp_path):
    (tmp_path / "j.csv").write_text("benchmark,solver\nb,x\n")
    assert main(["score", str(tmp_path / "j.csv")]) == EXIT_INVALID


def test_report_counts_duplicates_once(tmp_path, capsys):
    root = tmp_path / "bench"
    (root / "repo1").mkdir(parents=True)
    (root / "repo2").mkdir()
    text = (CORPUS / "lin_counter.smt2").read_text()
    (root / "repo1" / "a.smt2").write_text(text)
    (root / "repo1" / "b.smt2").write_text("; a comment\n" + text.replace(" ", "  "))
    shutil.copy(CORPUS / "nonlin_fib.smt2", root / "repo2" / "c.smt2")
    assert main(["report", str(root)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == [
        "track\trepository\ttotal\tunique",
        "LIA-lin\trepo1\t2\t1",
        "LIA-nonlin\trepo2\t1\t1",
    ]


def test_internal_error_is_exit_2(monkeypatch):
    def boom(args, cfg):
        raise RuntimeError("bug")

    parser = build_parser()
    monkeypatch.setattr(cli, "build_parser", lambda: _with_func(parser, boom))
    assert main(["categorize"]) == EXIT_INTERNAL


def _with_func(parser, func):
    parser.set_defaults(func=func)
    for sub in cli._subparsers(parser).values():
        sub.set_defaults(func=func)
    return parser


def test_bad_config_is_exit_1(tmp_path):
    (tmp_path / "c.yaml").write_text("parallelism: 0\n")
    assert main(["--config", str(tmp_path / "c.yaml"), "categorize"]) == EXIT_INVALID


def test_console_script_entry_point():
    import importlib.metadata as md
    eps = [e for e in md.entry_points(group="console_scripts") if e.name == "chccomp"]
    assert eps and eps[0].value == "chccomp.cli:main"


def test_config_defaults_and_flag_precedence(tmp_path, capsys):
    src = conformant(tmp_path, ["lin_multi_query.smt2"])
    (tmp_path / "c.yaml").write_text(
        f"defaults:\n  format:\n    merge-queries: false\n    out_dir: {tmp_path / 'o'}\n")
    cfg = ["--config", str(tmp_path / "c.yaml")]
    assert main(cfg + ["format", str(src)]) == EXIT_INVALID
    assert json.loads(capsys.readouterr().out)["rejection"]["code"] == "malformed"
    assert main(cfg + ["format", str(src), "--merge-queries", "true"]) == EXIT_OK
    assert (tmp_path / "o" / "lin_multi_query.smt2").exists()


def test_config_defaults_reject_unknown_names(tmp_path):
    (tmp_path / "c.yaml").write_text("defaults:\n  format:\n    colour: red\n")
    assert main(["--config", str(tmp_path / "c.yaml"), "categorize"]) == EXIT_INVALID
    (tmp_path / "c.yaml").write_text("defaults:\n  frobnicate: {}\n")
    assert main(["--config", str(tmp_path / "c.yaml"), "categorize"]) == EXIT_INVALID
