"""CLI subcommands: exit codes, JSON output, index determinism."""
from __future__ import annotations

import hashlib
import json

import numpy as np
import pytest
from PIL import Image

from mpview.cli import EXIT_INPUT, EXIT_NO_TISSUE, EXIT_OK, EXIT_STATE, main
from mpview.model import ChannelPlane, Modality, SlideImage
from mpview.rawstack import write_raw_stack

from synth import build_tiff, photo_of_slide, slide_corpus


@pytest.fixture(scope="module")
def corpus_dirs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-slides")
    slides = slide_corpus(n_slides=6)
    return slides, [str(write_raw_stack(s, root / s.slide_id)) for s in slides]


@pytest.fixture(scope="module")
def index_file(tmp_path_factory, corpus_dirs):
    _, paths = corpus_dirs
    out = str(tmp_path_factory.mktemp("idx") / "corpus.idx")
    assert main(["index", *paths, "--out", out, "--seed", "11"]) == EXIT_OK
    return out


class TestIngest:
    def test_single_tiff_row(self, tmp_path, capsys):
        p = tmp_path / "one.tiff"
        p.write_bytes(build_tiff([np.zeros((4, 4), dtype=np.uint8)], names=["DAPI"]))
        assert main(["ingest", str(p)]) == EXIT_OK
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1 and out[0].startswith("one")

    def test_mixed_good_and_bad_nonzero_exit(self, tmp_path, capsys):
        good = tmp_path / "good.tiff"
        good.write_bytes(build_tiff([np.zeros((4, 4), dtype=np.uint8)]))
        bad = tmp_path / "bad.tiff"
        bad.write_bytes(b"PK\x03\x04")
        assert main(["ingest", "--json", str(good), str(bad)]) == EXIT_INPUT
        body = json.loads(capsys.readouterr().out)
        assert [r["slide_id"] for r in body["slides"]] == ["good"]
        assert len(body["errors"]) == 1

    def test_batch_of_109_completes(self, tmp_path, capsys):
        paths = []
        for i in range(109):
            slide = SlideImage(
                slide_id=f"b{i:03d}",
                channel_names=["c0"],
                planes=[ChannelPlane(np.full((2, 2), i % 256, dtype=np.uint8))],
                modality=Modality.MULTIPLEX,
            )
            paths.append(str(write_raw_stack(slide, tmp_path / f"b{i:03d}")))
        assert main(["ingest", "--json", *paths]) == EXIT_OK
        assert len(json.loads(capsys.readouterr().out)["slides"]) == 109


class TestIndex:
    def test_same_seed_same_file_hash(self, tmp_path, corpus_dirs, capsys):
        _, paths = corpus_dirs
        digests = []
        for name in ("a.idx", "b.idx"):
            out = str(tmp_path / name)
            assert main(["index", *paths, "--out", out, "--seed", "5", "--json"]) == EXIT_OK
            digests.append(hashlib.sha256(open(out, "rb").read()).hexdigest())
        assert digests[0] == digests[1]

    def test_unknown_channel_warns_but_continues(self, tmp_path, corpus_dirs, capsys):
        _, paths = corpus_dirs
        out = str(tmp_path / "c.idx")
        code = main(
            ["index", *paths, "--channels", "DAPI,NOSUCH", "--out", out, "--json"]
        )
        assert code == EXIT_OK
        captured = capsys.readouterr()
        assert "NOSUCH" in captured.err
        assert json.loads(captured.out)["channels"] == ["DAPI"]

    def test_empty_corpus_is_input_error(self, tmp_path, corpus_dirs, capsys):
        _, paths = corpus_dirs
        out = str(tmp_path / "d.idx")
        assert main(["index", paths[0], "--channels", "NOSUCH", "--out", out]) == EXIT_INPUT


class TestSearch:
    def test_self_query_rank_one(self, tmp_path, corpus_dirs, index_file, capsys):
        slides, _ = corpus_dirs
        photo = tmp_path / "photo.png"
        Image.fromarray(photo_of_slide(slides[3])).save(photo)
        assert main(["search", str(photo), "--index", index_file, "--json"]) == EXIT_OK
        body = json.loads(capsys.readouterr().out)
        assert body["hits"][0]["slide_id"] == "slide03"
        assert set(body) == {"hits", "query"}
        assert set(body["query"]) == {"bbox_original", "patch_count"}

    def test_blank_image_exits_no_tissue(self, tmp_path, index_file, capsys):
        photo = tmp_path / "blank.png"
        Image.fromarray(np.full((640, 640, 3), 255, dtype=np.uint8)).save(photo)
        assert main(["search", str(photo), "--index", index_file]) == EXIT_NO_TISSUE

    def test_missing_index_is_state_error(self, tmp_path, capsys):
        photo = tmp_path / "p.png"
        Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(photo)
        assert main(["search", str(photo), "--index", str(tmp_path / "absent.idx")]) == EXIT_STATE

    def test_undecodable_image_is_input_error(self, tmp_path, index_file, capsys):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"nope")
        assert main(["search", str(bad), "--index", index_file]) == EXIT_INPUT


def test_bench_reports_all_three_numbers(capsys):
    assert main(["bench", "--json"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"dtw_ops_per_s", "queries_per_s_n5000", "composite_2048_ms"}
    assert all(v > 0 for v in report.values())


class TestCliMatchesHttp:
    def test_identical_hits_for_identical_state(self, tmp_path, corpus_dirs, index_file, capsys):
        import io

        from fastapi.testclient import TestClient

        from mpview.config import ApiConfig
        from mpview.server import create_app

        slides, paths = corpus_dirs
        photo_arr = photo_of_slide(slides[5])
        photo = tmp_path / "q.png"
        Image.fromarray(photo_arr).save(photo)
        assert main(["search", str(photo), "--index", index_file, "--json"]) == EXIT_OK
        cli_body = json.loads(capsys.readouterr().out)

        app = create_app(ApiConfig(slides=paths, index_path=index_file))
        client = TestClient(app)
        buf = io.BytesIO()
        Image.fromarray(photo_arr).save(buf, format="PNG")
        http_body = client.post(
            "/api/search", files={"image": ("q.png", buf.getvalue(), "image/png")}
        ).json()
        assert cli_body == http_body
