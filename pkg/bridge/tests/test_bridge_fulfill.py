import numpy as np
import pytest

from saif_bridge.cli import main
from saif_bridge.fulfill import fulfill_requests
from saif_bridge.manifest import format_requests, parse_requests, read_requests
from saif_bridge.models import MockModel
from saif_bridge.spfm import decode_map


def write_request_file(root, image_id="img0007", width=12, height=10,
                       pairs=((1, 1), (1, 2), (2, 1), (2, 2))):
    d = root / image_id
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, k in pairs:
        rows.append(f"{image_id}\t{i}\t{k}\t{repr(1.0 + i)}\t{repr(0.5 * k)}"
                    f"\t{repr(8.0 + i)}\t{repr(7.0 + k)}\t\t")
    text = (f"# image_id={image_id}\n# width={width}\n# height={height}\n"
            f"# image_path=\n" + "\n".join(rows) + "\n")
    path = d / "requests.txt"
    path.write_text(text)
    return path


def test_fulfill_writes_maps_and_manifest(tmp_path):
    req = write_request_file(tmp_path)
    summary = fulfill_requests(str(req), MockModel(0.5))
    assert summary.image_id == "img0007"
    assert (summary.calls, summary.skipped, summary.failed) == (4, 0, [])
    d = req.parent
    for i, k in ((1, 1), (1, 2), (2, 1), (2, 2)):
        arr = decode_map((d / "maps" / f"i{i:02d}_k{k:02d}.spfm").read_bytes())
        assert arr.shape == (10, 12)
        assert np.all(arr == np.float32(0.5))
    done = read_requests(str(d / "manifest.txt"))
    assert done.headers == read_requests(str(req)).headers
    for orig, new in zip(read_requests(str(req)).lines, done.lines):
        assert new.box_text == orig.box_text    # coordinates untouched as text
        assert new.path == f"maps/i{new.i:02d}_k{new.k:02d}.spfm"
        assert len(new.crc32) == 8 and int(new.crc32, 16) >= 0


def test_rerun_skips_everything(tmp_path):
    req = write_request_file(tmp_path)
    fulfill_requests(str(req), MockModel(0.5))
    before = (req.parent / "manifest.txt").read_bytes()
    again = fulfill_requests(str(req), MockModel(0.5))
    assert (again.calls, again.skipped) == (0, 4)
    assert (req.parent / "manifest.txt").read_bytes() == before


def test_tampered_map_is_regenerated(tmp_path):
    req = write_request_file(tmp_path)
    fulfill_requests(str(req), MockModel(0.5))
    victim = req.parent / "maps" / "i02_k01.spfm"
    data = bytearray(victim.read_bytes())
    data[20] ^= 0x01
    victim.write_bytes(bytes(data))
    again = fulfill_requests(str(req), MockModel(0.5))
    assert (again.calls, again.skipped) == (1, 3)
    decode_map(victim.read_bytes())   # valid once more


class Grumpy:
    """Fails on one specific box, succeeds elsewhere."""

    def __init__(self, bad):
        self.bad = bad
        self.inner = MockModel(0.25)

    def predict(self, image, box, width, height):
        i_guess = int(box[0] - 1.0)   # box construction above encodes i
        k_guess = int(box[1] / 0.5)
        if (i_guess, k_guess) == self.bad:
            raise RuntimeError("no mask for you")
        return self.inner.predict(image, box, width, height)


def test_model_failure_marks_line_and_continues(tmp_path):
    req = write_request_file(tmp_path)
    summary = fulfill_requests(str(req), Grumpy((2, 1)))
    assert summary.failed == [(2, 1)]
    assert summary.calls == 3
    done = read_requests(str(req.parent / "manifest.txt"))
    by_pair = {(ln.i, ln.k): ln for ln in done.lines}
    assert by_pair[(2, 1)].path == "" and by_pair[(2, 1)].crc32 == "FAILED"
    assert all(ln.path for pair, ln in by_pair.items() if pair != (2, 1))
    assert not (req.parent / "maps" / "i02_k01.spfm").exists()


class WrongShape:
    def predict(self, image, box, width, height):
        return np.full((height + 1, width), 0.5, dtype=np.float32)


def test_bad_output_shape_counts_as_failure(tmp_path):
    req = write_request_file(tmp_path, pairs=((1, 1),))
    summary = fulfill_requests(str(req), WrongShape())
    assert summary.failed == [(1, 1)]


def test_headers_only_request(tmp_path):
    d = tmp_path / "imgE"
    d.mkdir()
    (d / "requests.txt").write_text(
        "# image_id=imgE\n# width=8\n# height=8\n# image_path=\n")
    summary = fulfill_requests(str(d / "requests.txt"), MockModel(0.5))
    assert (summary.calls, summary.skipped, summary.failed) == (0, 0, [])
    done = read_requests(str(d / "manifest.txt"))
    assert done.lines == [] and done.image_id == "imgE"
    assert not (d / "maps").exists()


def test_cli_scans_corpus_directories(tmp_path, capsys):
    write_request_file(tmp_path, image_id="img0000")
    write_request_file(tmp_path, image_id="img0001")
    assert main(["fulfill", "--requests", str(tmp_path),
                 "--mock", "constant:0.5"]) == 0
    out = capsys.readouterr().out
    assert "img0000: calls=4 skipped=0 failed=0" in out
    assert "fulfilled 2 request file(s), 0 failed line(s)" in out
    # second run touches nothing
    assert main(["fulfill", "--requests", str(tmp_path),
                 "--mock", "constant:0.5"]) == 0
    assert "img0001: calls=0 skipped=4 failed=0" in capsys.readouterr().out


def test_cli_single_file_target(tmp_path):
    req = write_request_file(tmp_path)
    assert main(["fulfill", "--requests", str(req),
                 "--mock", "constant:0.25"]) == 0
    arr = decode_map((req.parent / "maps" / "i01_k01.spfm").read_bytes())
    assert np.all(arr == np.float32(0.25))


def test_cli_argument_errors(tmp_path, capsys):
    req = write_request_file(tmp_path)
    assert main(["fulfill", "--requests", str(req)]) == 2
    assert main(["fulfill", "--requests", str(req),
                 "--mock", "constant:0.5", "--checkpoint", "x.pt"]) == 2
    assert main(["fulfill", "--requests", str(req),
                 "--mock", "gaussian:0.5"]) == 2
    assert main(["fulfill", "--requests", str(req),
                 "--mock", "constant:1.5"]) == 2
    assert main(["fulfill", "--requests", str(tmp_path / "void"),
                 "--mock", "constant:0.5"]) == 3
    assert main(["fulfill", "--requests", str(req),
                 "--checkpoint", str(tmp_path / "missing.pt")]) == 2
    capsys.readouterr()


def test_cli_malformed_request_file(tmp_path, capsys):
    d = tmp_path / "imgBad"
    d.mkdir()
    (d / "requests.txt").write_text("# width=8\n# height=8\nimgBad\t1\n")
    assert main(["fulfill", "--requests", str(d / "requests.txt"),
                 "--mock", "constant:0.5"]) == 3
    assert "error" in capsys.readouterr().err
