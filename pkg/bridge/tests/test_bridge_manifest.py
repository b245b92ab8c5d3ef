import pytest

from saif_bridge.errors import RequestFormatError
from saif_bridge.manifest import RequestLine, format_requests, parse_requests

SAMPLE = (
    "# image_id=img0042\n"
    "# width=64\n"
    "# height=48\n"
    "# image_path=\n"
    "img0042\t1\t1\t3.10\t4.0\t30.5\t28.25\t\t\n"
    "img0042\t2\t1\t2.9000000000000004\t3.5\t31.1\t29.0\t\t\n"
)


def test_parse_sample():
    rf = parse_requests(SAMPLE)
    assert rf.image_id == "img0042"
    assert (rf.width, rf.height) == (64, 48)
    assert rf.image_path == ""
    assert len(rf.lines) == 2
    first = rf.lines[0]
    assert (first.i, first.k) == (1, 1)
    assert first.box == (3.10, 4.0, 30.5, 28.25)
    # the text form is preserved verbatim, trailing zeros and all
    assert first.box_text == ("3.10", "4.0", "30.5", "28.25")
    assert rf.lines[1].box_text[0] == "2.9000000000000004"
    assert first.path == "" and first.crc32 == ""


def test_format_parse_round_trip_is_byte_identical():
    rf = parse_requests(SAMPLE)
    assert format_requests(rf.headers, rf.lines) == SAMPLE


def test_boxes_survive_serialization_exactly():
    rf = parse_requests(SAMPLE)
    again = parse_requests(format_requests(rf.headers, rf.lines))
    for a, b in zip(rf.lines, again.lines):
        assert a.box_text == b.box_text
        assert a.box == b.box


def test_many_lines_round_trip():
    # a full family worth of request lines survives parse/format losslessly
    lines = []
    for i in range(1, 13):
        for k in range(1, 9):
            lines.append(RequestLine(
                image_id="imgZ", i=i, k=k,
                box_text=(repr(0.1 * i), repr(0.2 * k),
                          repr(10.0 + i / 3.0), repr(20.0 + k / 7.0))))
    text = format_requests({"image_id": "imgZ", "width": 32, "height": 32,
                            "image_path": ""}, lines)
    rf = parse_requests(text)
    assert len(rf.lines) == 96
    assert format_requests(rf.headers, rf.lines) == text
    assert [ln.box for ln in rf.lines] == [ln.box for ln in lines]


def test_fulfilled_and_failed_rewrites():
    line = parse_requests(SAMPLE).lines[0]
    done = line.fulfilled("maps/i01_k01.spfm", "0a1b2c3d")
    assert done.path == "maps/i01_k01.spfm" and done.crc32 == "0a1b2c3d"
    assert done.box_text == line.box_text
    dead = line.failed()
    assert dead.path == "" and dead.crc32 == "FAILED"


def test_comment_without_equals_is_skipped():
    rf = parse_requests("# just a note\n# width=8\n# height=4\n")
    assert "just a note" not in rf.headers
    assert (rf.width, rf.height) == (8, 4)


def test_missing_or_bad_headers():
    with pytest.raises(RequestFormatError):
        parse_requests("# height=4\n").width
    with pytest.raises(RequestFormatError):
        parse_requests("# width=ten\n# height=4\n").width


@pytest.mark.parametrize("row", [
    "imgA\t1\t1\t0.0\t0.0\t5.0\n",                      # too few fields
    "imgA\tone\t1\t0.0\t0.0\t5.0\t5.0\t\t\n",           # bad index
    "imgA\t1\t1\t0.0\tzero\t5.0\t5.0\t\t\n",            # bad coordinate
])
def test_malformed_rows_name_the_line(row):
    with pytest.raises(RequestFormatError, match=":1:"):
        parse_requests(row, path="req.txt")
