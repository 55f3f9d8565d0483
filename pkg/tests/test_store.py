import hashlib
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from binoa.core import FormatError, IsoOp, OAParams, format_oam
from binoa.solver import Status, enumerate_classes, extend_classes
from binoa.store import (
    CheckpointError,
    ClassArchive,
    IntegrityError,
    checkpoint,
    format_archive,
    job_hash,
    load_archive,
    parse_archive,
    resume,
    save_archive,
)


@pytest.fixture(scope="module")
def five():
    return enumerate_classes(5, 4, 6)


@pytest.fixture(scope="module")
def six(five):
    return extend_classes(five.classes, 4, 6)


def test_archive_roundtrip(tmp_path, six):
    a = ClassArchive.from_report(six)
    assert a.complete and len(a.classes) == 9
    path = tmp_path / "six.cls"
    save_archive(a, path)
    b = load_archive(path)
    assert b == a
    assert b.content_id == a.content_id
    assert format_archive(b) == path.read_text()
    assert path.read_text().startswith("CLS1 96 6 2 4 9 1\n")


@given(st.integers(1, 8))
def test_roundtrip_across_indices(lam):
    rep = enumerate_classes(5, 4, lam)
    a = ClassArchive.from_report(rep, producer="p")
    assert parse_archive(format_archive(a)) == a


def test_empty_archive_roundtrip():
    a = ClassArchive(OAParams(64, 6, 4), (), "x", True)
    assert parse_archive(format_archive(a)) == a


def test_truncated_archive(six):
    text = format_archive(ClassArchive.from_report(six))
    with pytest.raises(FormatError):
        parse_archive(text[: len(text) // 2])
    with pytest.raises(FormatError) as e:
        parse_archive("CLS2 1 2 3\n")
    assert e.value.line == 1


def reseal(text):
    body = text[: text.rindex("SHA256 ")]
    return body + "SHA256 " + hashlib.sha256(body.encode()).hexdigest() + "\n"


def test_checksum_and_tamper():
    rep = enumerate_classes(5, 4, 2)
    text = format_archive(ClassArchive.from_report(rep, producer="p"))
    bad_sum = text[: text.rindex("SHA256 ")] + "SHA256 " + "0" * 64 + "\n"
    with pytest.raises(IntegrityError):
        parse_archive(bad_sum)
    assert parse_archive(bad_sum, verify=False).classes == rep.classes
    # moving one run breaks strength even with a valid checksum
    with pytest.raises(IntegrityError, match="strength"):
        parse_archive(reseal(text.replace("\n1 2\n", "\n0 2\n", 1)))
    # an isomorphic but non-canonical copy is rejected too
    cf = rep.classes[0]
    image = IsoOp((1, 0, 2, 3, 4), 1).apply(cf.counts)
    assert image != cf.counts
    other = text.replace(format_oam(cf.counts), format_oam(image), 1)
    with pytest.raises(IntegrityError, match="canonical"):
        parse_archive(reseal(other))


def test_duplicate_classes_rejected(six):
    with pytest.raises(ValueError):
        ClassArchive(six.params, (six.classes[0], six.classes[0]), "x", True)
    with pytest.raises(ValueError):
        ClassArchive(six.params, six.classes, "two words", True)


def test_content_id_independent_of_schedule(five):
    a = extend_classes(five.classes, 4, 6)
    b = extend_classes(five.classes, 4, 6, workers=2, split_depth=2)
    ia = ClassArchive.from_report(a, producer="serial").content_id
    ib = ClassArchive.from_report(b, producer="parallel").content_id
    assert ia == ib


def test_checkpoint_roundtrip(tmp_path):
    job = {"op": "x", "n": 3}
    path = tmp_path / "job.ck"
    assert resume(job, path) is None
    checkpoint(job, {"finished": {"a": [[1, 2]]}, "nodes": 4}, path)
    assert resume(job, path) == {"finished": {"a": [[1, 2]]}, "nodes": 4}
    with pytest.raises(CheckpointError):
        resume({"op": "y"}, path)
    doc = json.loads(path.read_text())
    doc["payload"]["state"]["nodes"] = 5
    path.write_text(json.dumps(doc))
    with pytest.raises(CheckpointError):
        resume(job, path)
    path.write_text("{not json")
    with pytest.raises(CheckpointError):
        resume(job, path)
    assert len(job_hash(job)) == 64


@pytest.mark.parametrize("nodes", [1, 50])
def test_interrupt_and_resume(tmp_path, five, six, nodes):
    path = tmp_path / "ext.ck"
    part = extend_classes(five.classes, 4, 6, node_budget=nodes, split_depth=2, checkpoint=path)
    assert part.status is Status.INDETERMINATE
    assert len(part) < len(six)
    done = extend_classes(five.classes, 4, 6, split_depth=2, checkpoint=path)
    assert done.status is Status.SAT
    assert done.classes == six.classes
    # resuming a finished job does no new work
    again = extend_classes(five.classes, 4, 6, split_depth=2, checkpoint=path)
    assert again.classes == six.classes


def test_interrupt_and_resume_direct(tmp_path, five):
    # a single unsplit task: the checkpoint records no finished work
    path = tmp_path / "d.ck"
    part = enumerate_classes(5, 4, 6, method="direct", node_budget=2, checkpoint=path)
    assert part.status is Status.INDETERMINATE
    assert json.loads(path.read_text())["payload"]["state"]["finished"] == {}
    done = enumerate_classes(5, 4, 6, method="direct", checkpoint=path)
    assert done.complete and done.classes == five.classes and len(done) == 4


def test_resume_rejects_other_job(tmp_path, five):
    path = tmp_path / "ext.ck"
    extend_classes(five.classes, 4, 6, node_budget=10, split_depth=2, checkpoint=path)
    with pytest.raises(CheckpointError):
        extend_classes(five.classes, 4, 6, split_depth=3, checkpoint=path)
