"""Tests for instance data models."""

import pytest

from reasonforge.errors import ErrorCode, QAError
from reasonforge.models import Instance, ReasoningSteps, Segment


def test_segment_dicts():
    assert Segment("text", text="hi").to_dict() == {"type": "text", "text": "hi"}
    image = Segment("image", image="images/x_img1.png", index=1)
    assert image.to_dict() == {"type": "image", "image": "images/x_img1.png", "index": 1}
    assert Segment.from_dict(image.to_dict()) == image


def test_instance_round_trip(toy_instance):
    data = toy_instance.to_dict()
    assert data["images"] == ["images/rf-000001_img1.png", "images/rf-000001_img2.png"]
    assert data["answer"] == "B"
    assert list(data["reasoning"]) == ["summary", "caption", "text2region", "region2region", "conclusion"]
    assert Instance.from_dict(data) == toy_instance


def test_instance_properties(toy_instance):
    assert toy_instance.question == "Which statement is true?"
    assert toy_instance.mcq.answer_text == "red right of blue"


def test_missing_reasoning_steps_become_empty():
    steps = ReasoningSteps.from_dict({"summary": "s"})
    assert steps.as_list() == ["s", "", "", "", ""]


@pytest.mark.parametrize("drop", ["id", "segments", "options", "question"])
def test_malformed_record(toy_instance, drop):
    data = toy_instance.to_dict()
    del data[drop]
    with pytest.raises(QAError) as exc:
        Instance.from_dict(data)
    assert exc.value.code == ErrorCode.QA_VALIDATION_FAILURE
