"""Message channel: command grammar, segmentation round-trip, rendering."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtutor.assessment import Phase
from mtutor.channel import (
    MAX_SEGMENTS,
    SEGMENT_LIMIT,
    Answer,
    Help,
    Next,
    Segment,
    Start,
    Status,
    Unknown,
    is_printable_text,
    parse_command,
    reassemble,
    render_prompt,
    segment_text,
)
from mtutor.errors import (
    DuplicateSegment,
    EmptyPayload,
    InconsistentTotal,
    MissingSegment,
    NonPrintable,
    TooLong,
)
from mtutor.learner import ConceptStatus, KnowledgeLevel
from mtutor.session import ContentPage, PhaseResult, QuestionPrompt, SessionResult

PRINTABLE = [chr(c) for c in range(0x20, 0x7F)] + ["\n"]


# -- command grammar ----------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("a", Answer("A")),
    (" B ", Answer("B")),
    ("d", Answer("D")),
    ("next", Next()),
    ("NEXT", Next()),
    (" status\n", Status()),
    ("Help", Help()),
    ("START", Start("")),
    ("start c-moon", Start("c-moon")),
    ("Start  C-Moon  ", Start("C-Moon")),
    ("E", Unknown("E")),
    ("startle", Unknown("startle")),
    ("A B", Unknown("A B")),
    ("", Unknown("")),
    ("??", Unknown("??")),
])
def test_parse_command(text, expected):
    assert parse_command(text) == expected


def test_parse_command_never_raises_on_garbage():
    for raw in ("\x00\x01", "\n\n\n", "a" * 10_000, "START " + "\t"):
        parse_command(raw)   # total function: must not raise


# -- printable model ----------------------------------------------------------------

def test_printable_model():
    assert is_printable_text("Hello, world!\nLine 2 ~")
    assert not is_printable_text("tab\there")
    assert not is_printable_text("emoji \N{SNOWMAN}")
    assert not is_printable_text("ctl\x01")
    assert is_printable_text("")


# -- segmentation -------------------------------------------------------------------

def test_short_text_single_headerless_segment():
    text = "x" * SEGMENT_LIMIT
    segs = segment_text(text)
    assert segs == [Segment(index=1, total=1, payload=text)]


def test_161_chars_split_156_5():
    text = "a" * 161
    segs = segment_text(text)
    assert len(segs) == 2
    assert segs[0].payload == "1/2 " + "a" * 156
    assert segs[1].payload == "2/2 " + "a" * 5
    assert all(len(s.payload) <= SEGMENT_LIMIT for s in segs)
    assert reassemble(segs) == text


def test_segmentation_minimal_part_count():
    # 2 parts carry 312 chars; 313 must spill into 3.
    assert len(segment_text("b" * 312)) == 2
    assert len(segment_text("b" * 313)) == 3


def test_segment_custom_limit():
    segs = segment_text("abcdefghijk", limit=10)
    assert [s.payload for s in segs] == ["1/2 abcdef", "2/2 ghijk"]


def test_segment_rejects_empty_nonprintable_and_huge():
    with pytest.raises(EmptyPayload):
        segment_text("")
    with pytest.raises(NonPrintable):
        segment_text("bad\ttab")
    with pytest.raises(TooLong):
        segment_text("z" * 20_000)


def test_max_segmentable_length_round_trips():
    capacity = sum(SEGMENT_LIMIT - len(f"{i}/{MAX_SEGMENTS} ")
                   for i in range(1, MAX_SEGMENTS + 1))
    text = "m" * capacity
    assert reassemble(segment_text(text)) == text
    with pytest.raises(TooLong):
        segment_text("m" * (capacity + 1))


# -- reassembly ---------------------------------------------------------------------

def test_reassemble_any_order():
    text = "The quick brown fox. " * 30
    segs = segment_text(text)
    shuffled = list(segs)
    random.Random(5).shuffle(shuffled)
    assert reassemble(shuffled) == text


def test_reassemble_single_segment_verbatim():
    assert reassemble([Segment(1, 1, "short text")]) == "short text"


def test_reassemble_error_cases():
    segs = segment_text("q" * 400)
    with pytest.raises(EmptyPayload):
        reassemble([])
    with pytest.raises(MissingSegment) as err:
        reassemble(segs[:-1])
    assert err.value.details["index"] == len(segs)
    with pytest.raises(DuplicateSegment):
        reassemble(segs + [segs[0]])
    with pytest.raises(InconsistentTotal):
        reassemble([segs[0], Segment(2, 9, "2/9 x")])
    with pytest.raises(InconsistentTotal):
        reassemble([Segment(5, 2, "5/2 x"), segs[1]])
    with pytest.raises(InconsistentTotal):
        bad = Segment(segs[0].index, segs[0].total, "9/9 " + segs[0].payload[4:])
        reassemble([bad] + segs[1:])


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=st.sampled_from(PRINTABLE), min_size=1, max_size=2500))
def test_round_trip_property(text):
    segs = segment_text(text)
    assert all(len(s.payload) <= SEGMENT_LIMIT for s in segs)
    assert reassemble(segs) == text
    assert len(segs) == 1 or all(
        s.payload.startswith(f"{s.index}/{s.total} ") for s in segs)


# -- rendering ----------------------------------------------------------------------

def test_render_question():
    p = QuestionPrompt(question_id="q1", text="Which one?", choices=("x", "y", "z"))
    assert render_prompt(p) == "Which one?\nA) x\nB) y\nC) z\nReply A-D"


def test_render_content_page():
    p = ContentPage(text="Some body text.", page=2, pages=3)
    assert render_prompt(p) == "Some body text.\n(p 2/3) Reply NEXT"


def test_render_phase_result():
    p = PhaseResult(phase=Phase.POST_TEST, score=70, level=KnowledgeLevel.GOOD)
    assert render_prompt(p) == "Post-test: 70/100 (Good)"
    p = PhaseResult(phase=Phase.PRE_TEST, score=86, level=KnowledgeLevel.EXCELLENT)
    assert render_prompt(p) == "Pre-test: 86/100 (Excellent)"


def test_render_session_result():
    assert render_prompt(SessionResult(ConceptStatus.COMPLETED, KnowledgeLevel.GOOD)) \
        == "Concept completed: Good"
    assert render_prompt(SessionResult(ConceptStatus.SKIPPED, KnowledgeLevel.EXCELLENT)) \
        == "Concept skipped: Excellent"
    assert render_prompt(SessionResult(ConceptStatus.DEFERRED, KnowledgeLevel.WEAK)) \
        == "Concept deferred: Weak"
    assert render_prompt(SessionResult(ConceptStatus.DEFERRED, None)) == "Concept deferred"


def test_render_rejects_non_prompt():
    with pytest.raises(ValueError):
        render_prompt("not a prompt")
