import pytest
from hypothesis import given, strategies as st

from rulefst.errors import DataError
from rulefst.rules import match_rules
from rulefst.serialize import (
    CARI,
    apply_rules_fcfs,
    read_examples_tsv,
    serialize_cari,
    serialize_downstream,
    serialize_example,
    serialize_nr,
    serialize_rb,
    serialize_rcat,
    write_examples_tsv,
)
from rulefst.rules import load_rules
from rulefst.text import SEP, tokenize

from conftest import AMBIG_SENTENCE

X_TOKENS = tokenize(AMBIG_SENTENCE)
# always , always they think i an extro , but im a big intro actually
FCFS_WRONG = tokenize("always, always they think i an extra, but im a big introduction actually")


@pytest.fixture
def rules(demo_rules_path):
    return load_rules(demo_rules_path)


# ---- NR --------------------------------------------------------------------


def test_nr_identity():
    ex = serialize_nr(["hello"], ["hello", "."])
    assert ex.input == ("hello",)
    assert ex.target == ("hello", ".")


def test_nr_ambiguous_sentence_unchanged():
    ex = serialize_nr(X_TOKENS, [])
    assert ex.input == tuple(X_TOKENS)


@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=8))
def test_nr_is_identity_on_input(x):
    assert serialize_nr(x, []).input == tuple(x)


def test_nr_empty_source_rejected():
    with pytest.raises(DataError):
        serialize_nr([], ["y"])


# ---- FCFS ------------------------------------------------------------------


def test_fcfs_picks_first_alternatives(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    assert apply_rules_fcfs(X_TOKENS, matches) == FCFS_WRONG


def test_fcfs_no_matches_is_identity(rules):
    tokens = ["nothing", "to", "change"]
    assert apply_rules_fcfs(tokens, match_rules(tokens, rules, 2)) == tokens


def test_fcfs_overlap_earlier_wins():
    from rulefst.rules import Rule, RuleSet

    rules = RuleSet(
        (
            Rule("r_ab", ("a", "b"), (("X",),)),
            Rule("r_bc", ("b", "c"), (("Y",),)),
        )
    )
    tokens = ["a", "b", "c"]
    assert apply_rules_fcfs(tokens, match_rules(tokens, rules, 0)) == ["X", "c"]


def test_fcfs_deterministic(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    assert apply_rules_fcfs(X_TOKENS, matches) == apply_rules_fcfs(X_TOKENS, matches)


# ---- RB / RCAT -------------------------------------------------------------


def test_rb_uses_fcfs_rewrite(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    ex = serialize_rb(X_TOKENS, matches, ["y"])
    assert ex.input == tuple(FCFS_WRONG)


def test_rcat_format():
    ex = serialize_rcat(["u", "ok"], ["you", "ok"], ["y"])
    assert ex.input == ("u", "ok", SEP, "you", "ok")
    assert not ex.truncated


def test_rcat_no_matches_duplicates_source():
    ex = serialize_rcat(["x", "y"], ["x", "y"], [])
    assert ex.input == ("x", "y", SEP, "x", "y")


def test_rcat_ambiguous_sentence(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    x_prime = apply_rules_fcfs(X_TOKENS, matches)
    ex = serialize_rcat(X_TOKENS, x_prime, [])
    assert ex.input == tuple(X_TOKENS) + (SEP,) + tuple(FCFS_WRONG)


def test_rcat_truncates_supplement_tail():
    ex = serialize_rcat(["a", "b"], ["c", "d", "e"], [], max_len=5)
    assert ex.input == ("a", "b", SEP, "c", "d")
    assert ex.truncated


def test_rcat_source_too_long_errors():
    with pytest.raises(DataError):
        serialize_rcat(["a"] * 6, ["b"], [], max_len=5)


# ---- CARI ------------------------------------------------------------------

CARI_W2_SUBSTITUTED = tuple(
    X_TOKENS
    + [SEP, "i", "an", "extra", ",", "but"]
    + [SEP, "i", "an", "extrovert", ",", "but"]
    + [SEP, "a", "big", "introduction", "actually"]
    + [SEP, "a", "big", "introvert", "actually"]
)

CARI_W2_LITERAL = tuple(
    X_TOKENS
    + [SEP, "extra", "i", "an", ",", "but"]
    + [SEP, "extrovert", "i", "an", ",", "but"]
    + [SEP, "introduction", "a", "big", "actually"]
    + [SEP, "introvert", "a", "big", "actually"]
)

CARI_W0 = tuple(X_TOKENS + [SEP, "extra", SEP, "extrovert", SEP, "introduction", SEP, "introvert"])


def test_cari_substituted_w2(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    ex = serialize_cari(X_TOKENS, matches, w=2)
    assert ex.input == CARI_W2_SUBSTITUTED
    assert not ex.truncated


def test_cari_literal_w2(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    ex = serialize_cari(X_TOKENS, matches, w=2, segment_mode="literal")
    assert ex.input == CARI_W2_LITERAL


def test_cari_w0_segments_are_bare_alternatives(rules):
    matches = match_rules(X_TOKENS, rules, w=0)
    for mode in ("substituted", "literal"):
        ex = serialize_cari(X_TOKENS, matches, w=0, segment_mode=mode)
        assert ex.input == CARI_W0


def test_cari_no_matches_no_sep(rules):
    tokens = ["plain", "words"]
    ex = serialize_cari(tokens, match_rules(tokens, rules, 2), w=2)
    assert ex.input == ("plain", "words")
    assert SEP not in ex.input


def test_cari_segment_count(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    ex = serialize_cari(X_TOKENS, matches, w=2)
    n_segments = ex.input.count(SEP)
    assert n_segments == sum(len(m.alternatives) for m in matches)


def test_cari_truncation_drops_whole_tail_segments(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    # room for the source (15 tokens) plus exactly two 6-token segments
    ex = serialize_cari(X_TOKENS, matches, w=2, max_len=15 + 12)
    assert ex.truncated
    assert ex.input == CARI_W2_SUBSTITUTED[: 15 + 12]
    assert ex.input.count(SEP) == 2


def test_cari_never_truncates_source(rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    ex = serialize_cari(X_TOKENS, matches, w=2, max_len=len(X_TOKENS))
    assert ex.input == tuple(X_TOKENS)
    assert ex.truncated
    with pytest.raises(DataError):
        serialize_cari(X_TOKENS, matches, w=2, max_len=len(X_TOKENS) - 1)


def test_cari_unknown_segment_mode(rules):
    with pytest.raises(DataError):
        serialize_cari(X_TOKENS, match_rules(X_TOKENS, rules, 2), w=2, segment_mode="inline")


def test_cari_prefix_preserves_source_all_windows(rules):
    for w in range(5):
        matches = match_rules(X_TOKENS, rules, w=w)
        ex = serialize_cari(X_TOKENS, matches, w=w)
        head = ex.input[: ex.input.index(SEP)] if SEP in ex.input else ex.input
        assert head == tuple(X_TOKENS)


# ---- downstream ------------------------------------------------------------


def test_downstream_format():
    assert serialize_downstream(["u", "ok"], ["are", "you", "ok", "?"]) == (
        "u",
        "ok",
        SEP,
        "are",
        "you",
        "ok",
        "?",
    )


def test_downstream_same_text():
    assert serialize_downstream(["x"], ["x"]) == ("x", SEP, "x")


def test_downstream_empty_rejected():
    with pytest.raises(DataError):
        serialize_downstream([], ["x"])


# ---- dispatch + tsv --------------------------------------------------------


def test_serialize_example_dispatch(rules):
    y = ["anything"]
    for method, expected in [
        ("NR", tuple(X_TOKENS)),
        ("RB", tuple(FCFS_WRONG)),
        ("RCAT", tuple(X_TOKENS) + (SEP,) + tuple(FCFS_WRONG)),
        ("CARI", CARI_W2_SUBSTITUTED),
    ]:
        ex = serialize_example(method, X_TOKENS, y, rules, w=2)
        assert ex.input == expected, method
        assert ex.target == tuple(y)


def test_serialize_example_unknown_method(rules):
    with pytest.raises(DataError):
        serialize_example("XYZ", X_TOKENS, [], rules, w=2)


def test_tsv_round_trip(tmp_path, rules):
    matches = match_rules(X_TOKENS, rules, w=2)
    examples = [
        serialize_cari(X_TOKENS, matches, w=2, y=["fine", "."]),
        serialize_nr(["u", "ok"], ["are", "you", "ok"]),
    ]
    path = tmp_path / "data.tsv"
    write_examples_tsv(examples, path)
    loaded = read_examples_tsv(path, method=CARI)
    assert [e.input for e in loaded] == [e.input for e in examples]
    assert [e.target for e in loaded] == [e.target for e in examples]
