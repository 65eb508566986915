import pytest

from lfsearch.env import TaskKind
from lfsearch.errors import ParseError
from lfsearch.evaluator import PromptKind, fallback_payload, last_boxed, parse_response

P, V, AV, E = PromptKind.ACTION_PRIOR, PromptKind.STATE_VALUE, PromptKind.ACTION_VALUES, PromptKind.EXPLORE


def test_last_boxed_wins_and_nests():
    text = r"first \boxed{1} then \boxed{{\"a\": {\"b\": 2}}} done"
    assert last_boxed(text) == r'{\"a\": {\"b\": 2}}'


def test_unbalanced_last_falls_back_to_earlier():
    assert last_boxed(r"\boxed{ok} and \boxed{broken") == "ok"
    with pytest.raises(ParseError):
        last_boxed("no box here")


def test_plain_json_prior():
    out = parse_response(P, '\\boxed{{"operation_scores": {"0": 0.5, "1": 0.5}}}', [0, 1])
    assert out == {0: 0.5, 1: 0.5}


def test_prior_missing_indices_filled_and_renormalised():
    out = parse_response(P, '\\boxed{{"operation_scores": {"0": 0.95}}}', [0, 1, 2])
    assert out == {0: 1.0, 1: 0.0, 2: 0.0}


@pytest.mark.parametrize(
    "payload",
    [
        '{"0": 0.5, "1": 0.2}',   # sums to 0.7
        '{"0": 1.2, "1": -0.2}',  # negative weight
        '{"0": 0.5, "7": 0.5}',   # index not offered
        '{"zero": 1.0}',
        '[0.5, 0.5]',
    ],
)
def test_bad_priors(payload):
    with pytest.raises(ParseError):
        parse_response(P, '\\boxed{{"operation_scores": ' + payload + "}}", [0, 1])


def test_values_clamped_and_filled():
    out = parse_response(AV, '\\boxed{{"operation_values": {"0": 1.7, "1": -3}}}', [0, 1, 2])
    assert out == {0: 1.0, 1: 0.0, 2: 0.0}


def test_values_accept_either_field_name():
    a = parse_response(AV, '\\boxed{{"move_values": {"0": 0.2}}}', [0], TaskKind.COUNTDOWN)
    b = parse_response(AV, '\\boxed{{"operation_values": {"0": 0.2}}}', [0], TaskKind.SUDOKU)
    assert a == b == {0: 0.2}


def test_state_value_clamped_and_string_number():
    assert parse_response(V, '\\boxed{{"state_value_estimation": 3}}') == 1.0
    assert parse_response(V, '\\boxed{{"state_value_estimation": "0.25"}}') == 0.25
    with pytest.raises(ParseError):
        parse_response(V, '\\boxed{{"state_value_estimation": true}}')
    with pytest.raises(ParseError):
        parse_response(V, '\\boxed{{"value": 0.5}}')


def test_explore_strings():
    assert parse_response(E, '\\boxed{{"explore": "True"}}') is True
    with pytest.raises(ParseError):
        parse_response(E, '\\boxed{{"explore": 1}}')


def test_fallbacks():
    assert fallback_payload(P, [0, 1, 2, 3]) == {i: 0.25 for i in range(4)}
    assert fallback_payload(V) == 0.5
    assert fallback_payload(AV, [2, 5]) == {2: 0.5, 5: 0.5}
    assert fallback_payload(E) is False
