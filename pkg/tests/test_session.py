"""Elicitation protocol tests: phases, validation, persistence, derivation."""

import pytest

from nearopt import attributes as attrs
from nearopt import mavt, session


def two_objective_catalog():
    specs = [
        attrs.AttributeSpec(id="cost", name="Cost", unit="EUR", direction="lower",
                            basis="generation", aggregation="sum", decomposable=True,
                            uncertainty="normal", objective="economic"),
        attrs.AttributeSpec(id="area", name="Area", unit="m2", direction="lower",
                            basis="capacity", aggregation="sum", decomposable=True,
                            uncertainty="normal", objective="campus"),
        attrs.AttributeSpec(id="diversity", name="Diversity", unit="-", direction="higher",
                            basis="systemic", aggregation="shannon", decomposable=False,
                            uncertainty="normal", objective="economic"),
    ]
    coeffs = {"cost": {"t": 1.0}, "area": {"t": 1.0}}
    return attrs.AttributeCatalog(attributes=tuple(specs), coefficients=coeffs,
                                  expert_ranges={})


def ranges_for(catalog):
    out = {}
    for a in catalog.attributes:
        if a.direction == "lower":
            out[a.id] = attrs.AttributeRange(low=0.0, high=100.0, worst=100.0, best=0.0)
        else:
            out[a.id] = attrs.AttributeRange(low=0.0, high=100.0, worst=0.0, best=100.0)
    return out


@pytest.fixture()
def fresh():
    catalog = two_objective_catalog()
    ranges = ranges_for(catalog)
    sess = session.new_session("s-test-001", "sh_test", catalog, ranges,
                               bisection_depth=3, compensation_probes=2)
    return sess, catalog, ranges


def test_first_question_is_rank_order(fresh):
    sess, _, _ = fresh
    q = sess.next_question()
    assert q["type"] == "rank-order"
    assert [a["id"] for a in q["attributes"]] == ["cost", "area", "diversity"]


def test_rank_order_must_be_permutation(fresh):
    sess, _, _ = fresh
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "rank-order", "order": ["cost", "area"]})
    assert sess.phase == session.PHASE_RANKING  # unchanged after rejection


def test_wrong_answer_type_rejected(fresh):
    sess, _, _ = fresh
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "swing-rating", "rating": 50})


def run_swing(sess, order, ratings):
    sess.submit_answer({"type": "rank-order", "order": order})
    for attr in order[1:]:
        sess.submit_answer({"type": "swing-rating", "rating": ratings[attr]})


def test_rating_ceiling_enforced(fresh):
    sess, _, _ = fresh
    sess.submit_answer({"type": "rank-order", "order": ["cost", "area", "diversity"]})
    q = sess.next_question()
    assert q["type"] == "swing-rating" and q["attribute"] == "area"
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "swing-rating", "rating": 120.0})
    sess.submit_answer({"type": "swing-rating", "rating": 60.0})
    # next rating may not exceed the previous one (rank-order consistency)
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "swing-rating", "rating": 80.0})


def test_full_protocol_produces_valid_preferences(fresh):
    sess, catalog, ranges = fresh
    run_swing(sess, ["cost", "area", "diversity"], {"area": 60.0, "diversity": 40.0})
    # designated attributes: best of each objective -> cost (economic), area (campus)
    assert sess.phase == session.PHASE_BISECTION
    assert sess.savf_queue == ["cost", "area"]
    # cost: lower better, worst 100 -> best 0; concave answers
    for state in (40.0, 75.0, 15.0):  # targets 0.5, 0.25, 0.75
        sess.submit_answer({"type": "bisection", "state": state})
    for state in (50.0, 75.0, 25.0):  # linear-ish answers for area
        sess.submit_answer({"type": "bisection", "state": state})
    assert sess.phase == session.PHASE_COMPENSATION
    sess.submit_answer({"type": "compensation", "response": "reject"})
    sess.submit_answer({"type": "compensation", "response": "reject"})
    assert sess.phase == session.PHASE_COMPLETE
    assert sess.gamma == 0.2

    record = sess.answers_record()
    assert record["ratings"] == {"cost": 100.0, "area": 60.0, "diversity": 40.0}
    zs = dict(record["savf_midpoints_z"])
    assert [z for z, _ in zs["cost"]] == pytest.approx([0.6, 0.25, 0.85])
    prefs = sess.preferences(ranges, catalog)
    assert sum(prefs.weights.values()) == pytest.approx(1.0)
    assert prefs.weights["cost"] == pytest.approx(0.5)
    vf = prefs.value_functions["cost"]
    assert vf.value(100.0) == 0.0 and vf.value(0.0) == 1.0


def test_bisection_rejects_state_outside_interval(fresh):
    sess, _, _ = fresh
    run_swing(sess, ["cost", "area", "diversity"], {"area": 60.0, "diversity": 40.0})
    q = sess.next_question()
    assert q["type"] == "bisection"
    assert q["target_value"] == 0.5
    assert sorted(q["interval"]) == [0.0, 100.0]
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "bisection", "state": 150.0})
    sess.submit_answer({"type": "bisection", "state": 40.0})
    q = sess.next_question()
    assert q["target_value"] == 0.25
    assert sorted(q["interval"]) == [40.0, 100.0]  # between worst and the mid state
    with pytest.raises(session.AnswerRejected):
        sess.submit_answer({"type": "bisection", "state": 30.0})  # outside (40, 100)


def test_compensation_gamma_mapping():
    cases = [
        (["accept", "accept"], 1.0),
        (["reject", "reject"], 0.2),
        (["accept", "reject"], 0.2),
        (["reject", "strong-reject"], 0.0),
    ]
    for answers, expected in cases:
        catalog = two_objective_catalog()
        ranges = ranges_for(catalog)
        sess = session.new_session("s", "sh", catalog, ranges, bisection_depth=1)
        run_swing(sess, ["cost", "area", "diversity"], {"area": 60.0, "diversity": 40.0})
        sess.submit_answer({"type": "bisection", "state": 40.0})
        sess.submit_answer({"type": "bisection", "state": 50.0})
        for r in answers:
            sess.submit_answer({"type": "compensation", "response": r})
        assert sess.gamma == expected, answers


def test_declined_attribute_skips_designation():
    catalog = two_objective_catalog()
    ranges = ranges_for(catalog)
    sess = session.new_session("s", "sh", catalog, ranges, bisection_depth=1)
    run_swing(sess, ["cost", "area", "diversity"], {"area": 0.0, "diversity": 40.0})
    # area declined: campus objective has no designated attribute
    assert sess.savf_queue == ["cost"]


def test_serialisation_round_trip_resumes_identically(fresh):
    sess, _, _ = fresh
    run_swing(sess, ["cost", "area", "diversity"], {"area": 60.0, "diversity": 40.0})
    sess.submit_answer({"type": "bisection", "state": 40.0})
    snapshot = sess.to_dict()
    restored = session.ElicitationSession.from_dict(snapshot)
    assert restored.next_question() == sess.next_question()
    assert restored.phase == sess.phase
    # the restored session continues the protocol normally
    restored.submit_answer({"type": "bisection", "state": 70.0})
    assert restored.next_question()["target_value"] == 0.75


def test_completed_session_rejects_more_answers(fresh):
    sess, _, _ = fresh
    run_swing(sess, ["cost", "area", "diversity"], {"area": 0.0, "diversity": 0.0})
    sess.submit_answer({"type": "bisection", "state": 40.0})
    sess.submit_answer({"type": "bisection", "state": 70.0})
    sess.submit_answer({"type": "bisection", "state": 15.0})
    sess.submit_answer({"type": "compensation", "response": "accept"})
    sess.submit_answer({"type": "compensation", "response": "accept"})
    assert sess.phase == session.PHASE_COMPLETE
    assert sess.next_question() is None
    with pytest.raises(session.SessionError):
        sess.submit_answer({"type": "compensation", "response": "accept"})


def test_answers_record_feeds_preferences_builder(fresh):
    sess, catalog, ranges = fresh
    run_swing(sess, ["cost", "area", "diversity"], {"area": 50.0, "diversity": 50.0})
    for state in (40.0, 75.0, 15.0):
        sess.submit_answer({"type": "bisection", "state": state})
    for state in (50.0, 75.0, 25.0):
        sess.submit_answer({"type": "bisection", "state": state})
    sess.submit_answer({"type": "compensation", "response": "accept"})
    sess.submit_answer({"type": "compensation", "response": "accept"})
    prefs = mavt.preferences_from_answers(sess.answers_record(), ranges, catalog)
    assert prefs.gamma == 1.0
    assert prefs.weights == pytest.approx({"cost": 0.5, "area": 0.25, "diversity": 0.25})
