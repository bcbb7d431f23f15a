"""Acceptance suite: one labeled test per shipped guarantee.

Each test checks its own runtime budget with time.perf_counter and states
its numeric tolerance inline. The terminal summary prints one PASS/FAIL
line per criterion (see conftest).
"""

from __future__ import annotations

import json
import math
import random
import time
from pathlib import Path

import pytest

from mockcfg import base_config
from test_metrics import (
    brute_force_metrics,
    brute_force_rank_correlations,
    random_outcomes,
)

from kgfact.backends.base import NliLabel, NliVerdict
from kgfact.backends.mock import (
    HashEmbeddingBackend,
    MockAbstentionJudge,
    MockTranslator,
    ScriptedChatBackend,
    StaticNliBackend,
)
from kgfact.backends.roles import (
    ABSTENTION_DETECTOR,
    EXPERT,
    FACT_TRANSLATOR,
    LLM_ENTAILMENT,
    RoleBinding,
)
from kgfact.config import build_runtime, load_run_config
from kgfact.difficulty import (
    CalibrationRecord,
    DifficultyInputs,
    calibrate,
    load_weight_table,
    question_difficulty,
)
from kgfact.errors import AllAbstained, NoAlignedResponses
from kgfact.harness import run_assessment
from kgfact.metrics import (
    abstain_rate,
    accuracy,
    assessment_difficulty,
    build_report,
    classification_distribution,
    fact_halu_distribution,
    halu_bok,
    halu_dok,
    rank_correlations,
    weighted_accuracy,
)
from kgfact.runlog import read_run_log, record_outcome
from kgfact.textsim import token_set_similarity
from kgfact.verification import (
    DecidingStage,
    EntityClassification,
    FactOutcome,
    Verifier,
    entity_similarity,
)

DATA_DIR = Path(__file__).parent / "data"

NLI_VERDICTS = {
    NliLabel.ENTAILMENT: NliVerdict(NliLabel.ENTAILMENT, 0.9, 0.05, 0.05),
    NliLabel.NEUTRAL: NliVerdict(NliLabel.NEUTRAL, 0.1, 0.8, 0.1),
    NliLabel.CONTRADICTION: NliVerdict(NliLabel.CONTRADICTION, 0.05, 0.05, 0.9),
}


def make_verifier(nli_verdict, llm_reply, expert_reply):
    """Fresh verifier whose three judging stages give fixed answers."""
    entailment = ScriptedChatBackend({}, default=llm_reply)
    expert = ScriptedChatBackend({}, default=expert_reply)
    verifier = Verifier(
        abstention=RoleBinding.with_defaults(ABSTENTION_DETECTOR, MockAbstentionJudge(), "m"),
        translator=RoleBinding.with_defaults(FACT_TRANSLATOR, MockTranslator(), "m"),
        entailment=RoleBinding.with_defaults(LLM_ENTAILMENT, entailment, "m"),
        expert=RoleBinding.with_defaults(EXPERT, expert, "m"),
        embedder=HashEmbeddingBackend(dimension=48, seed=7),
        nli=StaticNliBackend(default=nli_verdict),
    )
    return verifier, entailment, expert


@pytest.mark.acceptance("sigmoid formula suite")
def test_sigmoid_formula_suite():
    start = time.perf_counter()

    # Equal complexity and popularity sit exactly at the midpoint.
    for i in range(101):
        v = i / 100
        assert question_difficulty(DifficultyInputs(v, v)) == 0.5
    rng = random.Random(4201)
    for _ in range(100):
        v = rng.random()
        assert question_difficulty(DifficultyInputs(v, v), alpha=rng.uniform(0.5, 20)) == 0.5

    # Known point: alpha 5, maximal complexity gap. Tolerance 1e-5.
    assert abs(question_difficulty(DifficultyInputs(1.0, 0.0), alpha=5.0) - 0.99331) < 1e-5

    # Monotone in complexity, antitone in popularity, over 10k random grids.
    for _ in range(10_000):
        ep = rng.random()
        a, b = sorted((rng.random(), rng.random()))
        if a != b:
            assert question_difficulty(DifficultyInputs(a, ep)) < question_difficulty(
                DifficultyInputs(b, ep)
            )
        q = rng.random()
        c, d = sorted((rng.random(), rng.random()))
        if c != d:
            assert question_difficulty(DifficultyInputs(q, c)) > question_difficulty(
                DifficultyInputs(q, d)
            )

    assert time.perf_counter() - start < 1.0


@pytest.mark.acceptance("similarity blend suite")
def test_similarity_blend_suite():
    start = time.perf_counter()

    # Exact 70/30 blend over the full hundredth grid (equality, no tolerance).
    for i in range(101):
        s = i / 100
        for j in range(101):
            t = j / 100
            assert entity_similarity(s, t) == 0.7 * s + 0.3 * t

    # Reordering tokens never costs anything under the token-set view.
    assert token_set_similarity(
        "the quiet harbor museum opened early", "early opened museum harbor quiet the"
    ) == 1.0

    # A side with no tokens scores zero.
    assert token_set_similarity("", "stone exhibition building") == 0.0
    assert token_set_similarity("stone exhibition building", "") == 0.0
    assert token_set_similarity("", "") == 0.0

    assert time.perf_counter() - start < 5.0


@pytest.mark.acceptance("fact-pipeline state machine")
def test_fact_pipeline_state_machine():
    start = time.perf_counter()

    def expected(nli_label, llm_reply, expert_reply):
        if nli_label is NliLabel.ENTAILMENT:
            return FactOutcome.CORRECT, DecidingStage.NLI
        if llm_reply in ("CONTRADICTED", "NOT MENTIONED"):
            return FactOutcome.INCORRECT, DecidingStage.LLM
        if nli_label is NliLabel.NEUTRAL:
            return FactOutcome.CORRECT, DecidingStage.LLM
        if expert_reply == "Expert 1":
            return FactOutcome.CORRECT, DecidingStage.EXPERT
        return FactOutcome.INCORRECT, DecidingStage.EXPERT

    paths = 0
    for nli_label, nli_verdict in NLI_VERDICTS.items():
        for llm_reply in ("EXPLICITLY STATED", "CONTRADICTED", "NOT MENTIONED"):
            for expert_reply in ("Expert 1", "Expert 2"):
                verifier, entailment, expert = make_verifier(nli_verdict, llm_reply, expert_reply)
                verdict = verifier.verify_fact(
                    "P571", "Alder Hall's inception was 1901.", "Alder Hall opened long ago."
                )
                want_outcome, want_stage = expected(nli_label, llm_reply, expert_reply)
                assert verdict.outcome is want_outcome
                assert verdict.deciding_stage is want_stage
                assert verdict.nli_label is nli_label
                # Stage reachability: entailment short-circuits every chat
                # call; the expert is consulted exactly once when reached.
                if want_stage is DecidingStage.NLI:
                    assert entailment.calls == [] and expert.calls == []
                elif want_stage is DecidingStage.LLM:
                    assert len(entailment.calls) == 1 and expert.calls == []
                else:
                    assert len(entailment.calls) == 1 and len(expert.calls) == 1
                paths += 1
    assert paths == 18

    assert time.perf_counter() - start < 1.0


@pytest.mark.acceptance("scoring and metrics oracle")
def test_scoring_and_metrics_oracle():
    start = time.perf_counter()

    rng = random.Random(90210)

    def close(actual, want):
        # Tolerance: 1e-9 relative (1e-12 absolute floor for zero values).
        if want is None:
            assert actual is None
        else:
            assert actual == pytest.approx(want, rel=1e-9, abs=1e-12)

    for _ in range(200):
        outcomes = random_outcomes(rng)
        want = brute_force_metrics(outcomes)
        close(accuracy(outcomes), want["accuracy"])
        close(abstain_rate(outcomes), want["abstain_rate"])
        try:
            bok = halu_bok(outcomes)
        except AllAbstained:
            bok = None
        close(bok, want["halu_bok"])
        try:
            dok = halu_dok(outcomes)
        except NoAlignedResponses:
            dok = None
        close(dok, want["halu_dok"])
        close(halu_dok(outcomes, variant="all"), want["halu_dok_all"])
        dist = classification_distribution(outcomes)
        for key, value in want["classification_distribution"].items():
            close(dist[key], value)
        fact_dist = fact_halu_distribution(outcomes)
        if want["fact_halu_distribution"] is None:
            assert fact_dist is None
        else:
            for got, expected in zip(fact_dist, want["fact_halu_distribution"]):
                close(got, expected)
        # Difficulty-weighted accuracy against a plain-sum recomputation.
        reference = rng.uniform(0.05, 0.95)
        qd_brute = sum(o.q_d for o in outcomes) / len(outcomes)
        raw = want["accuracy"] * qd_brute / reference
        wa = weighted_accuracy(accuracy(outcomes), assessment_difficulty(outcomes), reference)
        close(wa.value, min(100.0, raw))
        assert wa.capped == (raw > 100.0)

    assert time.perf_counter() - start < 5.0


@pytest.mark.acceptance("calibration oracle")
def test_calibration_oracle():
    start = time.perf_counter()

    prior = load_weight_table()
    records = [
        CalibrationRecord("T_A", ("r1", "r2", "r3"), 3, 0.25),
        CalibrationRecord("T_A", ("r1", "r2", "r4"), 0, 0.75),
        CalibrationRecord("T_B", ("s1", "s2", "s3"), 3, 0.5),
        CalibrationRecord("T_B", ("s1", "s2", "s3"), 3, 0.5),
        CalibrationRecord("T_C", ("u1", "u2", "u3"), 0, 0.5),
    ]
    table, flags = calibrate(records, prior)

    # Hand computation, asserted exactly. Type means are 1.5 / 3.0 / 0.0,
    # so min-max gives 0.5 / 1.0 / 0.0.
    assert table.type_weights["T_A"] == 0.5
    assert table.type_weights["T_B"] == 1.0
    assert table.type_weights["T_C"] == 0.0
    # T_A relation means 1.5 / 1.5 / 3.0 / 0.0 min-max to 0.5 / 0.5 / 1.0 / 0.0,
    # then invert: a low-scoring relation carries a high weight.
    assert table.relation_weights["T_A"] == {"r1": 0.5, "r2": 0.5, "r3": 0.0, "r4": 1.0}
    # All-equal relation means collapse to 0.5 and are flagged.
    assert table.relation_weights["T_B"] == {"s1": 0.5, "s2": 0.5, "s3": 0.5}
    assert table.relation_weights["T_C"] == {"u1": 0.5, "u2": 0.5, "u3": 0.5}
    for rel in ("s1", "s2", "s3"):
        assert f"relation:T_B/{rel}:insufficient_data" in flags
    for rel in ("u1", "u2", "u3"):
        assert f"relation:T_C/{rel}:insufficient_data" in flags
    assert table.avg_qd == 0.5
    # No record carried statistics, so the popularity bounds stay put.
    assert "ep_norm_bounds:insufficient_data" in flags
    assert table.ep_norm_bounds == prior.ep_norm_bounds
    # Unobserved prior types keep their weights and are flagged.
    for type_id, weight in prior.type_weights.items():
        assert table.type_weights[type_id] == weight
        assert f"type:{type_id}:no_observations" in flags

    # Idempotence: recalibrating on the calibrated table changes nothing.
    again, again_flags = calibrate(records, table)
    assert again.to_dict() == table.to_dict()
    assert sorted(again_flags) == sorted(flags)

    assert time.perf_counter() - start < 5.0


@pytest.mark.acceptance("end-to-end determinism")
def test_end_to_end_determinism(tmp_path):
    def run_once(name: str, **overrides):
        base = tmp_path / name
        base.mkdir()
        config = base_config(base / "out", questions_per_run=150, **overrides)
        path = base / "config.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        runtime = build_runtime(load_run_config(path))
        begin = time.perf_counter()
        log_path = run_assessment(runtime)
        elapsed = time.perf_counter() - begin
        assert elapsed < 60.0
        return Path(log_path).read_bytes(), log_path

    first, log_path = run_once("a", max_concurrent_questions=8)
    second, _ = run_once("b", max_concurrent_questions=8)
    serial, _ = run_once("c", max_concurrent_questions=1)
    assert first == second
    assert first == serial

    outcomes = [record_outcome(r) for r in read_run_log(log_path)]
    assert len(outcomes) == 150
    report = build_report(outcomes, load_weight_table().avg_qd)

    # Structural invariants, tolerance 1e-9 absolute on percentage sums.
    assert math.fsum(report.classification_distribution.values()) == pytest.approx(
        100.0, abs=1e-9
    )
    assert report.fact_halu_distribution is not None
    assert math.fsum(report.fact_halu_distribution) == pytest.approx(100.0, abs=1e-9)

    # Accuracy decomposes into abstention credit plus aligned fact credit.
    n = len(outcomes)
    n_abstained = sum(
        1 for o in outcomes if o.classification is EntityClassification.ABSTAINED
    )
    n_aligned = sum(1 for o in outcomes if o.classification is EntityClassification.ALIGNED)
    assert report.halu_dok is not None
    decomposed = 100.0 * (n_abstained + 3 * n_aligned * (1 - report.halu_dok / 100.0)) / (3 * n)
    assert report.accuracy == pytest.approx(decomposed, rel=1e-9)


@pytest.mark.acceptance("rank-correlation oracle")
def test_rank_correlation_oracle():
    start = time.perf_counter()

    rng = random.Random(31337)

    def tied_series():
        while True:
            values = [rng.randint(0, 6) / 4 for _ in range(15)]
            if len(set(values)) >= 2:
                return values

    for _ in range(20):
        xs, ys = tied_series(), tied_series()
        got = rank_correlations(xs, ys)
        rho, tau = brute_force_rank_correlations(xs, ys)
        # Tolerance: 1e-9 against the quadratic concordance counter.
        assert got.spearman_rho == pytest.approx(rho, rel=1e-9, abs=1e-9)
        assert got.kendall_tau == pytest.approx(tau, rel=1e-9, abs=1e-9)

    assert time.perf_counter() - start < 5.0


@pytest.mark.acceptance("threshold sweep behavior")
def test_threshold_sweep_behavior():
    start = time.perf_counter()

    data = json.loads((DATA_DIR / "threshold_pairs.json").read_text("utf-8"))
    assert data["embedding"] == {"mock": "hash", "dimension": 48, "seed": 7}
    pairs = data["pairs"]
    assert len(pairs) == 50

    verifier, _, _ = make_verifier(NLI_VERDICTS[NliLabel.NEUTRAL], "NOT MENTIONED", "Expert 1")
    counts: dict[float, int] = {}
    for threshold in (0.700, 0.725, 0.750):
        aligned = 0
        for pair in pairs:
            verdict = verifier.classify_entity_level(
                "Tell me about this place.",
                pair["response"],
                pair["description"],
                threshold=threshold,
            )
            # Recorded similarities reproduce exactly from the frozen texts.
            assert verdict.semantic_sim == pair["semantic_sim"]
            assert verdict.token_sim == pair["token_sim"]
            assert verdict.entity_sim == pair["entity_sim"]
            aligned += verdict.classification is EntityClassification.ALIGNED
        assert aligned == sum(1 for p in pairs if p["entity_sim"] >= threshold)
        counts[threshold] = aligned

    # Raising the bar never admits more responses; this fixture spreads
    # pairs across the bands, so each step strictly tightens.
    assert counts[0.700] >= counts[0.725] >= counts[0.750]
    assert counts[0.700] > counts[0.725] > counts[0.750]
    assert counts[0.750] > 0

    assert time.perf_counter() - start < 5.0
