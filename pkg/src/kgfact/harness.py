"""End-to-end assessment runs plus the calibrate and report commands.

A run walks question indices 0..n-1, each independently seeded from
(config seed, run index, question index), so the entity a question lands
on never depends on scheduling. Records stream to a JSONL log in index
order; a crashed run leaves a dense prefix that --resume extends.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import replace
from pathlib import Path

from kgfact import prompts
from kgfact.config import Runtime
from kgfact.difficulty import (
    CalibrationRecord,
    DifficultyInputs,
    WeightTable,
    calibrate,
    entity_hallucination_complexity,
    entity_popularity,
    entity_relevance,
    load_weight_table,
    question_complexity,
    question_difficulty,
    save_weight_table,
)
from kgfact.errors import (
    BackendError,
    DescriptionMissing,
    EmptyRun,
    EndpointUnavailable,
    EntityNotFound,
    FatalBackendOutage,
    InsufficientData,
    MissingBirthDate,
)
from kgfact.kg.types import INCOMPLETE, EntityRecord
from kgfact.metrics import build_report, cross_run_summary
from kgfact.questions import QuestionSpec, build_question_spec, filter_and_prioritize
from kgfact.runlog import RunLogWriter, read_run_log, record_calibration, record_outcome
from kgfact.util import canonical_json, derive_seed
from kgfact.verification import EntityClassification, VerificationResult

log = logging.getLogger(__name__)


# -- acquisition -----------------------------------------------------------


def acquire_question(runtime: Runtime, run_seed: int, index: int) -> tuple[QuestionSpec, dict]:
    """Sample entities until one yields a full question; track rejections.

    Every batch seed derives from (run seed, question index, attempt), so
    concurrent questions draw independent batches and the outcome is the
    same under any worker count.
    """
    config = runtime.config
    rejected: list[dict] = []
    for attempt in range(config.max_sample_attempts):
        batch_seed = derive_seed(run_seed, "question", index, "batch", attempt)
        batch = runtime.kg.sample_random_entities(config.sample_batch_size, batch_seed)
        for candidate in filter_and_prioritize(batch):
            spec = _try_candidate(runtime, run_seed, index, candidate, rejected)
            if spec is not None:
                return spec, {"batches_sampled": attempt + 1, "rejected_candidates": rejected}
    raise InsufficientData(
        f"question {index}: no usable entity in "
        f"{config.max_sample_attempts} batches of {config.sample_batch_size}"
    )


def _try_candidate(
    runtime: Runtime,
    run_seed: int,
    index: int,
    candidate: EntityRecord,
    rejected: list[dict],
) -> QuestionSpec | None:
    def reject(reason: str) -> None:
        rejected.append({"entity_id": candidate.entity_id, "reason": reason})

    try:
        triples = runtime.kg.fetch_subgraph_triples(candidate.entity_id)
    except EntityNotFound:
        reject("no_subgraph")
        return None
    stats = runtime.kg.fetch_statistics(candidate.entity_id)
    if stats is INCOMPLETE:
        reject("incomplete_statistics")
        return None
    try:
        description = runtime.kg.fetch_description(candidate.entity_id)
    except DescriptionMissing:
        reject("missing_description")
        return None
    record = replace(candidate, statistics=stats, description=description)
    try:
        spec = build_question_spec(
            record,
            triples,
            runtime.table,
            runtime.weights,
            rng_seed=derive_seed(run_seed, "question", index, "triples", candidate.entity_id),
            question_index=index,
        )
    except MissingBirthDate:
        reject("missing_birth_date")
        return None
    if spec is None:
        reject("too_few_valid_triples")
        return None
    return spec


# -- difficulty at generation and after verification -------------------------


def _difficulty_fields(spec: QuestionSpec, weights: WeightTable) -> dict:
    relevance = entity_relevance(spec.focal.statistics, weights)
    type_weight = weights.type_weight(spec.focal.type_id)
    ep_norm = entity_popularity(relevance, type_weight, weights.mix)
    q_avg = question_complexity(spec.relation_weights)
    q_d = question_difficulty(DifficultyInputs(q_avg, ep_norm), weights.alpha)
    return {
        "entity_relevance": relevance,
        "type_weight": type_weight,
        "ep_norm": ep_norm,
        "q_avg": q_avg,
        "q_d": q_d,
    }


def _finalize_difficulty(
    fields: dict, spec: QuestionSpec, weights: WeightTable, hallucinated: bool
) -> dict:
    final_q_avg, final_q_d = fields["q_avg"], fields["q_d"]
    if hallucinated:
        substitute = entity_hallucination_complexity(spec.focal.type_id, weights)
        final_q_avg = substitute.q_avg
        final_q_d = question_difficulty(
            DifficultyInputs(final_q_avg, fields["ep_norm"]), weights.alpha
        )
    return {
        **fields,
        "final_q_avg": final_q_avg,
        "final_q_d": final_q_d,
        "hallucination_substituted": hallucinated,
    }


# -- record serialization -----------------------------------------------------


def _serialize_record(
    index: int,
    run_index: int,
    spec: QuestionSpec,
    acquisition: dict,
    response: str,
    result: VerificationResult,
    difficulty: dict,
) -> dict:
    focal = spec.focal
    verdict = result.entity_verdict
    return {
        "question_index": index,
        "run_index": run_index,
        "question": {
            "prompt": spec.prompt_text,
            "supplementary_context": spec.supplementary_context,
            "focal": {
                "entity_id": focal.entity_id,
                "type_id": focal.type_id,
                "type_class": focal.type_class.value,
                "label": focal.label,
                "statistics": list(focal.statistics.as_vector()),
                "description": focal.description,
            },
            "triples": [
                {
                    "relation_id": t.relation_id,
                    "relation_label": t.relation_label,
                    "fact_value": t.fact_value,
                    "tense": t.tense_indicator.value,
                }
                for t in spec.triples
            ],
            "relation_weights": list(spec.relation_weights),
        },
        "acquisition": acquisition,
        "response": response,
        "entity_verdict": {
            "classification": verdict.classification.value,
            "semantic_sim": verdict.semantic_sim,
            "token_sim": verdict.token_sim,
            "entity_sim": verdict.entity_sim,
            "threshold": verdict.threshold,
        },
        "fact_verdicts": [
            {
                "relation_id": v.relation_id,
                "golden_fact": v.golden_fact,
                "outcome": v.outcome.value,
                "deciding_stage": v.deciding_stage.value,
                "nli_label": v.nli_label.value,
                "llm_label": v.llm_label.value if v.llm_label else None,
                "flags": list(v.flags),
            }
            for v in result.fact_verdicts
        ],
        "score": {"points": result.score.points, "abstained": result.score.abstained},
        "difficulty": difficulty,
        "transcript": list(result.transcript),
    }


# -- run loop -----------------------------------------------------------------


def run_log_path(output_dir: Path, run_index: int) -> Path:
    return Path(output_dir) / f"run-{run_index:03d}.jsonl"


def _answer_one(runtime: Runtime, run_seed: int, run_index: int, index: int) -> dict:
    spec, acquisition = acquire_question(runtime, run_seed, index)
    fields = _difficulty_fields(spec, runtime.weights)
    response = runtime.subject.complete(spec.prompt_text, system_prompt=prompts.SYSTEM_PROMPT)
    entry = runtime.table.entry(spec.focal.type_id)
    result = runtime.verifier.verify_question(
        question=spec.prompt_text,
        response=response,
        description=spec.focal.description,
        entity_label=spec.focal.label,
        type_label=entry.label,
        triples=spec.triples,
    )
    hallucinated = (
        result.entity_verdict.classification is EntityClassification.HALLUCINATED
    )
    difficulty = _finalize_difficulty(fields, spec, runtime.weights, hallucinated)
    return _serialize_record(
        index, run_index, spec, acquisition, response, result, difficulty
    )


def _resume_start(log_path: Path) -> int:
    """Trim a torn tail, keep the dense prefix, and return its length."""
    if not log_path.exists():
        return 0
    completed = read_run_log(log_path, allow_partial_tail=True)
    log_path.write_text(
        "".join(canonical_json(r) + "\n" for r in completed), encoding="utf-8"
    )
    return len(completed)


def run_assessment(
    runtime: Runtime, run_index: int = 0, log_path: Path | None = None, resume: bool = False
) -> Path:
    """Answer and verify the full question budget for one run."""
    config = runtime.config
    config.output_dir.mkdir(parents=True, exist_ok=True)
    log_path = log_path or run_log_path(config.output_dir, run_index)
    if not resume and log_path.exists():
        log_path.unlink()
    start = _resume_start(log_path) if resume else 0
    if start >= config.questions_per_run:
        return log_path
    run_seed = derive_seed(config.seed, "run", run_index)
    with RunLogWriter(log_path, start_index=start) as writer:
        with ThreadPoolExecutor(max_workers=config.max_concurrent_questions) as pool:
            futures = [
                pool.submit(_run_one, runtime, run_seed, run_index, i, writer)
                for i in range(start, config.questions_per_run)
            ]
            done, _ = wait(futures, return_when=FIRST_EXCEPTION)
            failed = next((f for f in done if f.exception() is not None), None)
            if failed is not None:
                pool.shutdown(wait=True, cancel_futures=True)
                exc = failed.exception()
                if isinstance(exc, (BackendError, EndpointUnavailable)):
                    raise FatalBackendOutage(
                        f"run {run_index} aborted: {exc}", resume_token=str(log_path)
                    ) from exc
                raise exc
    return log_path


def _run_one(
    runtime: Runtime, run_seed: int, run_index: int, index: int, writer: RunLogWriter
) -> None:
    writer.write(_answer_one(runtime, run_seed, run_index, index))


def parse_run_index(log_path: Path) -> int:
    stem = Path(log_path).stem
    if not (stem.startswith("run-") and stem[4:].isdigit()):
        raise ValueError(f"cannot infer run index from {log_path}")
    return int(stem[4:])


def execute_runs(runtime: Runtime, resume_path: Path | None = None) -> list[Path]:
    """All configured runs in order; optionally restart from a crashed log."""
    first = 0
    paths: list[Path] = []
    if resume_path is not None:
        first = parse_run_index(resume_path)
        paths = [
            run_log_path(runtime.config.output_dir, i) for i in range(first)
        ]
        run_assessment(runtime, first, log_path=Path(resume_path), resume=True)
        paths.append(Path(resume_path))
        first += 1
    for run_index in range(first, runtime.config.runs):
        paths.append(run_assessment(runtime, run_index))
    return paths


# -- calibrate ----------------------------------------------------------------


def calibrate_command(
    log_paths: list[Path],
    out_path: Path,
    prior_path: Path | None = None,
    timestamp: str | None = None,
) -> tuple[WeightTable, list[str]]:
    """Fit weights from finished run logs and write them as a weight file."""
    records: list[CalibrationRecord] = []
    for path in sorted(Path(p) for p in log_paths):
        for record in read_run_log(path):
            records.append(record_calibration(record, str(path)))
    if not records:
        raise EmptyRun("no records found in the given run logs")
    prior = load_weight_table(prior_path)
    table, flags = calibrate(records, prior)
    if timestamp is not None:
        table = replace(table, calibrated_at=timestamp)
    for flag in flags:
        log.warning("calibration: %s", flag)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_weight_table(table, out_path)
    return table, flags


# -- report -------------------------------------------------------------------

_SUMMARY_METRICS = ("accuracy", "weighted_accuracy", "abstain_rate", "halu_bok", "halu_dok")


def report_command(
    log_paths: list[Path],
    out_dir: Path,
    weight_path: Path | None = None,
    dok_variant: str = "aligned",
) -> Path:
    """Per-run report JSON plus a cross-run summary (JSON and CSV)."""
    weights = load_weight_table(weight_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    for path in sorted(Path(p) for p in log_paths):
        records = read_run_log(path)
        if not records:
            raise EmptyRun(f"{path} holds no records")
        outcomes = [record_outcome(r, str(path)) for r in records]
        report = build_report(outcomes, weights.avg_qd, dok_variant)
        report_path = out_dir / f"{path.stem}-report.json"
        report_path.write_text(
            canonical_json(report.to_dict()) + "\n", encoding="utf-8"
        )
        rows.append({"run": path.stem, **report.to_dict()})

    summary: dict = {"runs": len(rows)}
    for metric in _SUMMARY_METRICS:
        values = [row[metric] for row in rows if row[metric] is not None]
        if values:
            mean, stddev = cross_run_summary(values)
            summary[metric] = {"mean": mean, "stddev": stddev, "runs_counted": len(values)}
        else:
            summary[metric] = None
    (out_dir / "summary.json").write_text(canonical_json(summary) + "\n", encoding="utf-8")

    csv_path = out_dir / "summary.csv"
    fields = ["run", "n_questions", "accuracy", "weighted_accuracy", "wa_capped",
              "assessment_qd", "abstain_rate", "halu_bok", "halu_dok"]
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fields})
    return out_dir / "summary.json"
