"""Batch driver: run the full evaluation/recovery pipeline over instances,
emit per-instance JSONL records and aggregate them into a metrics CSV.

A missing or empty candidate plan is evaluated as the empty plan (the
defaulted record), so group means always cover every instance.  Aggregation
works on the serialized record dicts, which makes re-aggregating a JSONL
file reproduce the batch CSV byte for byte.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import PipelineConfig
from .errors import (
    InstanceError,
    ManifestError,
    PlanEvalError,
    RecoveryFailed,
    SearchBudgetExceeded,
)
from .lcs import best_subplan, lcs_analyze
from .pddl import DomainModel, Plan, ProblemModel, parse_domain, parse_plan, parse_problem
from .planner import solve_optimal
from .recovery import RecoveryOutcome, recover, steps_to_validity
from .scoring import normalize_score, plan_score, potential
from .similarity import aqm_score, non_positional_aqm, pair_actions
from .simulator import goal_satisfied, simulate
from .transform import Transformation, find_best_variant, score_variant

SCHEMA_VERSION = 1

REPORT_COLUMNS = [
    "model", "prompt_type", "domain", "instances",
    "pi0_SR", "Score", "AQM", "StV", "LEA",
    "pi1_SR", "pi2_SR", "pi2_LEA", "pi3_SR", "pi3_StV", "pi3_LEA",
    "pi4_SR", "corr_len",
]


# ---------------------------------------------------------------------------
# Single-instance evaluation
# ---------------------------------------------------------------------------


@dataclass
class EvaluationRecord:
    """Full metric vector for one instance, self-contained for re-aggregation."""

    instance_id: str
    model: str
    prompt_type: str
    domain: str
    gt_length: int
    flags: dict[str, bool]
    pi0: dict
    pi1: dict
    pi2: dict
    pi3: dict
    pi4: dict
    potential: float
    corr_length: float
    comp_length: float

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "instance_id": self.instance_id,
            "model": self.model,
            "prompt_type": self.prompt_type,
            "domain": self.domain,
            "gt_length": self.gt_length,
            "flags": self.flags,
            "pi0": self.pi0,
            "pi1": self.pi1,
            "pi2": self.pi2,
            "pi3": self.pi3,
            "pi4": self.pi4,
            "potential": self.potential,
            "corr_length": self.corr_length,
            "comp_length": self.comp_length,
        }


def _plan_metrics(plan: Plan, problem: ProblemModel, stv: int | None = None) -> dict:
    result = simulate(plan, problem)
    metrics = {
        "valid": result.executable and goal_satisfied(result.final_state, problem.goal),
        "executable": result.executable,
        "length": len(plan),
        "lea": result.lea,
    }
    if stv is not None:
        metrics["stv"] = stv
    return metrics


def _stv(plan: Plan, gt: Plan, problem: ProblemModel, provider) -> int:
    pairing, aqm = pair_actions(plan, gt, provider=provider)
    return len(steps_to_validity(plan, aqm, pairing, gt, problem))


def evaluate_instance(domain: DomainModel, problem: ProblemModel,
                      plan_text: str | None, gt_plan_text: str | None = None,
                      gt_plan: Plan | None = None,
                      config: PipelineConfig | None = None,
                      instance_id: str = "", model: str = "",
                      prompt_type: str = "") -> EvaluationRecord:
    """Run the whole pipeline for one candidate plan.

    ``gt_plan_text``/``gt_plan`` supply the ground truth; with neither given
    the built-in planner solves the instance.  A ``None`` plan text marks a
    failed generation and is evaluated as the empty plan.  Any stage failure
    is wrapped in :class:`InstanceError` naming the stage.
    """
    if config is None:
        config = PipelineConfig()
    provider = config.provider()
    flags = {
        "generation_missing": plan_text is None,
        "replan_failed": False,
        "transform_budget_exceeded": False,
    }

    def stage(name: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PlanEvalError as exc:
            raise InstanceError(name, exc) from exc

    if gt_plan is None:
        if gt_plan_text is not None:
            gt_plan = stage("parse-gt", parse_plan, gt_plan_text, domain, problem,
                            label="pi_gt")
        else:
            gt_plan = stage("solve-gt", solve_optimal, problem, domain,
                            timeout=config.planner_timeout,
                            external_cmd=config.external_planner, label="pi_gt")

    pi0 = stage("parse-plan", parse_plan, plan_text or "", domain, problem, label="pi0")

    sim0 = simulate(pi0, problem)
    valid0 = sim0.executable and goal_satisfied(sim0.final_state, problem.goal)

    pairing, aqm = stage("pairing", pair_actions, pi0, gt_plan, provider=provider)
    np_aqm = non_positional_aqm(aqm, pairing, provider=provider)
    lcs0 = stage("lcs", lcs_analyze, pi0, gt_plan)
    breakdown0 = stage("score", plan_score, pi0, gt_plan, pairing, lcs0, valid0)
    normalized0 = normalize_score(breakdown0, pi0, gt_plan)

    try:
        pi1, variant1 = find_best_variant(pi0, gt_plan, problem, domain, config,
                                          provider=provider)
    except SearchBudgetExceeded as exc:
        flags["transform_budget_exceeded"] = True
        if exc.best is not None:
            pi1, variant1 = exc.best
        else:
            identity = Transformation(0, tuple((o, o) for o in sorted(pi0.objects())))
            variant1 = score_variant(pi0, identity, gt_plan, problem, len(pi0), config)
            pi1 = pi0
    except PlanEvalError as exc:
        raise InstanceError("transform", exc) from exc
    pi1 = pi1.with_label("pi1")

    pi2 = stage("subplan", best_subplan, pi0, gt_plan, problem, label="pi2")
    pi3 = stage("subplan", best_subplan, pi1, gt_plan, problem, label="pi3")

    steps0 = stage("stv", steps_to_validity, pi0, aqm, pairing, gt_plan, problem)
    stv0 = len(steps0)
    stv1 = stage("stv", _stv, pi1, gt_plan, problem, provider)
    stv2 = stage("stv", _stv, pi2, gt_plan, problem, provider)
    stv3 = stage("stv", _stv, pi3, gt_plan, problem, provider)

    # Potential per action; the empty plan is defaulted on the GT length.
    n_eff = len(pi0) if len(pi0) > 0 else len(gt_plan)
    potential_score = stage("potential", potential, breakdown0.total,
                            variant1.penalized, n_eff, valid0,
                            reward=config.validity_reward)

    outcome: RecoveryOutcome | None = None
    try:
        outcome = recover(pi0, gt_plan, problem, domain,
                          timeout=config.planner_timeout,
                          external_cmd=config.external_planner)
    except RecoveryFailed:
        flags["replan_failed"] = True

    pi0_metrics = _plan_metrics(pi0, problem, stv=stv0)
    pi0_metrics.update({
        "score": {
            "base": float(breakdown0.base),
            "similarity_sum": float(breakdown0.similarity_sum),
            "pair_bonus": float(breakdown0.pair_bonus),
            "substring_bonus": float(breakdown0.substring_bonus),
            "subsequence_bonus": float(breakdown0.subsequence_bonus),
            "length_penalty": float(breakdown0.length_penalty),
            "total": float(breakdown0.total),
        },
        "normalized_score": float(normalized0),
        "aqm": list(aqm.label_names()),
        "np_aqm": list(np_aqm.label_names()),
        "aqm_score": float(aqm_score(aqm)),
        "np_aqm_score": float(aqm_score(np_aqm)),
        "per_action_scores": [float(s) for s in pairing.per_action_scores],
        "steps": [step.to_json() for step in steps0],
    })

    pi1_metrics = _plan_metrics(pi1, problem, stv=stv1)
    pi1_metrics.update({
        "shift": variant1.transformation.shift,
        "mapping": {src: dst for src, dst in variant1.transformation.mapping
                    if src != dst},
        "raw_score": float(variant1.breakdown.total),
        "transform_penalty": float(variant1.penalty),
        "penalized_score": float(variant1.penalized),
    })

    if outcome is not None:
        pi4_metrics = _plan_metrics(outcome.final, problem)
        pi4_metrics["present"] = True
        corr_length = float(len(outcome.corr))
        comp_length = float(len(outcome.comp))
    else:
        pi4_metrics = {"valid": False, "executable": False, "length": 0, "lea": 0,
                       "present": False}
        corr_length = 0.0
        comp_length = 0.0

    return EvaluationRecord(
        instance_id=instance_id,
        model=model,
        prompt_type=prompt_type,
        domain=domain.name,
        gt_length=len(gt_plan),
        flags=flags,
        pi0=pi0_metrics,
        pi1=pi1_metrics,
        pi2=_plan_metrics(pi2, problem, stv=stv2),
        pi3=_plan_metrics(pi3, problem, stv=stv3),
        pi4=pi4_metrics,
        potential=float(potential_score.potential),
        corr_length=corr_length,
        comp_length=comp_length,
    )


# ---------------------------------------------------------------------------
# Manifest handling
# ---------------------------------------------------------------------------

MANIFEST_COLUMNS = ("instance_id", "domain_path", "problem_path", "plan_path",
                    "model", "prompt_type")


@dataclass(frozen=True)
class ManifestRow:
    row_number: int
    instance_id: str
    domain_path: Path
    problem_path: Path
    plan_path: Path | None
    gt_plan_path: Path | None
    model: str
    prompt_type: str


def load_manifest(path: str | Path) -> list[ManifestRow]:
    path = Path(path)
    base = path.parent
    rows: list[ManifestRow] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            raise ManifestError(0, f"missing columns: {', '.join(missing)}")
        for row_number, row in enumerate(reader, start=2):
            for column in MANIFEST_COLUMNS:
                if not (row.get(column) or "").strip():
                    if column == "plan_path":
                        continue  # empty plan path = defaulted instance
                    raise ManifestError(row_number, f"empty '{column}'")
            gt_raw = (row.get("gt_plan_path") or "").strip()
            plan_raw = (row.get("plan_path") or "").strip()
            rows.append(ManifestRow(
                row_number=row_number,
                instance_id=row["instance_id"].strip(),
                domain_path=base / row["domain_path"].strip(),
                problem_path=base / row["problem_path"].strip(),
                plan_path=base / plan_raw if plan_raw else None,
                gt_plan_path=base / gt_raw if gt_raw else None,
                model=row["model"].strip(),
                prompt_type=row["prompt_type"].strip(),
            ))
    return rows


# Per-process cache of solved/parsed ground truths keyed by problem path.
_GT_CACHE: dict[tuple[str, str], Plan] = {}


def _evaluate_row(row: ManifestRow, config: PipelineConfig) -> dict:
    try:
        domain = parse_domain(row.domain_path.read_text(encoding="utf-8"))
        problem = parse_problem(row.problem_path.read_text(encoding="utf-8"), domain)
    except (OSError, PlanEvalError) as exc:
        raise InstanceError("load", exc if isinstance(exc, PlanEvalError)
                            else PlanEvalError(str(exc)))

    plan_text: str | None
    if row.plan_path is not None and row.plan_path.is_file():
        plan_text = row.plan_path.read_text(encoding="utf-8")
        if not plan_text.strip():
            plan_text = None
    else:
        plan_text = None

    gt_plan = None
    gt_plan_text = None
    if row.gt_plan_path is not None:
        try:
            gt_plan_text = row.gt_plan_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InstanceError("load", PlanEvalError(str(exc)))
    else:
        cache_key = (str(row.domain_path), str(row.problem_path))
        gt_plan = _GT_CACHE.get(cache_key)
        if gt_plan is None:
            try:
                gt_plan = solve_optimal(problem, domain, timeout=config.planner_timeout,
                                        external_cmd=config.external_planner,
                                        label="pi_gt")
            except PlanEvalError as exc:
                raise InstanceError("solve-gt", exc) from exc
            _GT_CACHE[cache_key] = gt_plan

    record = evaluate_instance(
        domain, problem, plan_text, gt_plan_text=gt_plan_text, gt_plan=gt_plan,
        config=config, instance_id=row.instance_id, model=row.model,
        prompt_type=row.prompt_type,
    )
    return record.to_json()


def _evaluate_row_safe(row: ManifestRow, config: PipelineConfig) -> dict:
    try:
        return _evaluate_row(row, config)
    except InstanceError as exc:
        return {
            "schema": SCHEMA_VERSION,
            "instance_id": row.instance_id,
            "model": row.model,
            "prompt_type": row.prompt_type,
            "error": {"stage": exc.stage, "message": str(exc.cause)},
        }


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def aggregate(records: list[dict]) -> list[dict]:
    """Group records by (model, prompt_type, domain) and average each metric.

    Error records are skipped; defaulted records participate fully, so SR
    denominators cover every evaluated instance.
    """
    groups: dict[tuple[str, str, str], list[dict]] = {}
    for record in records:
        if "error" in record:
            continue
        key = (record["model"], record["prompt_type"], record["domain"])
        groups.setdefault(key, []).append(record)

    rows = []
    for key in sorted(groups):
        members = groups[key]
        count = len(members)

        def mean(values) -> float:
            return sum(values) / count

        rows.append({
            "model": key[0],
            "prompt_type": key[1],
            "domain": key[2],
            "instances": count,
            "pi0_SR": mean(float(r["pi0"]["valid"]) for r in members),
            "Score": mean(r["pi0"]["normalized_score"] for r in members),
            "AQM": mean(r["pi0"]["aqm_score"] for r in members),
            "StV": mean(r["pi0"]["stv"] for r in members),
            "LEA": mean(r["pi0"]["lea"] for r in members),
            "pi1_SR": mean(float(r["pi1"]["valid"]) for r in members),
            "pi2_SR": mean(float(r["pi2"]["valid"]) for r in members),
            "pi2_LEA": mean(r["pi2"]["lea"] for r in members),
            "pi3_SR": mean(float(r["pi3"]["valid"]) for r in members),
            "pi3_StV": mean(r["pi3"]["stv"] for r in members),
            "pi3_LEA": mean(r["pi3"]["lea"] for r in members),
            "pi4_SR": mean(float(r["pi4"]["valid"]) for r in members),
            "corr_len": mean(r["corr_length"] for r in members),
        })
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(rows: list[dict], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row[column]) for column in REPORT_COLUMNS])


def write_jsonl(records: list[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


# ---------------------------------------------------------------------------
# Batch driver
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    records: list[dict] = field(default_factory=list)
    report_rows: list[dict] = field(default_factory=list)
    failed_rows: list[str] = field(default_factory=list)

    @property
    def had_errors(self) -> bool:
        return bool(self.failed_rows)


def evaluate_batch(manifest_path: str | Path, jobs: int = 1,
                   out_jsonl: str | Path | None = None,
                   out_csv: str | Path | None = None,
                   config: PipelineConfig | None = None) -> BatchResult:
    """Evaluate every manifest row, in manifest order regardless of *jobs*.

    Partial results are still flushed when some rows fail; failed rows carry
    an ``error`` entry in the JSONL output and are reported in the result.
    """
    if config is None:
        config = PipelineConfig()
    rows = load_manifest(manifest_path)

    if jobs <= 1:
        records = [_evaluate_row_safe(row, config) for row in rows]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate_row_safe, rows,
                                    [config] * len(rows), chunksize=1))

    result = BatchResult(records=records)
    result.failed_rows = [r["instance_id"] for r in records if "error" in r]
    result.report_rows = aggregate(records)
    if out_jsonl is not None:
        write_jsonl(records, out_jsonl)
    if out_csv is not None:
        write_report_csv(result.report_rows, out_csv)
    return result
