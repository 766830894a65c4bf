"""Repair effort (steps to validity) and planner-backed plan recovery.

Recovery finds the last ground-truth state the candidate's trace ever
reaches, keeps the shortest prefix that reaches it (``corr``), replans from
there (``comp``) and concatenates the two.  A plan that is already valid is
returned unchanged.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import PlanningTimeout, PlanningUnsolvable, RecoveryFailed
from .pddl import DomainModel, GroundAction, Plan, ProblemModel, State
from .planner import DEFAULT_TIMEOUT, replan_from
from .similarity import ActionQualityMap, PairingResult, QualityLabel
from .simulator import goal_satisfied, is_valid, simulate


class StepKind(enum.Enum):
    REMOVE = "remove_action"
    REORDER = "reorder_action"
    REPAIR = "repair_action"
    REPLACE = "replace_action"
    ADD = "add_action"

    def __str__(self) -> str:
        return self.value


#: Label-to-fix table; each operation costs 1.
FIX_FOR_LABEL = {
    QualityLabel.MISPLACED: StepKind.REORDER,
    QualityLabel.SAME_ACT: StepKind.REPAIR,
    QualityLabel.DIFF_ACT: StepKind.REPLACE,
}


@dataclass(frozen=True)
class RepairStep:
    kind: StepKind
    index: int | None = None  # 1-based index into the candidate plan
    gt_action: GroundAction | None = None

    def to_json(self) -> dict:
        payload: dict = {"kind": self.kind.value}
        if self.index is not None:
            payload["index"] = self.index
        if self.gt_action is not None:
            payload["gt_action"] = str(self.gt_action)
        return payload


@dataclass(frozen=True)
class RecoveryOutcome:
    corr: Plan
    comp: Plan
    final: Plan
    divergence_state_index: int  # position in the ground-truth trace


def steps_to_validity(plan: Plan, aqm: ActionQualityMap, pairing: PairingResult,
                      gt: Plan, problem: ProblemModel) -> list[RepairStep]:
    """Label-guided edit steps toward the valid, optimal ground truth.

    Phase 1 removes every redundant action and stops if the pruned plan is
    already valid.  Phase 2 emits each remaining non-correct action's fix,
    counting a repair whenever the action had any similarity.  Phase 3 adds
    each ground-truth action missing from the pruned plan, except that
    pending repairs absorb additions one for one.
    """
    steps: list[RepairStep] = []
    kept_indices: list[int] = []
    for i, label in enumerate(aqm.labels):
        if label is QualityLabel.REDUNDANT:
            steps.append(RepairStep(StepKind.REMOVE, index=i + 1))
        else:
            kept_indices.append(i)
    pruned = Plan(tuple(plan[i] for i in kept_indices))
    if is_valid(pruned, problem):
        return steps

    repairs = 0
    for i in kept_indices:
        label = aqm.labels[i]
        if label is QualityLabel.CORRECT:
            continue
        steps.append(RepairStep(FIX_FOR_LABEL[label], index=i + 1))
        if pairing.per_action_scores[i] > 0:
            repairs += 1

    pruned_keys = {action.key for action in pruned}
    for gt_action in gt:
        if gt_action.key not in pruned_keys:
            if repairs > 0:
                repairs -= 1
            else:
                steps.append(RepairStep(StepKind.ADD, gt_action=gt_action))
    return steps


def divergence_point(plan_trace: tuple[State, ...],
                     gt_trace: tuple[State, ...]) -> tuple[int, int]:
    """Largest ground-truth trace position whose state appears anywhere in the
    plan trace, and the shortest plan prefix length reaching that state.

    Position 0 (the shared initial state) always qualifies.
    """
    for k in range(len(gt_trace) - 1, -1, -1):
        target = gt_trace[k]
        for prefix_length, state in enumerate(plan_trace):
            if state == target:
                return k, prefix_length
    raise AssertionError("traces share no state; both must start at init")


def recover(plan: Plan, gt: Plan, problem: ProblemModel, domain: DomainModel,
            timeout: float = DEFAULT_TIMEOUT,
            external_cmd: str | None = None) -> RecoveryOutcome:
    """Build the recovered plan ``corr ++ comp``.

    Raises :class:`RecoveryFailed` when replanning is unsolvable or times
    out; for a solvable problem the recovered plan is always valid.
    """
    plan_sim = simulate(plan, problem)
    gt_sim = simulate(gt, problem)
    k, prefix_length = divergence_point(plan_sim.trace, gt_sim.trace)

    if plan_sim.executable and goal_satisfied(plan_sim.final_state, problem.goal):
        # Already valid: keep the whole plan, nothing to complete.
        return RecoveryOutcome(corr=plan.with_label("pi_corr"), comp=Plan(label="pi_comp"),
                               final=plan.with_label("pi4"), divergence_state_index=k)

    corr = Plan(plan.actions[:prefix_length], label="pi_corr")
    start_state = plan_sim.trace[prefix_length]
    try:
        comp = replan_from(start_state, problem, domain, timeout=timeout,
                           external_cmd=external_cmd, label="pi_comp")
    except (PlanningUnsolvable, PlanningTimeout) as exc:
        raise RecoveryFailed(exc) from exc
    final = Plan(corr.actions + comp.actions, label="pi4")
    return RecoveryOutcome(corr=corr, comp=comp, final=final, divergence_state_index=k)
